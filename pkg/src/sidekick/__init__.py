"""Compiler-integrated conversational debugging assistant."""

__version__ = "0.1.0"
