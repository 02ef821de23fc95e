"""Session service: conversation state, share links and the HTTP API."""
