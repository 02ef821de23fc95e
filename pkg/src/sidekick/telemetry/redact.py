"""Strip comments from logged C source before anything is stored.

Students put names, IDs and emails in comments, so comments are removed
wholesale. Comment markers inside string and character literals are code,
not comments, and are preserved byte-exact; everything outside comments is
left untouched. An unterminated block comment is removed to end of input.
"""

from __future__ import annotations

_CODE = 0
_LINE_COMMENT = 1
_BLOCK_COMMENT = 2
_STRING = 3
_CHAR = 4


def redact_source(source_text: str) -> str:
    out: list[str] = []
    state = _CODE
    i = 0
    n = len(source_text)
    while i < n:
        c = source_text[i]
        nxt = source_text[i + 1] if i + 1 < n else ""

        if state == _CODE:
            if c == "/" and nxt == "/":
                state = _LINE_COMMENT
                i += 2
            elif c == "/" and nxt == "*":
                state = _BLOCK_COMMENT
                i += 2
            elif c == '"':
                state = _STRING
                out.append(c)
                i += 1
            elif c == "'":
                state = _CHAR
                out.append(c)
                i += 1
            else:
                out.append(c)
                i += 1

        elif state == _LINE_COMMENT:
            if c == "\\" and nxt == "\n":
                i += 2  # line continuation keeps the comment going
            elif c == "\\" and nxt == "\r" and source_text[i + 2 : i + 3] == "\n":
                i += 3
            elif c == "\n":
                state = _CODE
                out.append(c)
                i += 1
            else:
                i += 1

        elif state == _BLOCK_COMMENT:
            if c == "*" and nxt == "/":
                state = _CODE
                i += 2
            else:
                i += 1

        elif state == _STRING:
            if c == "\\" and nxt:
                out.append(c)
                out.append(nxt)
                i += 2
            else:
                if c == '"':
                    state = _CODE
                out.append(c)
                i += 1

        else:  # _CHAR
            if c == "\\" and nxt:
                out.append(c)
                out.append(nxt)
                i += 2
            else:
                if c == "'":
                    state = _CODE
                out.append(c)
                i += 1

    return "".join(out)
