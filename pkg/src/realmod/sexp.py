"""Minimal S-expression reader and printer for corpus files."""

from __future__ import annotations

from typing import Union

Sexp = Union[str, list]


class SexpError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


def read_all(text: str) -> list[Sexp]:
    """Every top-level form; ``;`` starts a comment."""
    out: list[Sexp] = []
    stack: list[list] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isspace():
            i += 1
            continue
        if c == "(":
            stack.append([])
            i += 1
            continue
        if c == ")":
            if not stack:
                raise SexpError("unbalanced ')'", i)
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
            i += 1
            continue
        j = i
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise SexpError("unterminated string", i)
            tok = text[i:j + 1]
            j += 1
        else:
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tok = text[i:j]
        (stack[-1] if stack else out).append(tok)
        i = j
    if stack:
        raise SexpError("missing ')'", n)
    return out


def read(text: str) -> Sexp:
    forms = read_all(text)
    if len(forms) != 1:
        raise SexpError(f"expected one form, found {len(forms)}", 0)
    return forms[0]


def dump(x: Sexp, width: int = 100, indent: int = 0) -> str:
    flat = _flat(x)
    if len(flat) + indent <= width or isinstance(x, str):
        return flat
    head = "(" + (dump(x[0]) if x else "")
    pad = " " * (indent + 2)
    rest = [pad + dump(y, width, indent + 2) for y in x[1:]]
    return head + ("\n" + "\n".join(rest) if rest else "") + ")"


def _flat(x: Sexp) -> str:
    if isinstance(x, str):
        return x
    return "(" + " ".join(_flat(y) for y in x) + ")"


def unquote(tok: str) -> str:
    return tok[1:-1] if len(tok) >= 2 and tok[0] == tok[-1] == '"' else tok
