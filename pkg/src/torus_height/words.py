"""Reduced words in a free group.

A word is a tuple of ``(generator, ±1)`` letters.  The string form writes a
generator as its (single-character) name and its inverse in upper case, so
``"aB"`` is ``a b^-1``.  Token lists such as ``["a+", "b-"]`` are accepted too.
"""

from __future__ import annotations

from typing import Iterable, Sequence

Word = tuple


class WordError(ValueError):
    pass


def parse_word(w, basis: Sequence[str]) -> Word:
    names = set(basis)
    letters = []
    if isinstance(w, str):
        for ch in w:
            if ch in names:
                letters.append((ch, 1))
            elif ch.lower() in names and ch != ch.lower():
                letters.append((ch.lower(), -1))
            else:
                raise WordError(f"letter {ch!r} is not a basis element or its inverse")
        return tuple(letters)
    for tok in w:
        if len(tok) < 2 or tok[-1] not in "+-" or tok[:-1] not in names:
            raise WordError(f"bad letter token {tok!r}")
        letters.append((tok[:-1], 1 if tok[-1] == "+" else -1))
    return tuple(letters)


def format_word(w: Word) -> str:
    if all(isinstance(g, str) and len(g) == 1 and g.islower() for g, _ in w):
        return "".join(g if s > 0 else g.upper() for g, s in w)
    return " ".join(f"{g}{'+' if s > 0 else '-'}" for g, s in w)


def reduce_word(w: Iterable) -> Word:
    out: list = []
    for g, s in w:
        if out and out[-1] == (g, -s):
            out.pop()
        else:
            out.append((g, s))
    return tuple(out)


def is_reduced(w: Word) -> bool:
    return all(a[0] != b[0] or a[1] != -b[1] for a, b in zip(w, w[1:]))


def invert(w: Word) -> Word:
    return tuple((g, -s) for g, s in reversed(w))


def multiply(*ws: Word) -> Word:
    return reduce_word(x for w in ws for x in w)
