"""Tiny key=value file format used for profiles and CLI config files.

One ``key = value`` pair per line; blank lines and lines starting with ``#``
are ignored.  Values are kept as raw strings, callers convert types.
"""

from __future__ import annotations

import os
from .errors import CorpusFormatError


def parse_kv(text: str, source: str = "<string>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CorpusFormatError(f"{source}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise CorpusFormatError(f"{source}:{lineno}: empty key")
        if key in pairs:
            raise CorpusFormatError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def format_kv(pairs: dict[str, str]) -> str:
    return "".join(f"{key} = {value}\n" for key, value in pairs.items())


def load_kv(path: str | os.PathLike) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kv(fh.read(), source=str(path))


def dump_kv(path: str | os.PathLike, pairs: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_kv(pairs))
