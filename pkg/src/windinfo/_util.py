"""Small shared helpers: atomic text output and float formatting."""

import os
from pathlib import Path

__all__ = ["atomic_write_text", "fmt17", "fmtr"]


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file + rename, so readers never
    observe a half-written file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def fmt17(x: float) -> str:
    """17-significant-digit decimal form (full float64 precision)."""
    return format(float(x), ".17g")


def fmtr(x: float) -> str:
    """Shortest decimal form that round-trips the float64 bit pattern."""
    return repr(float(x))
