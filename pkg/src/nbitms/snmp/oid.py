"""Object identifiers as immutable arc tuples with lexicographic ordering."""

from __future__ import annotations

import functools
from typing import Iterable


@functools.total_ordering
class Oid:
    """Dotted sequence of non-negative integer arcs, e.g. 1.3.6.1.2.1.1.5.0.

    At least two arcs; the first arc is 0..2 and the second is capped at 39
    under arcs 0 and 1 (X.660 root structure, required for the packed
    first-byte BER form).
    """

    __slots__ = ("arcs",)

    def __init__(self, arcs: Iterable[int] | str):
        if isinstance(arcs, str):
            arcs = _parse_dotted(arcs)
        arcs = tuple(int(a) for a in arcs)
        if len(arcs) < 2:
            raise ValueError(f"OID needs at least two arcs, got {arcs!r}")
        if any(a < 0 for a in arcs):
            raise ValueError(f"OID arcs must be non-negative: {arcs!r}")
        if arcs[0] > 2:
            raise ValueError(f"first OID arc must be 0..2, got {arcs[0]}")
        if arcs[0] < 2 and arcs[1] > 39:
            raise ValueError(f"second arc must be <= 39 under root {arcs[0]}")
        object.__setattr__(self, "arcs", arcs)

    def __setattr__(self, name, value):
        raise AttributeError("Oid is immutable")

    def __str__(self) -> str:
        return ".".join(str(a) for a in self.arcs)

    def __repr__(self) -> str:
        return f"Oid({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Oid) and self.arcs == other.arcs

    def __lt__(self, other: "Oid") -> bool:
        if not isinstance(other, Oid):
            return NotImplemented
        return self.arcs < other.arcs

    def __hash__(self) -> int:
        return hash(self.arcs)

    def __len__(self) -> int:
        return len(self.arcs)

    def child(self, *suffix: int) -> "Oid":
        return Oid(self.arcs + suffix)

    def starts_with(self, prefix: "Oid") -> bool:
        return self.arcs[: len(prefix.arcs)] == prefix.arcs


def _parse_dotted(text: str) -> tuple[int, ...]:
    text = text.strip().lstrip(".")
    if not text:
        raise ValueError("empty OID string")
    parts = text.split(".")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"malformed OID string {text!r}") from None
