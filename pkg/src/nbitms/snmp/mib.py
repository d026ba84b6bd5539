"""MIB registry: OID name/type/access resolution plus icon hints for the map.

Loaded from a flat TSV file, one entry per line:
    oid<TAB>name<TAB>syntax<TAB>access[<TAB>icon_hint]
Lines starting with # and blank lines are ignored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from nbitms.errors import ConfigError
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import BerValue, syntax_class, syntax_name


class MibAccess(enum.Enum):
    READ_ONLY = "READ_ONLY"
    READ_WRITE = "READ_WRITE"


@dataclass(frozen=True)
class MibEntry:
    oid: Oid
    name: str
    syntax: str
    access: MibAccess
    icon_hint: Optional[str] = None


class MibRegistry:
    def __init__(self):
        self._entries: dict[Oid, MibEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def add(self, entry: MibEntry) -> None:
        if entry.oid in self._entries:
            raise ConfigError(f"duplicate MIB entry for {entry.oid}")
        syntax_class(entry.syntax)  # validates the syntax name
        self._entries[entry.oid] = entry

    def lookup(self, oid: Oid) -> Optional[MibEntry]:
        """Exact match preferred, else the longest registered prefix."""
        exact = self._entries.get(oid)
        if exact is not None:
            return exact
        best = None
        for entry in self._entries.values():
            if oid.starts_with(entry.oid):
                if best is None or len(entry.oid) > len(best.oid):
                    best = entry
        return best

    def by_name(self, name: str) -> Optional[MibEntry]:
        for entry in self._entries.values():
            if entry.name == name:
                return entry
        return None

    def entries(self) -> list[MibEntry]:
        return sorted(self._entries.values(), key=lambda e: e.oid.arcs)

    def syntax_matches(self, entry: MibEntry, value: BerValue) -> bool:
        return syntax_name(value) == entry.syntax

    @classmethod
    def load(cls, path: str | Path) -> "MibRegistry":
        registry = cls()
        problems = []
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (4, 5):
                problems.append(f"{path}:{lineno}: expected 4 or 5 tab-separated fields")
                continue
            try:
                entry = MibEntry(
                    oid=Oid(fields[0]),
                    name=fields[1],
                    syntax=fields[2],
                    access=MibAccess(fields[3]),
                    icon_hint=fields[4] if len(fields) == 5 else None,
                )
                syntax_class(entry.syntax)
            except (ValueError, KeyError) as exc:
                problems.append(f"{path}:{lineno}: {exc}")
                continue
            if entry.oid in registry._entries:
                problems.append(f"{path}:{lineno}: duplicate OID {entry.oid}")
                continue
            registry._entries[entry.oid] = entry
        if problems:
            raise ConfigError(f"invalid MIB registry {path}", problems)
        return registry
