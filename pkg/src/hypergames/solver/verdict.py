"""Verdict record shared by every solving route."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PROVEN = "proven"
DISPROVEN = "disproven"
UNKNOWN = "unknown"

# A "semantic" guarantee decides the property itself; a "game" guarantee only
# reports that the coalition wins the induced game, which is sound but may
# under-approximate the property.
SEMANTIC = "semantic"
GAME = "game"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a solving route, with its strength and optional witness."""

    status: str
    method: str
    guarantee: str
    detail: str = ""
    witness: Any = None
    bounds: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.status not in (PROVEN, DISPROVEN, UNKNOWN):
            raise ValueError(f"bad status {self.status!r}")
        if self.guarantee not in (SEMANTIC, GAME):
            raise ValueError(f"bad guarantee {self.guarantee!r}")

    def summary(self) -> str:
        """One-line human-readable outcome."""
        parts = [self.status, f"method={self.method}", f"guarantee={self.guarantee}"]
        if self.bounds:
            parts.append(" ".join(f"{k}={v}" for k, v in sorted(self.bounds.items())))
        if self.detail:
            parts.append(self.detail)
        return " | ".join(parts)
