"""Resource ceilings for the brute-force engine.

Every enumeration that can blow up (table cells, assignment sweeps, hom
searches) is checked against a `Limits` value and fails loudly with
`ResourceLimitError` instead of hanging.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ResourceLimitError

DEFAULT_MAX_CELLS = 10**6
DEFAULT_MAX_ENUM = 10**6


@dataclass(frozen=True)
class Limits:
    max_cells: int = DEFAULT_MAX_CELLS
    max_enum: int = DEFAULT_MAX_ENUM

    def check_cells(self, what: str, needed: int) -> None:
        if needed > self.max_cells:
            raise ResourceLimitError(what, needed, self.max_cells)

    def check_enum(self, what: str, needed: int) -> None:
        if needed > self.max_enum:
            raise ResourceLimitError(what, needed, self.max_enum)


DEFAULT_LIMITS = Limits()
