from __future__ import annotations

from dataclasses import dataclass

SEPARATOR = "|"


@dataclass(frozen=True, slots=True, order=True)
class CodePath:
    """
    Hierarchical diagnosis code, outermost class level first.

    Two codes are the same column only if their full prefix paths match, so a
    leaf label reused under different parents stays distinct.
    """

    levels: tuple[str, ...]

    @property
    def as_str(self) -> str:
        return SEPARATOR.join(self.levels)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def parent(self) -> CodePath | None:
        if len(self.levels) == 1:
            return None
        return CodePath(self.levels[:-1])

    def prefixes(self) -> list[CodePath]:
        """Every ancestor and the code itself, outermost first."""
        return [CodePath(self.levels[: i + 1]) for i in range(len(self.levels))]


def parse_code_path(s: str) -> CodePath:
    """
    Parse code paths like 'cardiovascular|shock|septic'.
    """
    if not s or not s.strip():
        raise ValueError("code path must look like LEVEL1|LEVEL2|...")
    levels = tuple(part.strip().lower() for part in s.split(SEPARATOR))
    if any(not level for level in levels):
        raise ValueError(f"code path has an empty level: {s!r}")
    return CodePath(levels=levels)
