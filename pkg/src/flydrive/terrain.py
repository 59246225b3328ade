"""Slope-annotated occupancy grids for route planning.

A grid cell carries an elevation and a class: free, obstacle (blocks driving
but can be overflown), or no_fly (blocks flying; drivable if free of
obstacles it is not, the class is exclusive). Cells are addressed (row, col)
with row 0 at the first line of the ASCII form.
"""

from __future__ import annotations

import json
import math
import textwrap
from dataclasses import dataclass

FREE = "free"
OBSTACLE = "obstacle"
NO_FLY = "no_fly"
CELL_CLASSES = (FREE, OBSTACLE, NO_FLY)

_ASCII_CLASSES = {".": FREE, "#": OBSTACLE, "~": NO_FLY}


class TerrainError(ValueError):
    """Malformed terrain description."""


@dataclass(frozen=True)
class TerrainGrid:
    width: int  # columns
    height: int  # rows
    cell_size_m: float
    elevation_m: tuple[tuple[float, ...], ...]  # [row][col]
    classes: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise TerrainError("grid dimensions must be >= 1")
        if self.cell_size_m <= 0:
            raise TerrainError("cell_size_m must be > 0")
        if len(self.elevation_m) != self.height or len(self.classes) != self.height:
            raise TerrainError("row count mismatch")
        for r in range(self.height):
            if len(self.elevation_m[r]) != self.width or len(self.classes[r]) != self.width:
                raise TerrainError(f"row {r}: column count mismatch")
            for c in range(self.width):
                if not math.isfinite(self.elevation_m[r][c]):
                    raise TerrainError(f"cell ({r}, {c}): elevation must be finite")
                if self.classes[r][c] not in CELL_CLASSES:
                    raise TerrainError(
                        f"cell ({r}, {c}): unknown class {self.classes[r][c]!r}"
                    )

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    def elevation_at(self, cell: tuple[int, int]) -> float:
        return self.elevation_m[cell[0]][cell[1]]

    def class_at(self, cell: tuple[int, int]) -> str:
        return self.classes[cell[0]][cell[1]]

    def neighbors4(self, cell: tuple[int, int]) -> list[tuple[int, int]]:
        r, c = cell
        return [
            (nr, nc)
            for nr, nc in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c))
            if self.in_bounds((nr, nc))
        ]

    def max_neighbor_slope_deg(self, cell: tuple[int, int]) -> float:
        """Steepest elevation gradient to any 4-neighbor, in degrees."""
        e = self.elevation_at(cell)
        worst = 0.0
        for n in self.neighbors4(cell):
            rise = abs(self.elevation_at(n) - e)
            worst = max(worst, math.degrees(math.atan2(rise, self.cell_size_m)))
        return worst

    def mirrored(self) -> "TerrainGrid":
        """Left-right mirror (columns reversed); used by symmetry checks."""
        return TerrainGrid(
            width=self.width,
            height=self.height,
            cell_size_m=self.cell_size_m,
            elevation_m=tuple(tuple(reversed(row)) for row in self.elevation_m),
            classes=tuple(tuple(reversed(row)) for row in self.classes),
        )

    def to_json_dict(self) -> dict:
        flat = [self.elevation_m[r][c] for r in range(self.height) for c in range(self.width)]
        obstacles = sorted(
            [r, c]
            for r in range(self.height)
            for c in range(self.width)
            if self.classes[r][c] == OBSTACLE
        )
        no_fly = sorted(
            [r, c]
            for r in range(self.height)
            for c in range(self.width)
            if self.classes[r][c] == NO_FLY
        )
        return {
            "width": self.width,
            "height": self.height,
            "cell_size_m": self.cell_size_m,
            "elevation_m": flat,
            "obstacles": obstacles,
            "no_fly": no_fly,
        }


def terrain_from_dict(data: dict, source: str = "<terrain>") -> TerrainGrid:
    """Build a grid from the JSON form: dimensions, row-major elevations,
    obstacle and no-fly cell lists."""
    try:
        width = int(data["width"])
        height = int(data["height"])
        cell_size = float(data["cell_size_m"])
    except KeyError as exc:
        raise TerrainError(f"{source}: missing key {exc.args[0]!r}") from None
    elev_flat = data.get("elevation_m", 0.0)
    if isinstance(elev_flat, (int, float)):
        elev_flat = [float(elev_flat)] * (width * height)
    if len(elev_flat) != width * height:
        raise TerrainError(
            f"{source}: elevation_m has {len(elev_flat)} entries, "
            f"expected {width * height}"
        )
    rows = tuple(
        tuple(float(elev_flat[r * width + c]) for c in range(width))
        for r in range(height)
    )
    classes = [[FREE] * width for _ in range(height)]
    for key, label in (("obstacles", OBSTACLE), ("no_fly", NO_FLY)):
        for entry in data.get(key, ()):
            r, c = int(entry[0]), int(entry[1])
            if not (0 <= r < height and 0 <= c < width):
                raise TerrainError(f"{source}: {key} cell ({r}, {c}) out of bounds")
            classes[r][c] = label
    return TerrainGrid(
        width=width,
        height=height,
        cell_size_m=cell_size,
        elevation_m=rows,
        classes=tuple(tuple(row) for row in classes),
    )


def terrain_from_json(text: str, source: str = "<terrain>") -> TerrainGrid:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TerrainError(f"{source}:{exc.lineno}: {exc.msg}") from None
    return terrain_from_dict(data, source)


def load_terrain_file(path) -> TerrainGrid:
    with open(path, "r", encoding="utf-8") as fh:
        return terrain_from_json(fh.read(), source=str(path))


def terrain_from_ascii(
    art: str, cell_size_m: float = 1.0, elevations: dict[str, float] | None = None
) -> TerrainGrid:
    """Small-grid helper for tests: '.' free, '#' obstacle, '~' no-fly,
    digits are free cells at that many meters of elevation."""
    lines = [ln for ln in (s.rstrip() for s in textwrap.dedent(art).splitlines()) if ln]
    if not lines:
        raise TerrainError("empty ASCII terrain")
    width = max(len(ln) for ln in lines)
    elev_rows, class_rows = [], []
    for ln in lines:
        ln = ln.ljust(width, ".")
        erow, crow = [], []
        for ch in ln:
            if ch in _ASCII_CLASSES:
                crow.append(_ASCII_CLASSES[ch])
                erow.append(0.0)
            elif ch.isdigit():
                crow.append(FREE)
                erow.append(float(ch))
            elif elevations and ch in elevations:
                crow.append(FREE)
                erow.append(elevations[ch])
            else:
                raise TerrainError(f"unknown terrain character {ch!r}")
        elev_rows.append(tuple(erow))
        class_rows.append(tuple(crow))
    return TerrainGrid(
        width=width,
        height=len(lines),
        cell_size_m=cell_size_m,
        elevation_m=tuple(elev_rows),
        classes=tuple(class_rows),
    )
