"""Occupancy-grid world model: maps, goals, collision queries, generation, file I/O.

Coordinates are continuous cell units: a point (x, y) lies in the cell
(floor(x), floor(y)), x in [0, width), y in [0, height). The cell table is
indexed cells[y][x] with True marking an obstacle.

Map file formats:
  * text: first line "width height", then height rows of width characters,
    '.' free and '#' obstacle, row 0 = y 0;
  * binary PGM (P5): 0 = obstacle, 255 = free (any nonzero reads as free).
Goals files are CSV with one "x,y" pair per line.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import FormatError, GenerationFailed, OutOfBoundsError, PlacementFailed
from .pgm import read_pgm, write_pgm

# Component labeling uses 4-connectivity: the grid oracle forbids corner
# cutting, and a diagonal move with both orthogonal neighbors free is always
# replaceable by two orthogonal moves, so oracle reachability IS 4-connected
# reachability. Plain 8-connected labeling would join cells across corner
# pinches the oracle cannot traverse.
ORACLE_CONNECTIVITY = ndimage.generate_binary_structure(2, 1)

_RETRY_BUDGET = 100


@dataclass(frozen=True)
class Point:
    """A position in continuous cell units."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def cell(self) -> tuple[int, int]:
        """(column, row) of the containing cell."""
        return (int(math.floor(self.x)), int(math.floor(self.y)))

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class GridMap:
    """Immutable 2D occupancy grid; True cells are obstacles."""

    def __init__(self, cells: np.ndarray):
        arr = np.array(cells, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("cells must be a 2D table")
        height, width = arr.shape
        if width < 2 or height < 2:
            raise ValueError(f"map must be at least 2x2, got {width}x{height}")
        if arr.all():
            raise ValueError("map has no free cell")
        arr.setflags(write=False)
        self.cells = arr
        self.width = width
        self.height = height

    def __eq__(self, other):
        return (
            isinstance(other, GridMap)
            and self.width == other.width
            and self.height == other.height
            and bool(np.array_equal(self.cells, other.cells))
        )

    def __repr__(self):
        return f"GridMap({self.width}x{self.height}, density={self.density():.3f})"

    def density(self) -> float:
        """Fraction of blocked cells."""
        return float(self.cells.sum()) / (self.width * self.height)

    def in_bounds(self, p: Point) -> bool:
        return 0.0 <= p.x < self.width and 0.0 <= p.y < self.height

    def is_free(self, p: Point) -> bool:
        """True iff the cell containing p is not an obstacle."""
        if not self.in_bounds(p):
            raise OutOfBoundsError(f"point ({p.x}, {p.y}) outside {self.width}x{self.height} map")
        cx, cy = p.cell()
        return not self.cells[cy, cx]

    def cell_free(self, cx: int, cy: int) -> bool:
        """Free test by integer cell index; out-of-range indices count as blocked."""
        if 0 <= cx < self.width and 0 <= cy < self.height:
            return not self.cells[cy, cx]
        return False

    def segment_free(self, a: Point, b: Point, resolution: float) -> bool:
        """True iff every sample at spacing <= resolution along ab lies in free cells.

        Endpoints are sorted canonically before interpolation so the result is
        symmetric in (a, b). Sample count is ceil(|ab| / resolution) + 1.
        """
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        if not self.in_bounds(a):
            raise OutOfBoundsError(f"segment endpoint ({a.x}, {a.y}) out of bounds")
        if not self.in_bounds(b):
            raise OutOfBoundsError(f"segment endpoint ({b.x}, {b.y}) out of bounds")
        if (b.x, b.y) < (a.x, a.y):
            a, b = b, a
        dist = a.distance_to(b)
        n = int(math.ceil(dist / resolution)) + 1
        t = np.linspace(0.0, 1.0, n)
        xs = a.x + t * (b.x - a.x)
        ys = a.y + t * (b.y - a.y)
        cols = np.floor(xs).astype(np.intp)
        rows = np.floor(ys).astype(np.intp)
        return not self.cells[rows, cols].any()

    def segment_clear(self, a: Point, b: Point) -> bool:
        """Exact conservative collision test: no cell floor(p(t)) along the
        segment is blocked, for any t.

        Unlike the sampled segment_free this cannot miss corner clips, so a
        clear segment stays clear under sampled re-checks at any resolution.
        """
        if not self.in_bounds(a):
            raise OutOfBoundsError(f"segment endpoint ({a.x}, {a.y}) out of bounds")
        if not self.in_bounds(b):
            raise OutOfBoundsError(f"segment endpoint ({b.x}, {b.y}) out of bounds")
        cells = self.cells
        x, y = a.cell()
        ex, ey = b.cell()
        if cells[y, x] or cells[ey, ex]:
            return False
        dx = b.x - a.x
        dy = b.y - a.y
        step_x = 1 if dx > 0 else -1 if dx < 0 else 0
        step_y = 1 if dy > 0 else -1 if dy < 0 else 0
        t_max_x = math.inf if step_x == 0 else ((x + (step_x > 0)) - a.x) / dx
        t_max_y = math.inf if step_y == 0 else ((y + (step_y > 0)) - a.y) / dy
        t_delta_x = math.inf if step_x == 0 else abs(1.0 / dx)
        t_delta_y = math.inf if step_y == 0 else abs(1.0 / dy)
        limit = self.width + self.height + 4
        for _ in range(limit):
            if (x, y) == (ex, ey):
                return True
            if min(t_max_x, t_max_y) >= 1.0:
                # remaining crossings lie at or beyond the endpoint, whose
                # cell was already validated
                return True
            if t_max_x < t_max_y:
                x += step_x
                t_max_x += t_delta_x
            elif t_max_y < t_max_x:
                y += step_y
                t_max_y += t_delta_y
            else:
                # exact corner crossing: the corner instant lies in the cell
                # whose indices are the floor of the corner point
                corner_x = x + (step_x > 0)
                corner_y = y + (step_y > 0)
                if cells[corner_y, corner_x]:
                    return False
                x += step_x
                y += step_y
                t_max_x += t_delta_x
                t_max_y += t_delta_y
            if cells[y, x]:
                return False
        return (x, y) == (ex, ey)

    def free_cells(self) -> np.ndarray:
        """(N, 2) int array of free-cell (x, y) indices in row-major order."""
        if not hasattr(self, "_free_cells"):
            rows, cols = np.nonzero(~self.cells)
            cells = np.column_stack([cols, rows]).astype(np.intp)
            cells.setflags(write=False)
            self._free_cells = cells
        return self._free_cells

    def component_labels(self) -> np.ndarray:
        """Oracle-reachable component label per cell; 0 on obstacles."""
        if not hasattr(self, "_labels"):
            labels, _ = ndimage.label(~self.cells, structure=ORACLE_CONNECTIVITY)
            labels.setflags(write=False)
            self._labels = labels
        return self._labels

    def largest_component_cells(self) -> np.ndarray:
        """(N, 2) free-cell (x, y) indices of the largest free component."""
        labels = self.component_labels()
        counts = np.bincount(labels.ravel())
        counts[0] = 0
        best = int(counts.argmax())
        rows, cols = np.nonzero(labels == best)
        return np.column_stack([cols, rows]).astype(np.intp)

    def same_component(self, a: Point, b: Point) -> bool:
        labels = self.component_labels()
        ax, ay = a.cell()
        bx, by = b.cell()
        return labels[ay, ax] != 0 and labels[ay, ax] == labels[by, bx]


class GoalSet:
    """An ordered set of at least two pairwise-distinct goal points."""

    def __init__(self, goals):
        pts = tuple(goals)
        if len(pts) < 2:
            raise ValueError(f"need at least 2 goals, got {len(pts)}")
        seen = set()
        for p in pts:
            key = (p.x, p.y)
            if key in seen:
                raise ValueError(f"duplicate goal at ({p.x}, {p.y})")
            seen.add(key)
        self.goals = pts

    def __len__(self):
        return len(self.goals)

    def __iter__(self):
        return iter(self.goals)

    def __getitem__(self, i) -> Point:
        return self.goals[i]

    def __eq__(self, other):
        return isinstance(other, GoalSet) and self.goals == other.goals

    def __repr__(self):
        return f"GoalSet({len(self.goals)} goals)"

    def validate_on(self, grid: GridMap) -> None:
        """Raise if any goal lies in a blocked cell."""
        for i, p in enumerate(self.goals):
            if not grid.is_free(p):
                raise ValueError(f"goal {i} at ({p.x}, {p.y}) is inside an obstacle")


@dataclass(frozen=True)
class ObstacleSpec:
    """Parameters for random rectangular-obstacle placement.

    The generator places between count_range[0] and count_range[1] axis-aligned
    rectangles, stopping early once blocked density reaches a target drawn from
    density_range. A map is accepted when its final density lies inside
    density_range and the largest free component holds at least half the free
    cells.
    """

    count_range: tuple[int, int] = (0, 64)
    size_range: tuple[int, int] = (2, 10)
    density_range: tuple[float, float] = (0.0, 0.35)

    def __post_init__(self):
        if self.count_range[0] < 0 or self.count_range[0] > self.count_range[1]:
            raise ValueError(f"bad count_range {self.count_range}")
        if self.size_range[0] < 1 or self.size_range[0] > self.size_range[1]:
            raise ValueError(f"bad size_range {self.size_range}")
        lo, hi = self.density_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError(f"bad density_range {self.density_range}")


def generate_map(seed: int, width: int, height: int, spec: ObstacleSpec | None = None) -> GridMap:
    """Generate a random obstacle map, deterministic for a fixed seed.

    Retries internally (bounded) until density and connectivity constraints
    hold; raises GenerationFailed when the budget is exhausted.
    """
    spec = spec or ObstacleSpec()
    rng = np.random.default_rng(_check_seed(seed))
    total = width * height
    cmin, cmax = spec.count_range
    dmin, dmax = spec.density_range

    for _ in range(_RETRY_BUDGET):
        cells = np.zeros((height, width), dtype=bool)
        target = rng.uniform(dmin, dmax)
        placed = 0
        while placed < cmax:
            if placed >= cmin and cells.sum() / total >= target:
                break
            w = int(rng.integers(spec.size_range[0], spec.size_range[1] + 1))
            h = int(rng.integers(spec.size_range[0], spec.size_range[1] + 1))
            w = min(w, width)
            h = min(h, height)
            x0 = int(rng.integers(0, width - w + 1))
            y0 = int(rng.integers(0, height - h + 1))
            cells[y0 : y0 + h, x0 : x0 + w] = True
            placed += 1

        density = cells.sum() / total
        if not (dmin <= density <= dmax):
            continue
        if cells.all():
            continue
        labels, count = ndimage.label(~cells, structure=ORACLE_CONNECTIVITY)
        free = (~cells).sum()
        if count > 0:
            sizes = np.bincount(labels.ravel())
            sizes[0] = 0
            if sizes.max() >= 0.5 * free:
                return GridMap(cells)

    raise GenerationFailed(
        f"no admissible {width}x{height} map with density in [{dmin}, {dmax}] "
        f"after {_RETRY_BUDGET} attempts"
    )


def place_goals(grid: GridMap, m: int, seed: int, min_separation: float = 0.0) -> GoalSet:
    """Place m goals at cell centers of the largest free component.

    Goals occupy pairwise-distinct cells and keep pairwise Euclidean distance
    >= min_separation. Deterministic per seed; raises PlacementFailed when the
    rejection-sampling budget runs out.
    """
    if m < 2:
        raise ValueError(f"need m >= 2 goals, got {m}")
    if min_separation < 0:
        raise ValueError("min_separation must be nonnegative")
    rng = np.random.default_rng(_check_seed(seed))
    cells = grid.largest_component_cells()
    if len(cells) < m:
        raise PlacementFailed(f"component has {len(cells)} cells, cannot host {m} goals")

    for _ in range(_RETRY_BUDGET):
        chosen: list[tuple[int, int]] = []
        points: list[Point] = []
        for _ in range(_RETRY_BUDGET * m):
            cx, cy = (int(v) for v in cells[int(rng.integers(len(cells)))])
            if (cx, cy) in chosen:
                continue
            p = Point(cx + 0.5, cy + 0.5)
            if all(p.distance_to(q) >= min_separation for q in points):
                chosen.append((cx, cy))
                points.append(p)
                if len(points) == m:
                    return GoalSet(points)
    raise PlacementFailed(
        f"could not place {m} goals with separation {min_separation} "
        f"after {_RETRY_BUDGET} restarts"
    )


def save_map(path, grid: GridMap) -> None:
    """Write a map as text, or as PGM when the path ends in .pgm."""
    if _is_pgm(path):
        write_pgm(path, np.where(grid.cells, 0, 255).astype(np.uint8))
        return
    lines = [f"{grid.width} {grid.height}"]
    for y in range(grid.height):
        lines.append("".join("#" if grid.cells[y, x] else "." for x in range(grid.width)))
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_map(path) -> GridMap:
    """Read a map written by save_map (text or PGM)."""
    if _is_pgm(path):
        raster = read_pgm(path)
        return GridMap(raster == 0)
    with open(path, "r", encoding="ascii") as f:
        lines = f.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty map file")
    header = lines[0].split()
    if len(header) != 2:
        raise FormatError(f"{path} line 1: expected 'width height', got {lines[0]!r}")
    try:
        width, height = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError(f"{path} line 1: non-integer dimensions {lines[0]!r}") from None
    if len(lines) < 1 + height:
        raise FormatError(f"{path}: expected {height} rows, file has {len(lines) - 1}")
    cells = np.zeros((height, width), dtype=bool)
    for y in range(height):
        row = lines[1 + y]
        if len(row) != width:
            raise FormatError(f"{path} line {y + 2}: expected {width} characters, got {len(row)}")
        for x, ch in enumerate(row):
            if ch == "#":
                cells[y, x] = True
            elif ch != ".":
                raise FormatError(f"{path} line {y + 2}: invalid character {ch!r}")
    return GridMap(cells)


def save_goals(path, goals: GoalSet) -> None:
    """Write goals as CSV, one "x,y" pair per line."""
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for p in goals:
            f.write(f"{p.x!r},{p.y!r}\n")


def load_goals(path) -> GoalSet:
    """Read a goals CSV; line number = goal index."""
    points = []
    with open(path, "r", encoding="ascii") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FormatError(f"{path} row {lineno}: expected 'x,y', got {line!r}")
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise FormatError(f"{path} row {lineno}: non-numeric pair {line!r}") from None
            points.append(Point(x, y))
    if len(points) < 2:
        raise FormatError(f"{path}: goals file needs at least 2 rows, got {len(points)}")
    return GoalSet(points)


def _is_pgm(path) -> bool:
    return os.fspath(path).lower().endswith(".pgm")


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not (0 <= seed < 2**64):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed
