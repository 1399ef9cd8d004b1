"""Pairwise distance and promising-region estimation, and weight-matrix assembly.

Estimators map a goal pair on a map to a (distance, region mask) estimate.
Three strategies are provided: straight-line distance, an exact 8-connected
grid oracle (Dijkstra shortest path dilated into a region), and externally
produced predictions loaded from files.
"""

from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    DimensionMismatch,
    FormatError,
    InvalidMatrix,
    MissingPrediction,
    Unreachable,
)
from .grid import GoalSet, GridMap, Point
from .pgm import read_pgm, write_pgm

SQRT2 = math.sqrt(2.0)

# Fixed expansion order; deterministic tie-breaking depends on it.
# (dx, dy, step cost) for E, N, W, S, NE, NW, SW, SE with N = -y.
NEIGHBORS_8 = (
    (1, 0, 1.0),
    (0, -1, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (1, -1, SQRT2),
    (-1, -1, SQRT2),
    (-1, 1, SQRT2),
    (1, 1, SQRT2),
)


class RegionMask:
    """Per-cell promise values in [0, 1] over a map-sized table."""

    def __init__(self, values: np.ndarray):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("mask values must be 2D")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("mask values must lie in [0, 1]")
        arr.setflags(write=False)
        self.values = arr
        self.height, self.width = arr.shape

    def __eq__(self, other):
        return isinstance(other, RegionMask) and bool(np.array_equal(self.values, other.values))

    def check_shape(self, grid: GridMap) -> None:
        if (self.height, self.width) != (grid.height, grid.width):
            raise DimensionMismatch(
                f"mask is {self.width}x{self.height}, map is {grid.width}x{grid.height}"
            )

    def cells_at_least(self, threshold: float) -> np.ndarray:
        """(N, 2) (x, y) indices of cells with value >= threshold, row-major."""
        rows, cols = np.nonzero(self.values >= threshold)
        return np.column_stack([cols, rows]).astype(np.intp)

    def to_u8(self) -> np.ndarray:
        return np.round(self.values * 255.0).astype(np.uint8)

    @classmethod
    def from_u8(cls, raster: np.ndarray) -> "RegionMask":
        return cls(raster.astype(np.float64) / 255.0)


@dataclass(frozen=True)
class PairEstimate:
    """Estimated path length (cell units) and promising region for one goal pair."""

    distance: float
    mask: RegionMask

    def __post_init__(self):
        if not math.isfinite(self.distance) or self.distance < 0:
            raise ValueError(f"estimated distance must be finite and >= 0, got {self.distance}")


class WeightMatrix:
    """Symmetric pairwise cost table with zero diagonal; input to the TSP solver."""

    def __init__(self, w: np.ndarray):
        arr = np.array(w, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidMatrix(f"weight matrix must be square, got shape {arr.shape}")
        m = arr.shape[0]
        if m < 2:
            raise InvalidMatrix(f"weight matrix needs at least 2 vertices, got {m}")
        if not np.isfinite(arr).all():
            raise InvalidMatrix("weight matrix has non-finite entries")
        if (np.diag(arr) != 0.0).any():
            raise InvalidMatrix("weight matrix diagonal must be exactly zero")
        if not (arr == arr.T).all():
            raise InvalidMatrix("weight matrix must be exactly symmetric")
        off = arr[~np.eye(m, dtype=bool)]
        if (off <= 0.0).any():
            raise InvalidMatrix("off-diagonal weights must be strictly positive")
        arr.setflags(write=False)
        self.w = arr
        self.m = m

    def __getitem__(self, ij) -> float:
        return float(self.w[ij])

    def __eq__(self, other):
        return isinstance(other, WeightMatrix) and bool(np.array_equal(self.w, other.w))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as f:
            for row in self.w:
                f.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "WeightMatrix":
        rows = []
        with open(path, "r", encoding="ascii") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append([float(v) for v in line.split(",")])
                except ValueError:
                    raise FormatError(f"{path} row {lineno}: non-numeric entry") from None
        if not rows:
            raise FormatError(f"{path}: empty weight matrix")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise FormatError(f"{path} row {i + 1}: expected {width} columns, got {len(row)}")
        return cls(np.array(rows, dtype=np.float64))


def grid_shortest_path(grid: GridMap, a: Point, b: Point) -> tuple[list[tuple[int, int]], float]:
    """Shortest 8-connected cell-center path between the cells of a and b.

    Orthogonal steps cost 1, diagonal steps sqrt(2); a diagonal move is
    forbidden when either adjacent orthogonal cell is blocked. Ties are broken
    by the fixed neighbor order and FIFO heap ordering, so the returned path
    is deterministic. Returns (cell path, length); raises Unreachable when no
    path exists.
    """
    if not grid.is_free(a):
        raise ValueError(f"start ({a.x}, {a.y}) is not in a free cell")
    if not grid.is_free(b):
        raise ValueError(f"goal ({b.x}, {b.y}) is not in a free cell")
    start = a.cell()
    goal = b.cell()
    if start == goal:
        return [start], 0.0

    dist: dict[tuple[int, int], float] = {start: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    done: set[tuple[int, int]] = set()
    counter = 0
    heap: list[tuple[float, int, tuple[int, int]]] = [(0.0, counter, start)]

    while heap:
        d, _, cell = heapq.heappop(heap)
        if cell in done:
            continue
        if cell == goal:
            path = [cell]
            while cell != start:
                cell = parent[cell]
                path.append(cell)
            path.reverse()
            return path, d
        done.add(cell)
        x, y = cell
        for dx, dy, cost in NEIGHBORS_8:
            nx, ny = x + dx, y + dy
            if not grid.cell_free(nx, ny):
                continue
            if dx != 0 and dy != 0:
                if not (grid.cell_free(x + dx, y) and grid.cell_free(x, y + dy)):
                    continue
            nd = d + cost
            if nd < dist.get((nx, ny), math.inf):
                dist[(nx, ny)] = nd
                parent[(nx, ny)] = cell
                counter += 1
                heapq.heappush(heap, (nd, counter, (nx, ny)))

    raise Unreachable(f"no grid path from cell {start} to cell {goal}")


def default_dilation_radius(grid: GridMap) -> float:
    """Dilation radius scaled to the map: max dimension / 32 (8 cells at 256)."""
    return max(grid.width, grid.height) / 32.0


def dilate_path_to_region(grid: GridMap, path, radius: float) -> RegionMask:
    """Mark free cells whose center lies within radius of some path cell center."""
    if not path:
        raise ValueError("path must be nonempty")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    on_path = np.zeros((grid.height, grid.width), dtype=bool)
    for x, y in path:
        on_path[y, x] = True
    dist = ndimage.distance_transform_edt(~on_path)
    region = (dist <= radius) & ~grid.cells
    return RegionMask(region.astype(np.float64))


class Estimator:
    """Strategy interface: deterministic goal pair -> (distance, region) estimate."""

    name = "base"

    def estimate(self, grid: GridMap, a: Point, b: Point, pair=None) -> PairEstimate:
        raise NotImplementedError


class EuclideanEstimator(Estimator):
    """Straight-line distance; carries no region information (all free cells promising)."""

    name = "euclidean"

    def estimate(self, grid, a, b, pair=None):
        mask = RegionMask((~grid.cells).astype(np.float64))
        return PairEstimate(a.distance_to(b), mask)


class GridOracleEstimator(Estimator):
    """Exact grid shortest-path length with the optimal path dilated into a region."""

    name = "oracle"

    def __init__(self, dilation_radius: float | None = None):
        self.dilation_radius = dilation_radius

    def estimate(self, grid, a, b, pair=None):
        path, length = grid_shortest_path(grid, a, b)
        radius = self.dilation_radius if self.dilation_radius is not None else default_dilation_radius(grid)
        return PairEstimate(length, dilate_path_to_region(grid, path, radius))


class ExternalEstimator(Estimator):
    """Estimates read back from a prediction directory (see load_external_predictions)."""

    name = "external"

    def __init__(self, distances: dict, masks: dict, source: str = ""):
        self.distances = distances
        self.masks = masks
        self.source = source

    def estimate(self, grid, a, b, pair=None):
        if pair is None:
            raise MissingPrediction(
                "external estimates are keyed by goal indices; pass pair=(i, j)"
            )
        key = (min(pair), max(pair))
        if key not in self.distances or key not in self.masks:
            raise MissingPrediction(f"no stored prediction for pair {key} in {self.source!r}")
        mask = self.masks[key]
        mask.check_shape(grid)
        return PairEstimate(self.distances[key], mask)


def estimate_pair(est: Estimator, grid: GridMap, a: Point, b: Point, pair=None) -> PairEstimate:
    """Run one estimator on one goal pair."""
    return est.estimate(grid, a, b, pair=pair)


def build_weight_matrix(
    grid: GridMap, goals: GoalSet, est: Estimator
) -> tuple[WeightMatrix, dict]:
    """Estimate all M*(M-1)/2 unordered goal pairs and assemble the symmetric matrix.

    Returns (matrix, masks) where masks maps each (i, j) with i < j to that
    pair's region. An unreachable pair aborts construction: a partial graph
    cannot guarantee the visiting order.
    """
    goals.validate_on(grid)
    m = len(goals)
    w = np.zeros((m, m), dtype=np.float64)
    masks: dict[tuple[int, int], RegionMask] = {}
    for i in range(m):
        for j in range(i + 1, m):
            try:
                pe = est.estimate(grid, goals[i], goals[j], pair=(i, j))
            except Unreachable as exc:
                raise Unreachable(f"goal pair ({i}, {j}) is unreachable: {exc}", pair=(i, j)) from exc
            w[i, j] = w[j, i] = pe.distance
            masks[(i, j)] = pe.mask
    return WeightMatrix(w), masks


def pair_mask_filename(i: int, j: int) -> str:
    return f"pair_{min(i, j)}_{max(i, j)}.pgm"


def export_predictions(directory, grid: GridMap, goals: GoalSet, est: Estimator):
    """Write per-pair masks and distances in the external-prediction layout.

    Produces pair_i_j.pgm (mask scaled to 0..255) and distances.csv with rows
    "i,j,distance". Returns the (matrix, masks) pair that was exported.
    """
    os.makedirs(directory, exist_ok=True)
    matrix, masks = build_weight_matrix(grid, goals, est)
    with open(os.path.join(directory, "distances.csv"), "w", encoding="ascii", newline="\n") as f:
        for (i, j), mask in sorted(masks.items()):
            write_pgm(os.path.join(directory, pair_mask_filename(i, j)), mask.to_u8())
            f.write(f"{i},{j},{matrix[i, j]!r}\n")
    return matrix, masks


def load_external_predictions(directory, map_id: str | None = None) -> ExternalEstimator:
    """Load an ExternalEstimator from a prediction directory.

    The directory (or its map_id subdirectory) must hold distances.csv with
    rows "i,j,distance" and one pair_i_j.pgm mask per listed pair.
    """
    root = os.path.join(directory, map_id) if map_id else os.fspath(directory)
    dist_path = os.path.join(root, "distances.csv")
    if not os.path.exists(dist_path):
        raise MissingPrediction(f"{root}: no distances.csv")
    distances: dict[tuple[int, int], float] = {}
    with open(dist_path, "r", encoding="ascii") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise FormatError(f"{dist_path} row {lineno}: expected 'i,j,distance'")
            try:
                i, j, d = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise FormatError(f"{dist_path} row {lineno}: bad entry {line!r}") from None
            distances[(min(i, j), max(i, j))] = d
    masks: dict[tuple[int, int], RegionMask] = {}
    for i, j in distances:
        mask_path = os.path.join(root, pair_mask_filename(i, j))
        if not os.path.exists(mask_path):
            raise MissingPrediction(f"missing mask file for pair ({i}, {j}): {mask_path}")
        masks[(i, j)] = RegionMask.from_u8(read_pgm(mask_path))
    return ExternalEstimator(distances, masks, source=root)


def make_estimator(kind: str, dilation_radius: float | None = None) -> Estimator:
    """Build an estimator from a CLI-style spec: euclidean | oracle | external:<dir>."""
    if kind == "euclidean":
        return EuclideanEstimator()
    if kind == "oracle":
        return GridOracleEstimator(dilation_radius)
    if kind.startswith("external:"):
        return load_external_predictions(kind.split(":", 1)[1])
    raise ValueError(f"unknown estimator {kind!r} (expected euclidean, oracle, or external:<dir>)")
