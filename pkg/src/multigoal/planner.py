"""Sampling-based leg planners: region-guided hybrid-sampling RRT and RRT* baselines.

The hybrid sampler mixes a heuristic sampler (uniform over cells of the
promising region) with a goal-biased sampler controlled by a coefficient k:
with probability k the goal itself is returned, otherwise a random point
inside a random promising cell. The guided RRT stops at the first feasible
connection; RRT* runs its full sample budget and keeps the best
goal-connected path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NoPathFound
from .grid import GridMap, Point

_REWIRE_EPS = 1e-12


@dataclass(frozen=True)
class PlannerConfig:
    step_size: float = 2.0
    max_samples: int = 2000
    k: float = 0.1  # probability of drawing the goal instead of a region sample
    goal_tolerance: float = 2.0
    collision_resolution: float = 0.25
    rewire_radius: float = 6.0
    mask_threshold: float = 0.5
    seed: int = 0
    density_sampling: bool = False  # sample cells proportionally to mask value

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_samples < 1:
            raise ValueError("max_samples must be at least 1")
        if not 0.0 <= self.k <= 1.0:
            raise ValueError("k must lie in [0, 1]")
        if self.goal_tolerance < 0:
            raise ValueError("goal_tolerance must be nonnegative")
        if self.collision_resolution <= 0:
            raise ValueError("collision_resolution must be positive")
        if not 0.0 <= self.mask_threshold <= 1.0:
            raise ValueError("mask_threshold must lie in [0, 1]")

    @classmethod
    def for_map(cls, grid: GridMap, seed: int = 0, **overrides) -> "PlannerConfig":
        """Defaults scaled to the map: step 2% of the max dimension, tolerance
        equal to the step, rewire radius three steps."""
        step = 0.02 * max(grid.width, grid.height)
        cfg = cls(
            step_size=step,
            goal_tolerance=step,
            rewire_radius=3.0 * step,
            seed=seed,
        )
        return replace(cfg, **overrides) if overrides else cfg


class Tree:
    """An exploring tree rooted at the start point."""

    def __init__(self, root: Point, capacity: int):
        self._xy = np.empty((capacity, 2), dtype=np.float64)
        self._xy[0] = (root.x, root.y)
        self.size = 1
        self.parents = [-1]
        self.costs = [0.0]
        self.children: list[list[int]] = [[]]

    def point(self, idx: int) -> Point:
        return Point(float(self._xy[idx, 0]), float(self._xy[idx, 1]))

    def coords(self) -> np.ndarray:
        return self._xy[: self.size]

    def add(self, p: Point, parent: int, cost: float) -> int:
        idx = self.size
        if idx == len(self._xy):
            self._xy = np.vstack([self._xy, np.empty_like(self._xy)])
        self._xy[idx] = (p.x, p.y)
        self.size += 1
        self.parents.append(parent)
        self.costs.append(cost)
        self.children.append([])
        self.children[parent].append(idx)
        return idx

    def nearest(self, p: Point) -> int:
        d2 = np.square(self._xy[: self.size, 0] - p.x) + np.square(self._xy[: self.size, 1] - p.y)
        return int(np.argmin(d2))

    def near(self, p: Point, radius: float) -> np.ndarray:
        d2 = np.square(self._xy[: self.size, 0] - p.x) + np.square(self._xy[: self.size, 1] - p.y)
        return np.nonzero(d2 <= radius * radius)[0]

    def reparent(self, idx: int, new_parent: int, new_cost: float) -> None:
        """Attach idx under new_parent and shift the whole subtree's costs."""
        old_parent = self.parents[idx]
        self.children[old_parent].remove(idx)
        self.parents[idx] = new_parent
        self.children[new_parent].append(idx)
        delta = new_cost - self.costs[idx]
        stack = [idx]
        while stack:
            v = stack.pop()
            self.costs[v] += delta
            stack.extend(self.children[v])

    def chain(self, idx: int) -> list[Point]:
        """Points from the root to idx."""
        rev = []
        while idx >= 0:
            rev.append(self.point(idx))
            idx = self.parents[idx]
        rev.reverse()
        return rev


class PathPolyline:
    """A piecewise-linear path; length is the sum of segment lengths."""

    def __init__(self, points):
        pts = tuple(points)
        if len(pts) < 2:
            raise ValueError("polyline needs at least 2 points")
        self.points = pts
        self.length = path_cost(self)

    def __eq__(self, other):
        return isinstance(other, PathPolyline) and self.points == other.points

    def __repr__(self):
        return f"PathPolyline({len(self.points)} points, length={self.length:.3f})"

    def reverse(self) -> "PathPolyline":
        return PathPolyline(self.points[::-1])


def path_cost(p) -> float:
    """Polyline length: sum of Euclidean segment lengths."""
    pts = p.points if isinstance(p, PathPolyline) else tuple(p)
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += math.hypot(b.x - a.x, b.y - a.y)
    return total


def polyline_collision_free(grid: GridMap, poly: PathPolyline, resolution: float) -> bool:
    """Independent re-check of every segment at the given resolution."""
    return all(
        grid.segment_free(a, b, resolution) for a, b in zip(poly.points, poly.points[1:])
    )


def save_path(path, poly: PathPolyline) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for p in poly.points:
            f.write(f"{p.x!r},{p.y!r}\n")


def load_path(path) -> PathPolyline:
    points = []
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            line = line.strip()
            if line:
                x, y = line.split(",")
                points.append(Point(float(x), float(y)))
    return PathPolyline(points)


def nearest_node(tree: Tree, p: Point) -> int:
    """Index of the tree node closest to p; ties go to the lower index."""
    return tree.nearest(p)


def steer(frm: Point, to: Point, step: float) -> Point:
    """Move from frm toward to by at most step."""
    if step <= 0:
        raise ValueError("step must be positive")
    d = frm.distance_to(to)
    if d <= step:
        return to
    f = step / d
    return Point(frm.x + f * (to.x - frm.x), frm.y + f * (to.y - frm.y))


def _sample_point(cells: np.ndarray, rng, weights=None) -> Point:
    """Uniform point inside one cell of cells (weighted cell choice optional)."""
    if weights is None:
        idx = int(rng.integers(len(cells)))
    else:
        idx = int(rng.choice(len(cells), p=weights))
    x, y = cells[idx]
    dx = rng.random()
    dy = rng.random()
    return Point(float(x) + dx, float(y) + dy)


def hybrid_sample(mask, goal: Point, cfg: PlannerConfig, rng, fallback_cells=None) -> Point:
    """One draw of the hybrid sampler over a promising-region mask.

    With probability cfg.k the goal point is returned; otherwise a uniform
    point within a uniformly chosen cell whose mask value reaches
    cfg.mask_threshold. When no cell qualifies, sampling falls back to
    fallback_cells (pass the map's free cells) or, failing that, to every
    cell of the mask rectangle.
    """
    cells, weights = _region_cells(mask, cfg, fallback_cells)
    return _hybrid_draw(cells, goal, cfg, rng, weights)


def _hybrid_draw(cells, goal, cfg, rng, weights=None) -> Point:
    u = rng.random()
    if u > cfg.k:
        return _sample_point(cells, rng, weights)
    return goal


def _region_cells(mask, cfg: PlannerConfig, fallback_cells=None):
    if cfg.density_sampling:
        cells = mask.cells_at_least(np.nextafter(0.0, 1.0))
        if len(cells):
            vals = mask.values[cells[:, 1], cells[:, 0]]
            return cells, vals / vals.sum()
    else:
        cells = mask.cells_at_least(cfg.mask_threshold)
        if len(cells):
            return cells, None
    if fallback_cells is not None and len(fallback_cells):
        return fallback_cells, None
    xs, ys = np.meshgrid(np.arange(mask.width), np.arange(mask.height))
    return np.column_stack([xs.ravel(), ys.ravel()]).astype(np.intp), None


def plan_leg_rrt(
    grid: GridMap, start: Point, goal: Point, mask, cfg: PlannerConfig
) -> tuple[PathPolyline, int]:
    """Region-guided RRT between two goals; stops at the first feasible path.

    Returns (polyline, samples_used); deterministic per cfg.seed. Raises
    NoPathFound once max_samples draws are spent.
    """
    poly, samples, _tree = _rrt(grid, start, goal, mask, cfg)
    return poly, samples


def _rrt(grid, start, goal, mask, cfg):
    _check_endpoints(grid, start, goal)
    mask.check_shape(grid)
    rng = np.random.default_rng(cfg.seed)
    cells, weights = _region_cells(mask, cfg, grid.free_cells())

    tree = Tree(start, cfg.max_samples + 1)
    if start.distance_to(goal) <= cfg.goal_tolerance and grid.segment_clear(start, goal):
        return _finish([start], goal), 0, tree

    for samples in range(1, cfg.max_samples + 1):
        target = _hybrid_draw(cells, goal, cfg, rng, weights)
        near_idx = tree.nearest(target)
        near_pt = tree.point(near_idx)
        new_pt = steer(near_pt, target, cfg.step_size)
        d = near_pt.distance_to(new_pt)
        if d == 0.0:
            continue
        if not grid.segment_clear(near_pt, new_pt):
            continue
        idx = tree.add(new_pt, near_idx, tree.costs[near_idx] + d)
        if new_pt.distance_to(goal) <= cfg.goal_tolerance and grid.segment_clear(new_pt, goal):
            return _finish(tree.chain(idx), goal), samples, tree
    raise NoPathFound(f"no path within {cfg.max_samples} samples")


def plan_leg_rrt_star(
    grid: GridMap, start: Point, goal: Point, cfg: PlannerConfig
) -> tuple[PathPolyline, int]:
    """RRT* with choose-parent and rewiring; no region mask.

    Samples mix uniform free-cell draws with the same goal bias k the other
    planners use, runs the full sample budget, and returns the best
    goal-connected path.
    """
    poly, samples, _first, _tree = _rrt_star(grid, start, goal, cfg)
    return poly, samples


def _rrt_star(grid, start, goal, cfg):
    _check_endpoints(grid, start, goal)
    rng = np.random.default_rng(cfg.seed)
    cells = grid.free_cells()
    tree = Tree(start, cfg.max_samples + 1)
    candidates: dict[int, float] = {}
    first_length = None

    if start.distance_to(goal) <= cfg.goal_tolerance and grid.segment_clear(start, goal):
        candidates[0] = start.distance_to(goal)
        first_length = candidates[0]

    for _ in range(cfg.max_samples):
        target = _hybrid_draw(cells, goal, cfg, rng)
        near_idx = tree.nearest(target)
        near_pt = tree.point(near_idx)
        new_pt = steer(near_pt, target, cfg.step_size)
        if near_pt.distance_to(new_pt) == 0.0 or not grid.is_free(new_pt):
            continue

        neighbors = tree.near(new_pt, cfg.rewire_radius)
        if near_idx not in neighbors:
            neighbors = np.append(neighbors, near_idx)
        ranked = sorted(
            neighbors,
            key=lambda i: (tree.costs[i] + tree.point(i).distance_to(new_pt), i),
        )
        parent = -1
        for i in ranked:
            p = tree.point(i)
            if grid.segment_clear(p, new_pt):
                parent = int(i)
                new_cost = tree.costs[i] + p.distance_to(new_pt)
                break
        if parent < 0:
            continue
        idx = tree.add(new_pt, parent, new_cost)

        for i in neighbors:
            i = int(i)
            if i == parent:
                continue
            improved = new_cost + new_pt.distance_to(tree.point(i))
            if improved < tree.costs[i] - _REWIRE_EPS and grid.segment_clear(
                new_pt, tree.point(i)
            ):
                tree.reparent(i, idx, improved)

        if new_pt.distance_to(goal) <= cfg.goal_tolerance and grid.segment_clear(new_pt, goal):
            candidates[idx] = new_pt.distance_to(goal)
            if first_length is None:
                first_length = new_cost + candidates[idx]

    if not candidates:
        raise NoPathFound(f"no path within {cfg.max_samples} samples")
    best = min(candidates, key=lambda i: (tree.costs[i] + candidates[i], i))
    return _finish(tree.chain(best), goal), cfg.max_samples, first_length, tree


def _check_endpoints(grid, start, goal):
    if not grid.is_free(start):
        raise ValueError(f"start ({start.x}, {start.y}) is not free")
    if not grid.is_free(goal):
        raise ValueError(f"goal ({goal.x}, {goal.y}) is not free")


def _finish(points: list[Point], goal: Point) -> PathPolyline:
    if points[-1] != goal:
        points = list(points) + [goal]
    return PathPolyline(points)
