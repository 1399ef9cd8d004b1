import math

import numpy as np
import pytest

from multigoal import (
    DimensionMismatch,
    EuclideanEstimator,
    FormatError,
    GoalSet,
    GridMap,
    GridOracleEstimator,
    InvalidMatrix,
    MissingPrediction,
    Point,
    RegionMask,
    Unreachable,
    WeightMatrix,
    build_weight_matrix,
    dilate_path_to_region,
    estimate_pair,
    export_predictions,
    generate_map,
    grid_shortest_path,
    load_external_predictions,
    place_goals,
)

SQRT2 = math.sqrt(2.0)


def empty_map(w, h):
    return GridMap(np.zeros((h, w), dtype=bool))


def relaxation_distances(grid, start_cell):
    """Independent oracle: Bellman-Ford style relaxation to a fixpoint over all
    cells, with the same step costs and no-corner-cutting rule."""
    dist = {start_cell: 0.0}
    moves = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
             (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2)]
    changed = True
    while changed:
        changed = False
        for (x, y), d in sorted(dist.items()):
            for dx, dy, c in moves:
                nx, ny = x + dx, y + dy
                if not grid.cell_free(nx, ny):
                    continue
                if dx and dy and not (grid.cell_free(x + dx, y) and grid.cell_free(x, y + dy)):
                    continue
                nd = d + c
                if nd < dist.get((nx, ny), math.inf) - 1e-12:
                    dist[(nx, ny)] = nd
                    changed = True
    return dist


class TestGridShortestPath:
    def test_straight_diagonal(self):
        g = empty_map(3, 3)
        path, length = grid_shortest_path(g, Point(0.5, 0.5), Point(2.5, 2.5))
        assert length == pytest.approx(2 * SQRT2, abs=1e-12)
        assert path[0] == (0, 0) and path[-1] == (2, 2)

    def test_center_blocked_detour(self):
        cells = np.zeros((3, 3), dtype=bool)
        cells[1, 1] = True
        g = GridMap(cells)
        path, length = grid_shortest_path(g, Point(0.5, 0.5), Point(2.5, 2.5))
        oracle = relaxation_distances(g, (0, 0))[(2, 2)]
        assert oracle == pytest.approx(4.0, abs=1e-12)
        assert length == pytest.approx(oracle, abs=1e-12)

    def test_unreachable(self):
        cells = np.zeros((8, 8), dtype=bool)
        cells[:, 4] = True
        g = GridMap(cells)
        with pytest.raises(Unreachable):
            grid_shortest_path(g, Point(1.5, 1.5), Point(6.5, 6.5))

    def test_same_cell(self):
        g = empty_map(4, 4)
        path, length = grid_shortest_path(g, Point(1.2, 1.2), Point(1.8, 1.8))
        assert path == [(1, 1)] and length == 0.0

    def test_matches_relaxation_oracle_on_random_maps(self):
        rng = np.random.default_rng(7)
        for trial in range(5):
            cells = rng.random((10, 10)) < 0.25
            cells[0, 0] = False
            g = GridMap(cells)
            oracle = relaxation_distances(g, (0, 0))
            for (cx, cy), expect in sorted(oracle.items())[:40]:
                _, length = grid_shortest_path(g, Point(0.5, 0.5), Point(cx + 0.5, cy + 0.5))
                assert length == pytest.approx(expect, abs=1e-9)

    def test_no_corner_cutting(self):
        # diagonal squeeze: (0,0) and (1,1) free, (1,0) and (0,1) blocked
        cells = np.zeros((4, 4), dtype=bool)
        cells[0, 1] = True
        cells[1, 0] = True
        g = GridMap(cells)
        with pytest.raises(Unreachable):
            grid_shortest_path(g, Point(0.5, 0.5), Point(1.5, 1.5))

    def test_path_cells_are_free_and_adjacent(self):
        g = GridMap(np.random.default_rng(3).random((12, 12)) < 0.2)
        cells = g.largest_component_cells()
        a = Point(cells[0][0] + 0.5, cells[0][1] + 0.5)
        b = Point(cells[-1][0] + 0.5, cells[-1][1] + 0.5)
        path, _ = grid_shortest_path(g, a, b)
        for (x0, y0), (x1, y1) in zip(path, path[1:]):
            assert max(abs(x1 - x0), abs(y1 - y0)) == 1
            assert g.cell_free(x1, y1)

    def test_metric_on_small_map(self):
        # symmetry and triangle inequality by exhaustive all-pairs runs
        g = GridMap(np.random.default_rng(5).random((8, 8)) < 0.2)
        cells = [tuple(c) for c in g.largest_component_cells()][:12]
        pts = [Point(x + 0.5, y + 0.5) for x, y in cells]
        d = {}
        for i, a in enumerate(pts):
            for j, b in enumerate(pts):
                d[i, j] = grid_shortest_path(g, a, b)[1]
        for i in range(len(pts)):
            assert d[i, i] == 0.0
            for j in range(len(pts)):
                assert d[i, j] == pytest.approx(d[j, i], abs=1e-9)
                for k in range(len(pts)):
                    assert d[i, j] <= d[i, k] + d[k, j] + 1e-9


class TestDilation:
    def test_radius_zero_is_path_cells(self):
        g = empty_map(8, 8)
        path, _ = grid_shortest_path(g, Point(0.5, 0.5), Point(6.5, 2.5))
        mask = dilate_path_to_region(g, path, 0.0)
        marked = {(x, y) for x, y in np.argwhere(mask.values.T == 1.0)}
        assert marked == set(path)

    def test_huge_radius_covers_free_space(self):
        cells = np.zeros((6, 6), dtype=bool)
        cells[2, 2] = True
        g = GridMap(cells)
        mask = dilate_path_to_region(g, [(0, 0)], radius=100.0)
        assert np.array_equal(mask.values == 1.0, ~g.cells)

    def test_radius_1_5_marks_nine_cells(self):
        # enumerate cell-center distances from (5,5): |dx|,|dy| <= 1 qualifies
        g = empty_map(12, 12)
        expected = {
            (5 + dx, 5 + dy)
            for dx in (-2, -1, 0, 1, 2)
            for dy in (-2, -1, 0, 1, 2)
            if math.hypot(dx, dy) <= 1.5
        }
        assert len(expected) == 9
        mask = dilate_path_to_region(g, [(5, 5)], 1.5)
        marked = {(x, y) for x, y in np.argwhere(mask.values.T == 1.0)}
        assert marked == expected

    def test_obstacles_never_marked(self):
        g = GridMap(np.random.default_rng(9).random((10, 10)) < 0.3)
        cells = g.largest_component_cells()
        mask = dilate_path_to_region(g, [tuple(cells[0])], 3.0)
        assert (mask.values[g.cells] == 0.0).all()

    def test_empty_path_rejected(self):
        with pytest.raises(ValueError):
            dilate_path_to_region(empty_map(4, 4), [], 1.0)


class TestEuclideanEstimator:
    def test_3_4_5(self):
        g = empty_map(8, 8)
        pe = EuclideanEstimator().estimate(g, Point(0, 0), Point(3, 4))
        assert pe.distance == 5.0

    def test_same_point(self):
        g = empty_map(8, 8)
        assert EuclideanEstimator().estimate(g, Point(2, 2), Point(2, 2)).distance == 0.0

    def test_translation_invariance(self):
        g = empty_map(8, 8)
        assert EuclideanEstimator().estimate(g, Point(1, 1), Point(4, 5)).distance == 5.0

    def test_mask_is_free_cells(self):
        cells = np.zeros((4, 4), dtype=bool)
        cells[1, 2] = True
        g = GridMap(cells)
        pe = EuclideanEstimator().estimate(g, Point(0.5, 0.5), Point(3.5, 3.5))
        assert np.array_equal(pe.mask.values == 1.0, ~g.cells)


class TestEstimatePair:
    def wall_gap_map(self):
        cells = np.zeros((8, 8), dtype=bool)
        cells[:, 4] = True
        cells[6, 4] = False
        return GridMap(cells)

    def test_oracle_on_empty_map(self):
        g = empty_map(3, 3)
        pe = estimate_pair(GridOracleEstimator(), g, Point(0.5, 0.5), Point(2.5, 2.5))
        assert pe.distance == pytest.approx(2 * SQRT2, abs=1e-12)
        assert pe.mask.values[0, 0] == 1.0 and pe.mask.values[2, 2] == 1.0

    def test_euclidean_equals_oracle_without_obstacles(self):
        g = empty_map(3, 3)
        eu = estimate_pair(EuclideanEstimator(), g, Point(0.5, 0.5), Point(2.5, 2.5))
        assert eu.distance == pytest.approx(2 * SQRT2, abs=1e-12)

    def test_oracle_detour_exceeds_euclidean(self):
        g = self.wall_gap_map()
        a, b = Point(1.5, 1.5), Point(6.5, 1.5)
        oracle = estimate_pair(GridOracleEstimator(), g, a, b)
        expect = relaxation_distances(g, a.cell())[b.cell()]
        assert oracle.distance == pytest.approx(expect, abs=1e-9)
        assert oracle.distance > a.distance_to(b)

    def test_determinism(self):
        g = self.wall_gap_map()
        a, b = Point(1.5, 1.5), Point(6.5, 1.5)
        p1 = estimate_pair(GridOracleEstimator(), g, a, b)
        p2 = estimate_pair(GridOracleEstimator(), g, a, b)
        assert p1.distance == p2.distance
        assert np.array_equal(p1.mask.values, p2.mask.values)


class CountingEstimator(EuclideanEstimator):
    def __init__(self):
        self.calls = 0

    def estimate(self, grid, a, b, pair=None):
        self.calls += 1
        return super().estimate(grid, a, b, pair=pair)


class TestBuildWeightMatrix:
    def test_euclidean_3_goals(self):
        g = empty_map(16, 16)
        goals = GoalSet([Point(1, 1), Point(4, 5), Point(13, 1)])
        w, masks = build_weight_matrix(g, goals, EuclideanEstimator())
        assert w[0, 1] == 5.0
        assert w[0, 2] == 12.0
        assert w[1, 2] == pytest.approx(math.hypot(9, 4), abs=1e-12)

    def test_one_call_per_unordered_pair(self):
        g = empty_map(16, 16)
        goals = GoalSet([Point(x + 0.5, 2.5) for x in range(0, 15, 3)])
        est = CountingEstimator()
        w, masks = build_weight_matrix(g, goals, est)
        n = len(goals) * (len(goals) - 1) // 2
        assert est.calls == n
        assert set(masks) == {(i, j) for i in range(len(goals)) for j in range(i + 1, len(goals))}

    def test_exact_symmetry_zero_diagonal(self):
        g = generate_map(13, 32, 32, None)
        goals = place_goals(g, 6, 2, 3)
        w, _ = build_weight_matrix(g, goals, GridOracleEstimator())
        assert (w.w == w.w.T).all()
        assert (np.diag(w.w) == 0).all()

    def test_oracle_dominates_euclidean(self):
        cells = np.zeros((12, 12), dtype=bool)
        cells[3:9, 5:7] = True
        g = GridMap(cells)
        goals = GoalSet([Point(1.5, 5.5), Point(10.5, 5.5), Point(1.5, 10.5), Point(10.5, 1.5)])
        w_o, _ = build_weight_matrix(g, goals, GridOracleEstimator())
        w_e, _ = build_weight_matrix(g, goals, EuclideanEstimator())
        for i in range(4):
            for j in range(i + 1, 4):
                assert w_o[i, j] >= w_e[i, j] - 1e-12

    def test_unreachable_aborts_with_pair(self):
        cells = np.zeros((8, 8), dtype=bool)
        cells[:, 4] = True
        g = GridMap(cells)
        goals = GoalSet([Point(1.5, 1.5), Point(2.5, 2.5), Point(6.5, 6.5)])
        with pytest.raises(Unreachable) as err:
            build_weight_matrix(g, goals, GridOracleEstimator())
        assert err.value.pair == (0, 2)


class TestWeightMatrix:
    def test_rejects_asymmetric(self):
        w = np.array([[0, 1.0], [2.0, 0]])
        with pytest.raises(InvalidMatrix):
            WeightMatrix(w)

    def test_rejects_negative(self):
        w = np.array([[0, -1.0], [-1.0, 0]])
        with pytest.raises(InvalidMatrix):
            WeightMatrix(w)

    def test_rejects_nonzero_diagonal(self):
        w = np.array([[0.5, 1.0], [1.0, 0]])
        with pytest.raises(InvalidMatrix):
            WeightMatrix(w)

    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        a = rng.uniform(1, 9, (5, 5))
        w = WeightMatrix(np.triu(a, 1) + np.triu(a, 1).T)
        path = tmp_path / "w.csv"
        w.to_csv(path)
        assert WeightMatrix.from_csv(path) == w

    def test_csv_bad_entry(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("0,1\nx,0\n")
        with pytest.raises(FormatError, match="row 2"):
            WeightMatrix.from_csv(path)


class TestExternalPredictions:
    def setup_exported(self, tmp_path):
        g = generate_map(31, 24, 24, None)
        goals = place_goals(g, 4, 8, 3)
        matrix, masks = export_predictions(tmp_path, g, goals, GridOracleEstimator())
        return g, goals, matrix, masks

    def test_round_trip(self, tmp_path):
        g, goals, matrix, masks = self.setup_exported(tmp_path)
        est = load_external_predictions(tmp_path)
        for i in range(4):
            for j in range(i + 1, 4):
                pe = est.estimate(g, goals[i], goals[j], pair=(i, j))
                assert pe.distance == matrix[i, j]
                assert np.abs(pe.mask.values - masks[(i, j)].values).max() <= 1 / 255
        w2, _ = build_weight_matrix(g, goals, est)
        assert w2 == matrix

    def test_missing_pair_file(self, tmp_path):
        g, goals, matrix, masks = self.setup_exported(tmp_path)
        (tmp_path / "pair_0_2.pgm").unlink()
        with pytest.raises(MissingPrediction, match=r"\(0, 2\)"):
            load_external_predictions(tmp_path)

    def test_unknown_pair_at_estimate(self, tmp_path):
        g, goals, *_ = self.setup_exported(tmp_path)
        est = load_external_predictions(tmp_path)
        with pytest.raises(MissingPrediction):
            est.estimate(g, goals[0], goals[1], pair=(0, 9))

    def test_dimension_mismatch(self, tmp_path):
        g, goals, *_ = self.setup_exported(tmp_path)
        est = load_external_predictions(tmp_path)
        wrong = GridMap(np.zeros((10, 10), dtype=bool))
        with pytest.raises(DimensionMismatch):
            est.estimate(wrong, goals[0], goals[1], pair=(0, 1))

    def test_map_id_subdirectory(self, tmp_path):
        g = generate_map(31, 24, 24, None)
        goals = place_goals(g, 3, 8, 3)
        export_predictions(tmp_path / "m7", g, goals, EuclideanEstimator())
        est = load_external_predictions(tmp_path, map_id="m7")
        assert est.estimate(g, goals[0], goals[1], pair=(0, 1)).distance > 0


class TestRegionMask:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            RegionMask(np.array([[0.5, 1.2]]))

    def test_u8_round_trip_is_close(self):
        rng = np.random.default_rng(4)
        values = rng.random((6, 6))
        m = RegionMask(values)
        back = RegionMask.from_u8(m.to_u8())
        assert np.abs(back.values - values).max() <= 0.5 / 255 + 1e-12
