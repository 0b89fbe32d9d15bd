import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadsplat.geometry import Conic2D, Cov2D, axis_extents, invert_cov
from quadsplat.quadbox import BoundStrategy, SubBox, build_quadbox
from quadsplat.traversal import (
    TileGrid, TileRect, count_tiles, naive_traverse, qpass, qpass_batch, qpass_count_batch,
    span_tiles, strategy_tiles, subbox_tile_rect,
)

# QuadBox with b < 0: 40 px major quadrants, 10 px minor ones, centered at (64, 64)
STAIRCASE = (
    SubBox(0.0, 40.0, 0.0, 40.0),
    SubBox(-10.0, 0.0, 0.0, 10.0),
    SubBox(-40.0, 0.0, -40.0, 0.0),
    SubBox(0.0, 10.0, -10.0, 0.0),
)


class TestTileGrid:
    def test_partial_tiles(self):
        g = TileGrid(333, 217, 16)
        assert (g.tiles_x, g.tiles_y, g.num_tiles) == (21, 14, 294)
        assert g.tile_xy(g.tile_id(5, 3)) == (5, 3)
        assert g.tile_pixel_rect(1, 2) == (16, 32, 32, 48)

    def test_invalid(self):
        with pytest.raises(ValueError):
            TileGrid(0, 10)


class TestSubboxRect:
    grid = TileGrid(64, 64, 16)

    def test_inside(self):
        r = subbox_tile_rect(SubBox(-5.0, 5.0, -5.0, 5.0), (20.0, 20.0), self.grid)
        assert r == TileRect(0, 1, 0, 1)

    def test_edge_on_boundary_covers_far_tile(self):
        r = subbox_tile_rect(SubBox(0.0, 12.0, 0.0, 1.0), (20.0, 20.0), self.grid)
        assert (r.t_min_x, r.t_max_x) == (1, 2)

    def test_clamped(self):
        r = subbox_tile_rect(SubBox(-100.0, 100.0, -1.0, 1.0), (30.0, 30.0), self.grid)
        assert r == TileRect(0, 3, 1, 1)

    @pytest.mark.parametrize("center", [(-20.0, 30.0), (30.0, -20.0), (90.0, 30.0), (30.0, 90.0)])
    def test_off_grid_is_empty(self, center):
        r = subbox_tile_rect(SubBox(-5.0, 5.0, -5.0, 5.0), center, self.grid)
        assert r.empty and r.count == 0


class TestQPass:
    grid = TileGrid(128, 128, 16)

    def test_staircase_spans(self):
        spans = qpass(STAIRCASE, (64.0, 64.0), self.grid)
        got = [(s.line, s.lo, s.hi) for s in spans]
        assert got == [(1, 1, 4), (2, 1, 4), (3, 1, 4), (4, 1, 6), (5, 4, 6), (6, 4, 6)]
        assert all(s.by_column for s in spans)
        assert sum(len(s) for s in spans) == 24

    def test_staircase_equals_naive(self):
        tiles = span_tiles(qpass(STAIRCASE, (64.0, 64.0), self.grid))
        assert len(tiles) == len(set(tiles)) == 24
        assert set(tiles) == naive_traverse(STAIRCASE, (64.0, 64.0), self.grid)

    def test_scans_shorter_axis(self):
        wide = (SubBox(-60.0, 60.0, -5.0, 5.0),)
        spans = qpass(wide, (64.0, 64.0), self.grid)
        assert not spans[0].by_column and len(spans) == 2

    def test_forced_axis_gives_same_set(self):
        by_col = span_tiles(qpass(STAIRCASE, (64.0, 64.0), self.grid, by_column=True))
        by_row = span_tiles(qpass(STAIRCASE, (64.0, 64.0), self.grid, by_column=False))
        assert set(by_col) == set(by_row)

    def test_constant_work_per_scanline(self):
        trace = []
        qpass(STAIRCASE, (64.0, 64.0), self.grid, trace=trace)
        assert trace == [4] * 6

    def test_off_grid(self):
        assert qpass(STAIRCASE, (-500.0, 64.0), self.grid) == []

    def test_count_matches(self):
        cov = Cov2D(300.0, -200.0, 300.0)
        conic = invert_cov(cov).with_gamma(9.0)
        for s in BoundStrategy:
            assert count_tiles(s, cov, conic, (50.0, 70.0), self.grid) == len(
                strategy_tiles(s, cov, conic, (50.0, 70.0), self.grid)
            )

    @given(
        st.floats(0.05, 5), st.floats(0.05, 5), st.floats(-0.99, 0.99), st.floats(0.5, 11.1),
        st.floats(-20, 150), st.floats(-20, 150), st.floats(0.1, 50),
    )
    @settings(max_examples=300, deadline=None)
    def test_batch_matches_scalar(self, a, c, rho, gamma, cx, cy, scale):
        conic = Conic2D(a / scale, rho * np.sqrt(a * c) / scale, c / scale, gamma)
        ext = axis_extents(conic)
        sign = 0 if abs(conic.b) < 1e-12 else (1 if conic.b > 0 else -1)
        qb = build_quadbox(ext, sign)
        scalar = span_tiles(qpass(qb, (cx, cy), self.grid))
        arr = lambda k: np.array([[getattr(b, k) for b in qb.boxes]])
        g, t = qpass_batch(cx + arr("x_lo"), cx + arr("x_hi"), cy + arr("y_lo"), cy + arr("y_hi"), self.grid)
        assert [self.grid.tile_xy(int(i)) for i in t] == scalar
        assert np.all(g == 0)
        n = qpass_count_batch(cx + arr("x_lo"), cx + arr("x_hi"), cy + arr("y_lo"), cy + arr("y_hi"), self.grid)
        assert n[0] == len(scalar)
        assert set(scalar) == naive_traverse(qb, (cx, cy), self.grid)
