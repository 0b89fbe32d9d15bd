import numpy as np
import pytest

from quadsplat import validate
from quadsplat.validate import (
    ConicCases, check_qpass_exact, check_sandwich, check_stretch_identities, random_cases,
    run_all, ulp_distance,
)


@pytest.fixture(scope="module")
def cases():
    return random_cases(3000, seed=11)


class TestCases:
    def test_seeded(self):
        a, b = random_cases(100, seed=3), random_cases(100, seed=3)
        np.testing.assert_array_equal(a.conic, b.conic)
        np.testing.assert_array_equal(a.center, b.center)

    def test_coverage(self, cases):
        sxx, sxy, syy = cases.cov.T
        assert np.count_nonzero(sxy == 0.0) > 50
        assert (cases.gamma.min() >= 0.5) and (cases.gamma.max() <= 11.1)
        lam = np.linalg.eigvalsh(np.stack([np.stack([sxx, sxy], -1), np.stack([sxy, syy], -1)], -2))
        assert np.sqrt(lam[:, 1] / lam[:, 0]).max() > 50

    def test_describe(self, cases):
        d = cases.describe(0)
        assert set(d) == {"a", "b", "c", "gamma", "center", "grid"}

    def test_ulp_distance(self):
        x = np.array([1.0])
        assert ulp_distance(x, np.nextafter(x, 2.0))[0] == pytest.approx(1.0, abs=0.5)


class TestChecks:
    def test_all_pass(self, cases):
        for result in (check_sandwich(cases), check_qpass_exact(cases, limit=500),
                       check_stretch_identities(cases)):
            assert result.passed, result.line()

    def test_shrunken_minor_boxes_are_caught(self, cases, monkeypatch):
        # a QuadBox whose minor quadrants use 0.8 f no longer covers the ellipse
        original = ConicCases.extents

        def shrunk(self):
            ext = original(self)
            ext[:, 2] *= 0.8
            return ext

        monkeypatch.setattr(ConicCases, "extents", shrunk)
        result = check_sandwich(cases)
        assert not result.passed
        assert result.detail is not None and "gamma" in result.detail
        assert "FAIL" in result.line() and "counterexample" in result.line()

    def test_broken_identity_is_caught(self, cases, monkeypatch):
        real = validate.geometry.stretch_factor

        monkeypatch.setattr(validate.geometry, "stretch_factor", lambda c: real(c) * (1 + 1e-12))
        assert not check_stretch_identities(cases).passed

    def test_run_all_vacuous(self):
        results = run_all(0, 0)
        assert all(r.passed and r.cases == 0 for r in results)
        assert all(r.notes for r in results)

    def test_run_all(self):
        results = run_all(1, 300)
        assert [r.passed for r in results] == [True] * 4
