import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmfusion.errors import DegenerateGeometry
from mmfusion.geom import direction_between, from_angles
from mmfusion.likelihood import (
    AoaLikelihood,
    ToaLikelihood,
    aoa_log_normalizer,
    build_pool_fields,
    log_aoa,
    log_bessel_i0,
    log_columns,
    log_toa,
)
from mmfusion.obsmodel import BsProfile, Observation
from mmfusion.pooling import DiscretePool

BS = (0.0, 0.0, 10.0)


def series_log_i0(kappa, terms=400):
    """Power series sum_m (k/2)^(2m) / (m!)^2, summed in log space."""
    logs = [2 * m * math.log(kappa / 2) - 2 * math.lgamma(m + 1) for m in range(terms)] if kappa > 0 else [0.0]
    top = max(logs)
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


class TestBessel:
    def test_zero(self):
        assert log_bessel_i0(0.0) == 0.0

    @pytest.mark.parametrize("kappa,expected", [(1.0, 0.235914358507179), (10.0, 7.9429720831187)])
    def test_frozen_values(self, kappa, expected):
        # frozen from a 40-digit mpmath evaluation of the power series
        assert log_bessel_i0(kappa) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("kappa", [0.1, 1.0, 10.0, 50.0, 200.0, 500.0])
    def test_against_series(self, kappa):
        assert log_bessel_i0(kappa) == pytest.approx(series_log_i0(kappa), rel=1e-10)

    def test_large_kappa_no_overflow(self):
        k = 1e5
        assert log_bessel_i0(k) == pytest.approx(k - 0.5 * math.log(2 * math.pi * k), rel=1e-9)

    def test_negative(self):
        with pytest.raises(ValueError):
            log_bessel_i0(-1.0)


class TestToa:
    lik = ToaLikelihood(BS, 10.0, 1.0)

    def test_on_ring(self):
        assert log_toa(self.lik, (10.0, 0.0, 10.0)) == pytest.approx(-0.9189385332046727, abs=1e-12)

    def test_one_sigma(self):
        assert log_toa(self.lik, (0.0, 11.0, 10.0)) == pytest.approx(-1.4189385332046727, abs=1e-12)

    def test_symmetric(self):
        assert log_toa(self.lik, (12.5, 0, 10)) == pytest.approx(log_toa(self.lik, (7.5, 0, 10)))

    def test_coincident(self):
        with pytest.raises(DegenerateGeometry):
            log_toa(self.lik, BS)

    @settings(max_examples=50)
    @given(st.floats(0.5, 80), st.floats(-math.pi, math.pi), st.floats(-1.4, 1.4), st.floats(-math.pi, math.pi))
    def test_rotation_invariant(self, r, az, el, az2):
        a = np.add(BS, r * np.array(from_angles(az, el)))
        b = np.add(BS, r * np.array(from_angles(az2, -el)))
        assert log_toa(self.lik, a) == pytest.approx(log_toa(self.lik, b), abs=1e-9)


class TestAoa:
    u_hat = from_angles(0.3, -0.2)
    lik = AoaLikelihood(BS, u_hat, 10.0)

    def test_along(self):
        c = np.add(BS, 20 * np.array(self.u_hat))
        assert log_aoa(self.lik, c) == pytest.approx(0.21915085047195896, abs=1e-10)

    def test_orthogonal(self):
        ortho = np.cross(self.u_hat, (0, 0, 1))
        c = np.add(BS, 7 * ortho / np.linalg.norm(ortho))
        assert log_aoa(self.lik, c) == pytest.approx(-9.780849149528041, abs=1e-10)

    def test_uniform_limit(self, rng):
        lik = AoaLikelihood(BS, self.u_hat, 1e-9)
        pts = np.add(BS, rng.normal(size=(50, 3)))
        assert np.allclose(np.exp(log_aoa(lik, pts)), 1 / (2 * math.pi), atol=1e-8)

    @settings(max_examples=50)
    @given(st.tuples(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50)), st.floats(0.01, 100))
    def test_scale_invariant(self, p, s):
        d = np.array(p)
        if np.linalg.norm(d) < 1e-3:
            return
        assert log_aoa(self.lik, np.add(BS, d)) == pytest.approx(log_aoa(self.lik, np.add(BS, s * d)), abs=1e-9)

    def test_sphere_normalizer(self):
        k = 10.0
        assert aoa_log_normalizer(k, "sphere") == pytest.approx(math.log(4 * math.pi * math.sinh(k) / k))
        lik = AoaLikelihood(BS, self.u_hat, k, "sphere")
        c = np.add(BS, np.array(self.u_hat))
        assert log_aoa(lik, c) == pytest.approx(k - math.log(4 * math.pi * math.sinh(k) / k))

    def test_not_unit(self):
        with pytest.raises(ValueError):
            AoaLikelihood(BS, (1.0, 1.0, 0.0), 10.0)


def test_columns_match_scalar_paths(rng):
    stations = [BsProfile(i + 1, p) for i, p in enumerate([(0, 50, 10), (-43, -25, 10), (43, -25, 10)])]
    obs = [Observation(i + 1, 40.0 + i, 0.1 * i, -0.15) for i in range(3)]
    fields = build_pool_fields(stations, obs)
    pts = np.column_stack([rng.uniform(-40, 40, (200, 2)), np.ones(200)])
    cols = log_columns(fields, pts)
    assert cols.shape == (200, 6)
    for j, f in enumerate(fields):
        ref = log_toa(f, pts) if j % 2 == 0 else log_aoa(f, pts)
        np.testing.assert_allclose(cols[:, j], ref, rtol=1e-12, atol=1e-12)
    assert np.all(np.isfinite(cols))
    floored = DiscretePool(cols).log_q
    assert np.all(np.exp(floored - floored.max(axis=0)) > 0)


def test_columns_degenerate():
    fields = [ToaLikelihood(BS, 5, 1), AoaLikelihood(BS, (1, 0, 0), 10)]
    with pytest.raises(DegenerateGeometry):
        log_columns(fields, [BS, (1, 1, 1)])
