import numpy as np
import pytest

from mmfusion import _kernels_py, kernels

pytestmark = pytest.mark.skipif("cython" not in kernels.available_backends(), reason="compiled kernels not built")


@pytest.fixture
def compiled():
    from mmfusion import _kernels
    return _kernels


def test_selected_backend():
    assert kernels.BACKEND in kernels.available_backends()


@pytest.mark.parametrize("seed", range(5))
def test_log_columns_agree(compiled, seed):
    r = np.random.default_rng(seed)
    pts = r.uniform(-50, 50, size=(500, 3))
    pts[:, 2] = 1.0
    k = 3
    bs = r.uniform(-50, 50, size=(k, 3))
    u = r.normal(size=(k, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    args = (pts, bs, r.uniform(5, 60, k), r.uniform(0.5, 2, k), u, r.uniform(1, 20, k), r.normal(size=k))
    a, na = compiled.log_columns(*args)
    b, nb = _kernels_py.log_columns(*args)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    assert na == nb == 0


def test_degenerate_count_agrees(compiled):
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0]])
    args = (pts, np.array([[0.0, 0.0, 1.0]]), np.array([1.0]), np.array([1.0]),
            np.array([[1.0, 0.0, 0.0]]), np.array([10.0]), np.array([0.0]))
    assert compiled.log_columns(*args)[1] == _kernels_py.log_columns(*args)[1] == 1


@pytest.mark.parametrize("seed", range(5))
def test_argmax_and_objective_agree(compiled, seed):
    r = np.random.default_rng(seed)
    lq = r.normal(size=(300, 4))
    lq[7] = lq[3]
    w = r.dirichlet(np.ones(4))
    assert compiled.weighted_argmax(lq, w)[0] == _kernels_py.weighted_argmax(lq, w)[0]
    psi = r.normal(size=300)
    a = compiled.objective_terms(lq, psi, w)
    b = _kernels_py.objective_terms(lq, psi, w)
    assert a[0] == pytest.approx(b[0], abs=1e-12)
    for x, y in zip(a[1:], b[1:]):
        np.testing.assert_allclose(x, y, rtol=1e-10)
