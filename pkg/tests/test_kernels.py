import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qspforge import kernels
from qspforge._accel import NUMBA_AVAILABLE
from qspforge.linalg import haar_unitary
from qspforge.multivariate import W_SHIFTS

from .oracles import protocol_3d_at

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba is not installed")


def qutrit_workload(steps, seed):
    rng = np.random.default_rng(seed)
    ops = np.array([haar_unitary(3, rng) for _ in range(steps + 1)])
    shifts = np.ascontiguousarray(np.broadcast_to(W_SHIFTS, (steps, 3, 2)))
    return ops, shifts


def test_propagate_matches_matrix_products(backend):
    ops, shifts = qutrit_workload(4, 0)
    lat = kernels.propagate(ops, shifts)
    rng = np.random.default_rng(1)
    for a, b in np.exp(1j * rng.uniform(0, 2 * np.pi, (6, 2))):
        value = np.einsum("ijc,i,j->c", lat, a ** np.arange(lat.shape[0]), b ** np.arange(lat.shape[1]))
        assert np.allclose(value, protocol_3d_at(ops, a, b), atol=1e-13)


def test_propagated_state_is_normalized(backend):
    ops, shifts = qutrit_workload(6, 2)
    lat = kernels.propagate(ops, shifts)
    assert kernels.autocorrelation_residual(lat) < 1e-13


def test_lower_inverts_one_step(backend):
    ops, shifts = qutrit_workload(3, 3)
    before = kernels.propagate(ops[:-1], shifts[:-1])
    after = kernels.propagate(ops, shifts)
    lowered, residual = kernels.lower(after, ops[-1], W_SHIFTS, 3)
    assert residual < 1e-13
    assert np.allclose(lowered[:3, :3], before[:3, :3], atol=1e-13)


def test_lower_reports_what_it_drops(backend):
    lat = np.zeros((2, 2, 3), dtype=complex)
    lat[0, 0] = [0, 0.6, 0]  # component 1 at exponent (0, 0) cannot come out of W
    lat[1, 0] = [0, 0.8, 0]
    _, residual = kernels.lower(lat, np.eye(3), W_SHIFTS, 1)
    assert residual == pytest.approx(0.6)


def test_autocorrelation_residual_of_simple_lattices(backend):
    lat = np.zeros((2, 1, 2), dtype=complex)
    lat[0, 0] = [0.5, 0.5]
    lat[1, 0] = [0.5, -0.5]
    assert kernels.autocorrelation_residual(lat) < 1e-15
    lat[1, 0] = [0.5, 0.5]
    assert kernels.autocorrelation_residual(lat) == pytest.approx(0.5)


@needs_numba
@given(st.integers(1, 8), st.integers(0, 10_000))
def test_backends_agree(steps, seed):
    ops, shifts = qutrit_workload(steps, seed)
    a = kernels.propagate(ops, shifts, backend="numpy")
    b = kernels.propagate(ops, shifts, backend="numba")
    assert np.allclose(a, b, atol=1e-13)
    ra = kernels.autocorrelation_residual(a, backend="numpy")
    rb = kernels.autocorrelation_residual(a, backend="numba")
    assert abs(ra - rb) < 1e-13
    la, sa = kernels.lower(a, ops[-1], W_SHIFTS, steps, backend="numpy")
    lb, sb = kernels.lower(a, ops[-1], W_SHIFTS, steps, backend="numba")
    assert np.allclose(la, lb, atol=1e-14)
    assert abs(sa - sb) < 1e-14


def test_unknown_backend_is_rejected():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("0", "numba" if NUMBA_AVAILABLE else "numpy")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, QSPFORGE_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from qspforge import kernels; print(kernels.get_backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
