"""Dense-lattice kernels shared by every protocol family.

A polynomial state of ``d``-dimensional coefficient vectors in one or two
variables is held here as a ``(K1, K2, d)`` complex array, ``lat[i, j]``
being the coefficient of ``a**i * b**j`` (``K2 == 1`` for one variable).
Every signal operator in the package is diagonal with monomial entries, so a
signal call is fully described by a nonnegative exponent shift per basis
component: ``diag(1, z)`` shifts component 1 by ``(1, 0)``, ``diag(1, a, b)``
shifts component 1 by ``(1, 0)`` and component 2 by ``(0, 1)``, and the
Laurent operator ``diag(1/z, z)`` is ``z**-1 * diag(1, z**2)``, i.e. a
``(2, 0)`` shift followed by a global offset tracked by the caller.

Each kernel exists twice: a numba-compiled loop nest and a vectorised numpy
version. :func:`set_backend` switches between them at runtime; the initial
choice honours ``QSPFORGE_DISABLE_NUMBA``.
"""

import numpy as np

from . import _accel
from ._accel import njit

__all__ = [
    "propagate",
    "autocorrelation_residual",
    "lower",
    "set_backend",
    "get_backend",
]


def _extents(shifts):
    n = shifts.shape[0]
    k1 = 1 + int(shifts[:, :, 0].max(axis=1).sum()) if n else 1
    k2 = 1 + int(shifts[:, :, 1].max(axis=1).sum()) if n else 1
    return k1, k2


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------


@njit(cache=True)
def _propagate_nb(ops, shifts):
    n = shifts.shape[0]
    d = ops.shape[1]
    k1 = 1
    k2 = 1
    for s in range(n):
        m0 = 0
        m1 = 0
        for c in range(d):
            m0 = max(m0, shifts[s, c, 0])
            m1 = max(m1, shifts[s, c, 1])
        k1 += m0
        k2 += m1
    lat = np.zeros((k1, k2, d), dtype=np.complex128)
    tmp = np.zeros((k1, k2, d), dtype=np.complex128)
    for c in range(d):
        lat[0, 0, c] = ops[0, c, 0]
    e1 = 1
    e2 = 1
    vec = np.zeros(d, dtype=np.complex128)
    for s in range(n):
        m0 = 0
        m1 = 0
        for c in range(d):
            m0 = max(m0, shifts[s, c, 0])
            m1 = max(m1, shifts[s, c, 1])
        f1 = e1 + m0
        f2 = e2 + m1
        for i in range(f1):
            for j in range(f2):
                for c in range(d):
                    tmp[i, j, c] = 0.0
        for i in range(e1):
            for j in range(e2):
                for c in range(d):
                    tmp[i + shifts[s, c, 0], j + shifts[s, c, 1], c] = lat[i, j, c]
        u = ops[s + 1]
        for i in range(f1):
            for j in range(f2):
                for c in range(d):
                    vec[c] = tmp[i, j, c]
                for r in range(d):
                    acc = 0.0 + 0.0j
                    for c in range(d):
                        acc += u[r, c] * vec[c]
                    lat[i, j, r] = acc
        e1 = f1
        e2 = f2
    return lat


@njit(cache=True)
def _autocorrelation_residual_nb(lat):
    # sum over pairs of nonzero entries; acf(-l) = conj(acf(l)) covers the other half
    k1, k2, d = lat.shape
    idx = np.empty((k1 * k2, 2), dtype=np.int64)
    npts = 0
    for i in range(k1):
        for j in range(k2):
            for c in range(d):
                if lat[i, j, c] != 0:
                    idx[npts, 0] = i
                    idx[npts, 1] = j
                    npts += 1
                    break
    acf = np.zeros((2 * k1 - 1, 2 * k2 - 1), dtype=np.complex128)
    for p in range(npts):
        i, j = idx[p, 0], idx[p, 1]
        for q in range(p, npts):
            a, b = idx[q, 0], idx[q, 1]
            acc = 0.0 + 0.0j
            for c in range(d):
                acc += np.conj(lat[i, j, c]) * lat[a, b, c]
            acf[a - i + k1 - 1, b - j + k2 - 1] += acc
    acf[k1 - 1, k2 - 1] -= 1.0
    worst = 0.0
    for a in range(2 * k1 - 1):
        for b in range(2 * k2 - 1):
            r = abs(acf[a, b])
            if r > worst:
                worst = r
    return worst


@njit(cache=True)
def _lower_nb(lat, unitary, shifts, degree):
    k1, k2, d = lat.shape
    m0 = 0
    m1 = 0
    for c in range(d):
        m0 = max(m0, shifts[c, 0])
        m1 = max(m1, shifts[c, 1])
    o1 = max(k1 - m0, 1)
    o2 = max(k2 - m1, 1)
    out = np.zeros((o1, o2, d), dtype=np.complex128)
    adj = np.conj(unitary.T)
    residual = 0.0
    for i in range(k1):
        for j in range(k2):
            for r in range(d):
                acc = 0.0 + 0.0j
                for c in range(d):
                    acc += adj[r, c] * lat[i, j, c]
                ti = i - shifts[r, 0]
                tj = j - shifts[r, 1]
                if ti < 0 or tj < 0 or ti >= o1 or tj >= o2 or ti + tj >= degree:
                    if abs(acc) > residual:
                        residual = abs(acc)
                else:
                    out[ti, tj, r] = acc
    return out, residual


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _propagate_np(ops, shifts):
    n = shifts.shape[0]
    d = ops.shape[1]
    k1, k2 = _extents(shifts)
    lat = np.zeros((k1, k2, d), dtype=np.complex128)
    lat[0, 0] = ops[0][:, 0]
    e1 = e2 = 1
    for s in range(n):
        m0 = int(shifts[s, :, 0].max())
        m1 = int(shifts[s, :, 1].max())
        f1, f2 = e1 + m0, e2 + m1
        tmp = np.zeros((f1, f2, d), dtype=np.complex128)
        for c in range(d):
            s0, s1 = shifts[s, c]
            tmp[s0:s0 + e1, s1:s1 + e2, c] = lat[:e1, :e2, c]
        lat[:f1, :f2] = tmp @ ops[s + 1].T
        e1, e2 = f1, f2
    return lat


def _autocorrelation_residual_np(lat):
    k1, k2, _ = lat.shape
    shape = (2 * k1 - 1, 2 * k2 - 1)
    spectrum = np.fft.fft2(lat, s=shape, axes=(0, 1))
    power = np.sum(np.abs(spectrum) ** 2, axis=2)
    acf = np.fft.ifft2(power)
    acf[0, 0] -= 1.0
    return float(np.abs(acf).max())


def _lower_np(lat, unitary, shifts, degree):
    k1, k2, d = lat.shape
    o1 = max(k1 - int(shifts[:, 0].max()), 1)
    o2 = max(k2 - int(shifts[:, 1].max()), 1)
    rotated = lat @ unitary.conj()
    out = np.zeros((o1, o2, d), dtype=np.complex128)
    keep = np.zeros((k1, k2, d), dtype=bool)
    ii, jj = np.meshgrid(np.arange(k1), np.arange(k2), indexing="ij")
    for c in range(d):
        s0, s1 = shifts[c]
        ti, tj = ii - s0, jj - s1
        ok = (ti >= 0) & (tj >= 0) & (ti < o1) & (tj < o2) & (ti + tj < degree)
        out[ti[ok], tj[ok], c] = rotated[ok, c]
        keep[:, :, c] = ok
    dropped = np.abs(rotated[~keep])
    residual = float(dropped.max()) if dropped.size else 0.0
    return out, residual


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_IMPLS = {
    "numba": (_propagate_nb, _autocorrelation_residual_nb, _lower_nb),
    "numpy": (_propagate_np, _autocorrelation_residual_np, _lower_np),
}
_backend = "numba" if _accel.USE_NUMBA else "numpy"


def set_backend(name: str) -> None:
    """Select ``"numba"`` or ``"numpy"`` for all subsequent kernel calls."""
    global _backend
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _accel.NUMBA_AVAILABLE:
        raise RuntimeError("numba is not importable")
    _backend = name


def get_backend() -> str:
    return _backend


def propagate(ops, shifts, backend=None):
    """Run ``ops[n] S_n ops[n-1] ... S_1 ops[0] |0>`` on the coefficient lattice.

    Parameters
    ----------
    ops : ndarray, shape (n + 1, d, d)
        Processing unitaries in application order.
    shifts : ndarray of int, shape (n, d, 2)
        Nonnegative exponent shift of each basis component at each signal call.

    Returns
    -------
    ndarray, shape (K1, K2, d)
        Dense coefficient lattice of the output state.
    """
    ops = np.ascontiguousarray(ops, dtype=np.complex128)
    shifts = np.ascontiguousarray(shifts, dtype=np.int64).reshape(-1, ops.shape[1], 2)
    return _IMPLS[backend or _backend][0](ops, shifts)


def autocorrelation_residual(lat, backend=None):
    """Largest deviation of the lag sums ``sum_k <g_k|g_{k+j}>`` from ``delta_j``."""
    lat = np.ascontiguousarray(lat, dtype=np.complex128)
    return float(_IMPLS[backend or _backend][1](lat))


def lower(lat, unitary, shifts, degree, backend=None):
    """Undo one ``unitary @ signal`` step.

    Applies ``unitary^dagger`` to every coefficient, moves each component back
    by its shift and truncates to total degree ``degree - 1``. Returns the
    lowered lattice and the largest modulus among the entries that had to be
    discarded (negative exponents or total degree ``>= degree``); that residual
    is zero exactly when the step was a valid inverse.
    """
    lat = np.ascontiguousarray(lat, dtype=np.complex128)
    unitary = np.ascontiguousarray(unitary, dtype=np.complex128)
    shifts = np.ascontiguousarray(shifts, dtype=np.int64)
    out, residual = _IMPLS[backend or _backend][2](lat, unitary, shifts, int(degree))
    return out, float(residual)
