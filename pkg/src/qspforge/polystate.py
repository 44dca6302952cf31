"""Polynomial states: sparse maps from exponent tuples to coefficient vectors.

A state ``|g(z)> = sum_k |g_k> z**k`` in one or two torus variables is stored
as ``{k: g_k}`` with ``k`` a tuple of ints and ``g_k`` a read-only complex
vector of length ``dim``. Coefficients whose norm is below ``tol_prune`` are
never stored, so the support (and therefore the degree) is meaningful.
"""

from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import kernels
from .config import tol
from .errors import BadSupport, DimensionMismatch
from .linalg import rank_span

ANALYTIC = "analytic"
LAURENT = "laurent"
KINDS = (ANALYTIC, LAURENT)


def _freeze(vec):
    arr = np.array(vec, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PolynomialState:
    num_vars: int
    dim: int
    kind: str
    terms: Mapping[tuple, np.ndarray]

    @classmethod
    def from_terms(cls, terms, *, num_vars=None, dim=None, kind=None, tol_prune=None):
        """Build a state from ``{exponents: coefficient_vector}``.

        ``num_vars`` and ``dim`` are inferred from the first term when omitted.
        ``kind`` defaults to analytic when every exponent is nonnegative.
        """
        cutoff = tol("tol_prune", tol_prune)
        clean = {}
        for key, vec in dict(terms).items():
            key = (int(key),) if np.isscalar(key) else tuple(int(k) for k in key)
            if num_vars is None:
                num_vars = len(key)
            if len(key) != num_vars:
                raise DimensionMismatch(f"exponent {key} does not have {num_vars} entries")
            arr = np.asarray(vec, dtype=np.complex128)
            if dim is None:
                dim = arr.shape[0]
            if arr.shape != (dim,):
                raise DimensionMismatch(f"coefficient at {key} has shape {arr.shape}, expected ({dim},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"coefficient at {key} is not finite")
            if np.linalg.norm(arr) <= cutoff:
                continue
            clean[key] = clean[key] + arr if key in clean else arr
        if num_vars is None or dim is None:
            raise DimensionMismatch("num_vars and dim are required for an empty state")
        if num_vars not in (1, 2):
            raise DimensionMismatch(f"only 1 or 2 variables are supported, got {num_vars}")
        nonneg = all(min(k) >= 0 for k in clean)
        if kind is None:
            kind = ANALYTIC if nonneg else LAURENT
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
        if kind == ANALYTIC and not nonneg:
            raise BadSupport("analytic state with a negative exponent")
        frozen = {k: _freeze(v) for k, v in sorted(clean.items())}
        return cls(num_vars, dim, kind, MappingProxyType(frozen))

    @classmethod
    def from_lattice(cls, lat, offset=None, *, num_vars, kind, tol_prune=None):
        """Inverse of :meth:`to_lattice`."""
        lat = np.asarray(lat, dtype=np.complex128)
        if offset is None:
            offset = (0, 0)
        cutoff = tol("tol_prune", tol_prune)
        norms = np.linalg.norm(lat, axis=2)
        terms = {}
        for i, j in zip(*np.nonzero(norms > cutoff)):
            key = (int(i) + offset[0], int(j) + offset[1])
            terms[key[:num_vars]] = lat[i, j]
        return cls.from_terms(terms, num_vars=num_vars, dim=lat.shape[2], kind=kind, tol_prune=cutoff)

    @classmethod
    def constant(cls, vec, num_vars=1, kind=ANALYTIC):
        vec = np.asarray(vec, dtype=np.complex128)
        return cls.from_terms({(0,) * num_vars: vec}, num_vars=num_vars, dim=vec.shape[0], kind=kind)

    # -- structure --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PolynomialState):
            return NotImplemented
        return (
            (self.num_vars, self.dim, self.kind) == (other.num_vars, other.dim, other.kind)
            and self.terms.keys() == other.terms.keys()
            and all(np.array_equal(v, other.terms[k]) for k, v in self.terms.items())
        )

    __hash__ = None

    def __len__(self):
        return len(self.terms)

    def coefficient(self, index) -> np.ndarray:
        """Coefficient of ``z**index``; a zero vector when the term is absent."""
        index = tuple(index)
        if index in self.terms:
            return self.terms[index]
        return np.zeros(self.dim, dtype=np.complex128)

    def vectors(self):
        return list(self.terms.values())

    def component(self, c):
        """The scalar polynomial ``<c|g(z)>`` as ``{exponents: complex}``."""
        return {k: complex(v[c]) for k, v in self.terms.items()}

    def var_degree(self, j: int) -> int:
        """Largest ``|k_j|`` over the support (largest power of variable ``j``)."""
        if not self.terms:
            return 0
        return max(abs(k[j]) for k in self.terms)

    @property
    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(k) for k in self.terms)

    @property
    def degree(self) -> int:
        """Total degree for analytic states, ``max |k_j|`` for Laurent ones."""
        if self.kind == ANALYTIC:
            return self.total_degree
        return max((self.var_degree(j) for j in range(self.num_vars)), default=0)

    def min_exponents(self):
        if not self.terms:
            return (0,) * self.num_vars
        return tuple(min(k[j] for k in self.terms) for j in range(self.num_vars))

    def to_lattice(self, shape=None):
        """Dense ``(K1, K2, dim)`` array plus the exponent offset of entry ``[0, 0]``."""
        lo = self.min_exponents()
        offset = (lo[0], lo[1] if self.num_vars == 2 else 0)
        if self.terms:
            hi0 = max(k[0] for k in self.terms) - offset[0] + 1
            hi1 = max(k[1] for k in self.terms) - offset[1] + 1 if self.num_vars == 2 else 1
        else:
            hi0 = hi1 = 1
        if shape is not None:
            hi0, hi1 = max(hi0, shape[0]), max(hi1, shape[1])
        lat = np.zeros((hi0, hi1, self.dim), dtype=np.complex128)
        for k, v in self.terms.items():
            j = k[1] - offset[1] if self.num_vars == 2 else 0
            lat[k[0] - offset[0], j] = v
        return lat, offset

    def scaled(self, factor) -> "PolynomialState":
        return PolynomialState.from_terms(
            {k: factor * v for k, v in self.terms.items()},
            num_vars=self.num_vars, dim=self.dim, kind=self.kind,
        )

    def map_vectors(self, func) -> "PolynomialState":
        """Apply ``func`` to every coefficient vector (e.g. a fixed unitary)."""
        out = {k: np.asarray(func(v), dtype=np.complex128) for k, v in self.terms.items()}
        dim = next(iter(out.values())).shape[0] if out else self.dim
        return PolynomialState.from_terms(out, num_vars=self.num_vars, dim=dim, kind=self.kind)

    def __repr__(self):
        return (
            f"PolynomialState(num_vars={self.num_vars}, dim={self.dim}, kind={self.kind!r}, "
            f"terms={len(self.terms)}, degree={self.degree})"
        )


def check_triangle(state: PolynomialState, degree=None) -> int:
    """Raise :class:`BadSupport` unless the support fits ``{k, h >= 0, k + h <= n}``."""
    if state.num_vars != 2 or state.kind != ANALYTIC:
        raise BadSupport("expected a bivariate analytic state")
    n = state.total_degree if degree is None else degree
    for k in state.terms:
        if min(k) < 0 or sum(k) > n:
            raise BadSupport(f"term {k} lies outside the degree-{n} triangle", index=list(k))
    return n


def _phases(point, num_vars):
    phases = np.atleast_1d(np.asarray(point, dtype=float))
    if phases.shape != (num_vars,):
        raise DimensionMismatch(f"expected {num_vars} phases, got {phases.shape}")
    return phases


def evaluate_at(state: PolynomialState, point) -> np.ndarray:
    """``|g(z)>`` at ``z_j = exp(i * point[j])``."""
    phases = _phases(point, state.num_vars)
    out = np.zeros(state.dim, dtype=np.complex128)
    for k, v in state.terms.items():
        out += v * np.exp(1j * np.dot(k, phases))
    return out


def evaluate_grid(state: PolynomialState, grid_size: int) -> np.ndarray:
    """Values on the uniform phase grid ``2 pi j / grid_size`` in every variable.

    Shape ``(G, dim)`` for one variable and ``(G, G, dim)`` for two.
    """
    theta = 2 * np.pi * np.arange(grid_size) / grid_size
    if not state.terms:
        return np.zeros((grid_size,) * state.num_vars + (state.dim,), dtype=np.complex128)
    keys = np.array(list(state.terms.keys()))
    coeffs = np.array(list(state.terms.values()))
    ea = np.exp(1j * np.outer(theta, keys[:, 0]))
    if state.num_vars == 1:
        return ea @ coeffs
    eb = np.exp(1j * np.outer(theta, keys[:, 1]))
    return np.einsum("at,bt,tc->abc", ea, eb, coeffs)


def normalization_residual(state: PolynomialState) -> float:
    """Deviation of ``<g(z)|g(z)>`` from 1, measured on the lag sums.

    Returns ``max(|sum_k <g_k|g_k> - 1|, max_{j != 0} |sum_k <g_k|g_{k+j}>|)``.
    Zero exactly when the state has unit norm everywhere on the torus.
    """
    lat, _ = state.to_lattice()
    return kernels.autocorrelation_residual(lat)


@lru_cache(maxsize=64)
def _lag_tables(shape, mask_bytes):
    """Support points, upper half-plane lags, and each point's neighbour at ``+lag`` and ``-lag``.

    Missing neighbours point at index ``npts``, a zero row appended by the caller.
    """
    mask = np.frombuffer(mask_bytes, dtype=bool).reshape(shape)
    points = np.argwhere(mask)
    diff = (points[None, :, :] - points[:, None, :]).reshape(-1, 2)
    upper = (diff[:, 0] > 0) | ((diff[:, 0] == 0) & (diff[:, 1] >= 0))
    lags = np.unique(diff[upper], axis=0)
    where = np.full(shape, len(points), dtype=np.int64)
    where[points[:, 0], points[:, 1]] = np.arange(len(points))

    def neighbour(sign):
        t = points[None, :, :] + sign * lags[:, None, :]
        inside = (t >= 0).all(axis=2) & (t[..., 0] < shape[0]) & (t[..., 1] < shape[1])
        out = np.full(inside.shape, len(points), dtype=np.int64)
        out[inside] = where[t[inside][:, 0], t[inside][:, 1]]
        return out

    zero = int(np.flatnonzero((lags == 0).all(axis=1))[0])
    return points, neighbour(1), neighbour(-1), zero


def renormalize_lattice(lat, mask=None, iters=2):
    """Smallest correction of ``lat`` that makes the state normalized again.

    Gauss-Newton on the lag sums ``sum_k <g_k|g_{k+j}> - delta_j``, taking the
    minimum-norm step each time. Entries outside ``mask`` stay zero. Layer
    stripping amplifies any normalization defect by roughly the inverse of the
    endpoint norms per step, so it calls this before every step.
    """
    lat = np.array(lat, dtype=np.complex128)
    K1, K2, d = lat.shape
    if mask is None:
        mask = np.ones((K1, K2), dtype=bool)
    mask = np.ascontiguousarray(mask, dtype=bool)
    points, plus, minus, zero = _lag_tables(mask.shape, mask.tobytes())
    npts, nlag = len(points), plus.shape[0]
    keep = np.arange(nlag) != zero
    for _ in range(iters):
        g = np.vstack([lat[points[:, 0], points[:, 1]], np.zeros((1, d))])
        up, down = g[plus], g[minus].conj()
        R = np.einsum("pc,lpc->l", g[:-1].conj(), up)
        R[zero] -= 1.0
        # d R_l / d Re g_p = g_{p+l} + conj(g_{p-l});  d R_l / d Im g_p = -i g_{p+l} + i conj(g_{p-l})
        Ja = (up + down).reshape(nlag, -1)
        Jb = (1j * (down - up)).reshape(nlag, -1)
        J = np.concatenate([Ja, Jb], axis=1)
        A = np.concatenate([J.real, J[keep].imag])
        r = np.concatenate([R.real, R[keep].imag])
        if not np.abs(r).max() > 0:
            break
        dx = np.linalg.lstsq(A, -r, rcond=None)[0]
        half = npts * d
        lat[points[:, 0], points[:, 1]] += (dx[:half] + 1j * dx[half:]).reshape(npts, d)
        if np.linalg.norm(dx) < 1e-12:
            break
    return lat


def effective_dimension(state: PolynomialState, tol_rank=None) -> int:
    rank, _ = rank_span(state.vectors(), tol_rank) if state.terms else (0, [])
    return rank


def _same_shape(s1, s2):
    if (s1.num_vars, s1.dim, s1.kind) != (s2.num_vars, s2.dim, s2.kind):
        raise DimensionMismatch(
            f"states differ in shape: {(s1.num_vars, s1.dim, s1.kind)} vs {(s2.num_vars, s2.dim, s2.kind)}"
        )


def l2_distance(s1: PolynomialState, s2: PolynomialState) -> float:
    """``sqrt(sum_k ||g_k - g'_k||^2)``, equal to the RMS distance over the torus."""
    _same_shape(s1, s2)
    total = 0.0
    for k in set(s1.terms) | set(s2.terms):
        diff = s1.coefficient(k) - s2.coefficient(k)
        total += float(np.vdot(diff, diff).real)
    return float(np.sqrt(total))


def difference(s1: PolynomialState, s2: PolynomialState) -> PolynomialState:
    _same_shape(s1, s2)
    keys = set(s1.terms) | set(s2.terms)
    return PolynomialState.from_terms(
        {k: s1.coefficient(k) - s2.coefficient(k) for k in keys},
        num_vars=s1.num_vars, dim=s1.dim, kind=s1.kind, tol_prune=0.0,
    )


def sup_distance_sampled(s1: PolynomialState, s2: PolynomialState, grid_size: int = 64) -> float:
    """Largest pointwise distance on a uniform phase grid (a lower bound on the sup)."""
    if grid_size < 1:
        raise ValueError("grid_size must be at least 1")
    values = evaluate_grid(difference(s1, s2), grid_size)
    return float(np.linalg.norm(values, axis=-1).max())


def shift_exponents(state: PolynomialState, offset) -> PolynomialState:
    """Multiply by ``z**offset``; the kind is recomputed from the new support."""
    offset = tuple(int(o) for o in np.atleast_1d(offset))
    if len(offset) != state.num_vars:
        raise DimensionMismatch(f"offset {offset} does not match {state.num_vars} variables")
    if not any(offset):
        return state
    terms = {tuple(a + b for a, b in zip(k, offset)): v for k, v in state.terms.items()}
    return PolynomialState.from_terms(terms, num_vars=state.num_vars, dim=state.dim, tol_prune=0.0)
