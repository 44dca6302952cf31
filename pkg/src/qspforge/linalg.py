"""Small dense complex linear algebra (dimension at most 4).

Vectors are 1-d complex numpy arrays and unitaries 2-d complex numpy arrays.
Nothing here is performance critical; the routines favour determinism so
that synthesized protocols are reproducible bit for bit.
"""

import numpy as np

from .config import tol
from .errors import DimensionMismatch, NotUnitary

MAX_DIM = 4


def as_vector(v, dim=None) -> np.ndarray:
    """Coerce ``v`` to a finite complex vector, optionally checking its length."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or not 1 <= arr.shape[0] <= MAX_DIM:
        raise DimensionMismatch(f"expected a vector of length 1..{MAX_DIM}, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"expected length {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def inner(u, v) -> complex:
    """``<u|v>``, conjugate-linear in ``u``."""
    u = as_vector(u)
    v = as_vector(v, u.shape[0])
    return complex(np.vdot(u, v))


def det2(u, v) -> complex:
    """Determinant of the 2x2 matrix with columns ``u`` and ``v``."""
    u = as_vector(u, 2)
    v = as_vector(v, 2)
    return complex(u[0] * v[1] - u[1] * v[0])


def _stack(vectors, dim=None):
    vecs = [as_vector(v) for v in vectors]
    if dim is None and vecs:
        dim = vecs[0].shape[0]
    for v in vecs:
        if v.shape[0] != dim:
            raise DimensionMismatch(f"vectors of mixed length {v.shape[0]} and {dim}")
    if not vecs:
        return np.zeros((0, dim or 0), dtype=np.complex128), dim
    return np.array(vecs), dim


def _pivoted_gram_schmidt(rows, tol_rank, max_rank):
    """Orthonormal basis for the row span, greedy on residual norm.

    Each accepted direction is projected out of the remaining residuals
    twice, which is enough for full working precision at these sizes.
    """
    residual = rows.astype(np.complex128, copy=True)
    basis = []
    while len(basis) < max_rank and residual.shape[0]:
        norms = np.linalg.norm(residual, axis=1)
        k = int(np.argmax(norms))
        if norms[k] <= tol_rank:
            break
        q = residual[k] / norms[k]
        for other in basis:
            q = q - np.vdot(other, q) * other
        q = q / np.linalg.norm(q)
        basis.append(q)
        for _ in range(2):
            residual = residual - np.outer(residual @ q.conj(), q)
    return basis


def rank_span(vectors, tol_rank=None):
    """Numerical rank of a set of vectors and an orthonormal basis of their span.

    Returns
    -------
    rank : int
    basis : list of ndarray
    """
    rows, dim = _stack(vectors)
    if rows.shape[0] == 0:
        return 0, []
    basis = _pivoted_gram_schmidt(rows, tol("tol_rank", tol_rank), dim)
    return len(basis), basis


def _fill(basis, dim):
    """Extend an orthonormal list to a full basis using canonical vectors."""
    basis = list(basis)
    eye = np.eye(dim, dtype=np.complex128)
    while len(basis) < dim:
        cand = eye.copy()
        for _ in range(2):
            for b in basis:
                cand = cand - np.outer(cand @ b.conj(), b)
        norms = np.linalg.norm(cand, axis=1)
        k = int(np.argmax(norms))
        q = cand[k] / norms[k]
        basis.append(q)
    return basis


def orthogonal_complement(vectors, tol_rank=None, dim=None):
    """Orthonormal basis of the orthogonal complement of ``span(vectors)``.

    ``dim`` is only needed when ``vectors`` is empty.
    """
    rows, dim = _stack(vectors, dim)
    if dim is None:
        raise DimensionMismatch("ambient dimension unknown for an empty vector set")
    rank, basis = rank_span(list(rows), tol_rank) if rows.shape[0] else (0, [])
    return _fill(basis, dim)[rank:]


def unitarity_residual(u) -> float:
    u = np.asarray(u, dtype=np.complex128)
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def check_unitary(u, tol_unitary=None) -> np.ndarray:
    """Return ``u`` as a complex array, raising :class:`NotUnitary` if it is not."""
    arr = np.asarray(u, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or not 1 <= arr.shape[0] <= MAX_DIM:
        raise DimensionMismatch(f"expected a square matrix of size <= {MAX_DIM}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    res = unitarity_residual(arr)
    if res > tol("tol_unitary", tol_unitary):
        raise NotUnitary(f"matrix is not unitary: max|U^dag U - I| = {res:.3e}", residual=res)
    return arr


def complete_to_unitary(partial_columns, tol_unitary=None, dim=None) -> np.ndarray:
    """Unitary whose leading columns are exactly ``partial_columns``.

    Missing columns come from canonical basis vectors orthonormalised against
    the given ones, largest residual first, so the result is deterministic.
    """
    cols, dim = _stack(partial_columns, dim)
    if dim is None:
        raise DimensionMismatch("ambient dimension unknown for an empty column set")
    k = cols.shape[0]
    if k > dim:
        raise DimensionMismatch(f"{k} columns do not fit in dimension {dim}")
    gram_res = float(np.abs(cols.conj() @ cols.T - np.eye(k)).max()) if k else 0.0
    if gram_res > tol("tol_unitary", tol_unitary):
        raise NotUnitary(f"columns are not orthonormal: residual {gram_res:.3e}", residual=gram_res)
    basis = _fill(list(cols), dim)
    out = np.array(basis).T
    out[:, :k] = cols.T
    return out


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary drawn from ``rng`` (QR of a Ginibre matrix)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_random_unitary(dim: int, seed: int) -> np.ndarray:
    if dim not in (2, 3):
        raise DimensionMismatch(f"haar_random_unitary supports dim 2 or 3, got {dim}")
    return haar_unitary(dim, np.random.default_rng(seed))
