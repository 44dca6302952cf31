"""Bivariate QSP on a qutrit and with classical choice.

The qutrit protocol interleaves ``W = diag(1, a, b)`` with arbitrary 3x3
unitaries. Its output coefficients ``g_{k,h}`` live on the triangle
``k, h >= 0, k + h <= n`` and one signal call is undone by a unitary ``A``
exactly when some orthonormal basis ``psi_0, psi_1, psi_2`` satisfies

* ``psi_2`` orthogonal to every ``g_{k,0}`` (the ``a`` axis),
* ``psi_1`` orthogonal to every ``g_{0,k}`` (the ``b`` axis),
* ``psi_0`` orthogonal to every ``g_{k,n-k}`` (the hypotenuse),

with ``A = [psi_0 psi_1 psi_2]``. When the three corner coefficients are
nonzero they are pairwise orthogonal and fix that basis, which is what
:func:`decompose_3d` iterates.

The classical-choice protocol acts on a qubit and calls ``diag(1, a)`` or
``diag(1, b)`` (``diag(1/a, a)`` and ``diag(1/b, b)`` in the Laurent
picture) according to a fixed choice vector.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .config import tol
from .errors import (
    BadSupport,
    DimensionMismatch,
    NotAPolynomialState,
    NotLowerable,
    NotNormalized,
    ZeroEndpoint,
)
from .linalg import check_unitary, complete_to_unitary, haar_unitary, orthogonal_complement, rank_span
from .polystate import ANALYTIC, LAURENT, PolynomialState, check_triangle, normalization_residual, renormalize_lattice
from .report import DiagnosticReport
from .univariate import HADAMARD, WX, WZ, XROT, ZROT, SignalConvention

W_SHIFTS = np.array([[0, 0], [1, 0], [0, 1]], dtype=np.int64)
SWAP_12 = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=np.complex128)

STEP_TOL = 1e-7


def _check_ops(ops, dim):
    ops = tuple(check_unitary(u) for u in ops)
    if not ops:
        raise ValueError("a protocol needs at least one processing operator")
    for u in ops:
        if u.shape != (dim, dim):
            raise DimensionMismatch(f"expected {dim}x{dim} processing operators, got {u.shape}")
    return ops


@dataclass(frozen=True, eq=False)
class Protocol3D:
    ops: tuple

    def __post_init__(self):
        object.__setattr__(self, "ops", _check_ops(self.ops, 3))

    @property
    def num_calls(self) -> int:
        return len(self.ops) - 1


def parse_choices(choices) -> tuple:
    """Normalise a choice vector to a tuple of ``'a'`` / ``'b'``.

    Accepts strings like ``"abba"`` or sequences of ``'a'``, ``'b'``, 0, 1.
    """
    out = []
    for c in choices:
        if c in ("a", 0):
            out.append("a")
        elif c in ("b", 1):
            out.append("b")
        else:
            raise ValueError(f"choice {c!r} is not 'a' or 'b'")
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Protocol2DChoice:
    ops: tuple
    choices: tuple
    picture: str = ANALYTIC

    def __post_init__(self):
        object.__setattr__(self, "ops", _check_ops(self.ops, 2))
        object.__setattr__(self, "choices", parse_choices(self.choices))
        if len(self.ops) != len(self.choices) + 1:
            raise ValueError(f"{len(self.ops)} operators for {len(self.choices)} signal calls")
        if self.picture not in (ANALYTIC, LAURENT):
            raise ValueError(f"unknown picture {self.picture!r}")

    @property
    def counts(self):
        """Number of calls to each variable, ``(n_a, n_b)``."""
        return self.choices.count("a"), self.choices.count("b")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def evaluate_protocol_3d(p: Protocol3D) -> PolynomialState:
    """``A_n W A_{n-1} W ... W A_0 |0>`` with ``W = diag(1, a, b)``."""
    shifts = np.broadcast_to(W_SHIFTS, (p.num_calls, 3, 2))
    lat = kernels.propagate(np.array(p.ops), shifts)
    return PolynomialState.from_lattice(lat, num_vars=2, kind=ANALYTIC)


def evaluate_protocol_2d_choice(p: Protocol2DChoice) -> PolynomialState:
    n = len(p.choices)
    step = 1 if p.picture == ANALYTIC else 2
    shifts = np.zeros((n, 2, 2), dtype=np.int64)
    for s, c in enumerate(p.choices):
        shifts[s, 1, 0 if c == "a" else 1] = step
    lat = kernels.propagate(np.array(p.ops), shifts)
    if p.picture == ANALYTIC:
        return PolynomialState.from_lattice(lat, num_vars=2, kind=ANALYTIC)
    n_a, n_b = p.counts
    return PolynomialState.from_lattice(lat, (-n_a, -n_b), num_vars=2, kind=LAURENT)


def _block(u2):
    out = np.eye(3, dtype=np.complex128)
    out[:2, :2] = u2
    return out


def embed_2d_in_3d(p: Protocol2DChoice) -> Protocol3D:
    """Qutrit protocol with the same output (plus a zero third component).

    Each qubit operator becomes ``blockdiag(A', 1)`` and every ``b`` call is
    realised as ``S W S = diag(1, b, a)``, ``S`` swapping ``|1>`` and
    ``|2>``; the swaps are merged into the neighbouring operators.
    """
    if p.picture != ANALYTIC:
        raise ValueError("embed the analytic protocol; shift Laurent states with shift_exponents")
    n = len(p.choices)
    swaps = [SWAP_12 if c == "b" else np.eye(3, dtype=np.complex128) for c in p.choices]
    ops = []
    for k, u in enumerate(p.ops):
        op = _block(u)
        if k > 0:
            op = op @ swaps[k - 1]
        if k < n:
            op = swaps[k] @ op
        ops.append(op)
    return Protocol3D(tuple(ops))


def random_protocol_3d(num_calls: int, seed: int) -> Protocol3D:
    rng = np.random.default_rng(seed)
    return Protocol3D(tuple(haar_unitary(3, rng) for _ in range(num_calls + 1)))


def random_protocol_2d_choice(num_calls: int, seed: int, choices=None, picture=ANALYTIC) -> Protocol2DChoice:
    rng = np.random.default_rng(seed)
    if choices is None:
        choices = tuple("ab"[i] for i in rng.integers(0, 2, num_calls))
    ops = tuple(haar_unitary(2, rng) for _ in range(num_calls + 1))
    return Protocol2DChoice(ops, choices, picture)


# ---------------------------------------------------------------------------
# necessary conditions for classical-choice protocols
# ---------------------------------------------------------------------------


def check_necessary_mqsp(state: PolynomialState, choices, convention: Optional[SignalConvention] = None,
                         tol_coeff=None) -> DiagnosticReport:
    """Necessary conditions for producing ``state`` with a given choice vector.

    Verdicts: ``(i)`` per-variable degree at most ``n_k``; ``(ii)`` parity
    ``n_k mod 2`` in each variable (Laurent picture only); ``(iii^z)`` real
    ``P`` and imaginary ``Q`` for ``Wz`` x-rotations; ``(iii^x)`` reflection
    symmetry for ``Wx`` z-rotations. Without a convention the full algebra is
    assumed and only ``(i)``/``(ii)`` are reported.
    """
    if state.num_vars != 2 or state.dim != 2:
        raise DimensionMismatch("expected a bivariate state with 2-dimensional coefficients")
    choices = parse_choices(choices)
    counts = (choices.count("a"), choices.count("b"))
    picture = convention.picture if convention is not None else state.kind
    eps = tol("tol_norm", tol_coeff)
    report = DiagnosticReport()

    for j, var in enumerate("ab"):
        bad = next((k for k in state.terms if abs(k[j]) > counts[j]), None)
        report.add(f"(i):{var}", bad is None, None if bad is None else {"index": bad, "n": counts[j]})
    if picture == LAURENT:
        for j, var in enumerate("ab"):
            bad = next((k for k in state.terms if (k[j] - counts[j]) % 2), None)
            report.add(f"(ii):{var}", bad is None, None if bad is None else {"index": bad, "n": counts[j]})

    if convention is not None and (convention.basis, convention.algebra) == (WZ, XROT):
        bad = next(
            (k for k, v in state.terms.items() if abs(v[0].imag) > eps or abs(v[1].real) > eps), None
        )
        report.add("(iii^z)", bad is None, None if bad is None else {"index": bad})
    elif convention is not None and (convention.basis, convention.algebra) == (WX, ZROT):
        if picture == LAURENT:
            mirror = lambda k: (-k[0], -k[1])  # noqa: E731
        else:
            mirror = lambda k: (counts[0] - k[0], counts[1] - k[1])  # noqa: E731
        bad = None
        for k in set(state.terms) | {mirror(k) for k in state.terms}:
            u, w = state.coefficient(k), state.coefficient(mirror(k))
            if abs(u[0] - w[0]) > eps or abs(u[1] + w[1]) > eps:
                bad = {"index": k, "mirror": mirror(k)}
                break
        report.add("(iii^x)", bad is None, bad)
    return report


def wx_choice_ops(z_ops):
    """Processing operators that reproduce a ``Wx`` protocol with plain ``diag(1, z)`` calls."""
    ops = [np.asarray(u) for u in z_ops]
    if len(ops) == 1:
        return ops
    h = HADAMARD
    return [h @ ops[0]] + [h @ u @ h for u in ops[1:-1]] + [ops[-1] @ h]


# ---------------------------------------------------------------------------
# one-step extraction and full decomposition
# ---------------------------------------------------------------------------


def _require_normalized(state, tol_norm=None):
    eps = tol("tol_norm", tol_norm)
    residual = normalization_residual(state)
    if residual > eps:
        raise NotNormalized(f"normalization residual {residual:.3e} exceeds {eps:.1e}", residual=residual)


def _qutrit_state(state):
    if state.num_vars != 2 or state.kind != ANALYTIC:
        raise BadSupport("expected a bivariate analytic state")
    if state.dim != 3:
        raise DimensionMismatch(f"expected 3-dimensional coefficients, got {state.dim}")
    return check_triangle(state)


def side_sets(state: PolynomialState, n=None):
    """Coefficients on the ``a`` axis, the ``b`` axis and the hypotenuse (zeros included)."""
    n = state.total_degree if n is None else n
    a_axis = [state.coefficient((k, 0)) for k in range(n + 1)]
    b_axis = [state.coefficient((0, k)) for k in range(n + 1)]
    diag = [state.coefficient((k, n - k)) for k in range(n + 1)]
    return a_axis, b_axis, diag


def _intersect(basis, chosen, eps):
    """Orthonormal basis of ``span(basis)`` intersected with ``chosen``'s orthocomplement."""
    if not basis:
        return []
    if not chosen:
        return list(basis)
    b = np.array(basis).T
    m = np.array(chosen).conj() @ b
    null = orthogonal_complement([row.conj() for row in m], eps, dim=b.shape[1])
    return [b @ c for c in null]


def _candidates(space, others, eps):
    """Trial directions inside ``space`` for an unconstrained choice."""
    cands = list(space)
    for other in others:
        cands += _intersect(space, other, eps)
        cands += _intersect(space, orthogonal_complement(other, eps, dim=3), eps)
    return cands


def find_extraction_basis(a_axis, b_axis, diag, tol_rank=None):
    """Orthonormal ``psi_0, psi_1, psi_2`` orthogonal to the three sides, or ``None``.

    Forced choices (one-dimensional admissible sets) are made first. When a
    choice is free, a few structured candidates are tried in turn, since the
    first basis vector of the admissible set does not always lead to a
    solution when several corners vanish.
    """
    eps = tol("tol_rank", tol_rank)
    comps = {
        2: orthogonal_complement(a_axis, eps, dim=3),
        1: orthogonal_complement(b_axis, eps, dim=3),
        0: orthogonal_complement(diag, eps, dim=3),
    }
    if any(not c for c in comps.values()):
        return None

    def solve(assigned):
        left = [j for j in (0, 1, 2) if j not in assigned]
        if not left:
            return assigned
        chosen = list(assigned.values())
        spaces = {j: _intersect(comps[j], chosen, eps) for j in left}
        if any(not s for s in spaces.values()):
            return None
        j = min(left, key=lambda i: (len(spaces[i]), i))
        if len(spaces[j]) == 1:
            trials = spaces[j]
        else:
            others = [spaces[i] for i in left if i != j]
            trials = _candidates(spaces[j], others, eps)
        for t in trials:
            norm = np.linalg.norm(t)
            if norm <= eps:
                continue
            found = solve({**assigned, j: t / norm})
            if found is not None:
                return found
        return None

    found = solve({})
    if found is None:
        return None
    return [found[0], found[1], found[2]]


def _lower_3d(state, unitary, n):
    lat, _ = state.to_lattice(shape=(n + 1, n + 1))
    lowered, residual = kernels.lower(lat, unitary, W_SHIFTS, n)
    if residual > STEP_TOL:
        raise NotLowerable(f"lowering leaves a residual of {residual:.3e}", residual=residual)
    return PolynomialState.from_lattice(lowered, num_vars=2, kind=ANALYTIC)


def _renormalized(state, n):
    lat, _ = state.to_lattice(shape=(n + 1, n + 1))
    i, j = np.indices(lat.shape[:2])
    lat = renormalize_lattice(lat, mask=i + j <= n)
    return PolynomialState.from_lattice(lat, num_vars=2, kind=ANALYTIC)


def _orthonormalize(vectors):
    q, r = np.linalg.qr(np.array(vectors).T)
    return list((q * (np.diagonal(r) / np.abs(np.diagonal(r)))).T)


def extract_step_3d(state: PolynomialState, tol_rank=None, tol_norm=None):
    """Undo the last ``A W`` of a qutrit protocol.

    Returns ``(A, lowered)`` with ``A @ W @ lowered == state`` and ``lowered``
    of total degree one less.

    Raises
    ------
    NotLowerable
        No admissible basis exists; the witness carries the ranks of the three
        side sets.
    """
    n = _qutrit_state(state)
    if n < 1:
        raise ValueError("a degree-0 state has no signal call to extract")
    _require_normalized(state, tol_norm)
    a_axis, b_axis, diag = side_sets(state, n)
    basis = find_extraction_basis(a_axis, b_axis, diag, tol_rank)
    if basis is None:
        ranks = {
            "a_axis": rank_span(a_axis, tol_rank)[0],
            "b_axis": rank_span(b_axis, tol_rank)[0],
            "hypotenuse": rank_span(diag, tol_rank)[0],
        }
        raise NotLowerable("no orthonormal basis satisfies the extraction conditions", ranks=ranks)
    unitary = complete_to_unitary(_orthonormalize(basis))
    return unitary, _lower_3d(state, unitary, n)


def decompose_3d(state: PolynomialState, tol_endpoint=None, tol_norm=None) -> Protocol3D:
    """Qutrit protocol for a state whose ``1``, ``a**n`` and ``b**n`` coefficients are nonzero.

    Raises
    ------
    ZeroEndpoint
        A corner coefficient vanishes; the construction does not apply
        (a protocol may still exist, see :func:`extract_step_3d`).
    """
    n = _qutrit_state(state)
    _require_normalized(state, tol_norm)
    eps = tol("tol_endpoint", tol_endpoint)
    ops = []
    current = state
    for m in range(n, 0, -1):
        current = _renormalized(current, m)
        corners = {"1": (0, 0), "a^n": (m, 0), "b^n": (0, m)}
        vecs = []
        for name, idx in corners.items():
            v = current.coefficient(idx)
            norm = float(np.linalg.norm(v))
            if norm <= eps:
                raise ZeroEndpoint(
                    f"coefficient of {name} (index {idx}) vanishes at degree {m}",
                    index=list(idx), degree=m, norm=norm,
                )
            vecs.append(v)
        overlap = max(abs(np.vdot(vecs[i], vecs[j])) for i, j in ((0, 1), (0, 2), (1, 2)))
        if overlap > STEP_TOL:
            raise NotLowerable(f"corner coefficients overlap by {overlap:.3e}", overlap=overlap)
        unitary = complete_to_unitary(_orthonormalize(vecs))
        current = _lower_3d(current, unitary, m)
        ops.append(unitary)
    v = current.coefficient((0, 0))
    ops.append(complete_to_unitary([v / np.linalg.norm(v)]))
    ops.reverse()
    return Protocol3D(tuple(ops))


DECOMPOSABLE = "Decomposable"
NOT_IMPLEMENTABLE = "NotImplementable"
INCONCLUSIVE = "Inconclusive"


def check_sufficient_3d(state: PolynomialState, tol_endpoint=None, tol_norm=None) -> DiagnosticReport:
    """Report on the constructive route for a qutrit state.

    Verdicts cover normalization, triangular support and the three corners at
    the top degree; a final ``decomposition`` verdict records whether peeling
    reaches degree zero, since corners can also vanish at lower degrees.
    """
    report = DiagnosticReport()
    try:
        n = _qutrit_state(state)
    except BadSupport as exc:
        report.add("support:triangle", False, exc.witness or {"message": str(exc)})
        report.outcome = INCONCLUSIVE
        return report
    report.add("support:triangle", True, {"degree": n})
    residual = normalization_residual(state)
    report.add("normalized", residual <= tol("tol_norm", tol_norm), {"residual": residual})
    eps = tol("tol_endpoint", tol_endpoint)
    for name, idx in (("1", (0, 0)), ("a^n", (n, 0)), ("b^n", (0, n))):
        norm = float(np.linalg.norm(state.coefficient(idx)))
        report.add(f"endpoint:{name}", norm > eps, {"index": list(idx), "norm": norm})
    if report.passed():
        try:
            decompose_3d(state, tol_endpoint, tol_norm)
            report.add("decomposition", True, {"calls": n})
        except (ZeroEndpoint, NotLowerable) as exc:
            report.add("decomposition", False, {"error": exc.code, **exc.witness})
    report.outcome = DECOMPOSABLE if report.passed() else INCONCLUSIVE
    return report


# ---------------------------------------------------------------------------
# unimplementability and q(gamma)
# ---------------------------------------------------------------------------


def _qubit_state(state, tol_rank=None):
    """Bivariate analytic state with 2-dimensional coefficients.

    A qutrit state is accepted when its third component vanishes identically.
    """
    if state.num_vars != 2 or state.kind != ANALYTIC:
        raise BadSupport("expected a bivariate analytic state")
    if state.dim == 2:
        return state
    if state.dim == 3:
        third = max((abs(v[2]) for v in state.terms.values()), default=0.0)
        if third > tol("tol_rank", tol_rank):
            raise DimensionMismatch(f"third component is not identically zero (max {third:.3e})")
        return state.map_vectors(lambda v: v[:2])
    raise DimensionMismatch(f"expected 2-dimensional coefficients, got {state.dim}")


def check_unimplementable(state: PolynomialState, tol_rank=None) -> DiagnosticReport:
    """Both axis coefficient sets spanning the whole qubit space rules out every protocol.

    The test is one-directional: failing it leaves the question open.
    """
    state = _qubit_state(state, tol_rank)
    n = state.total_degree
    a_axis, b_axis, _ = side_sets(state, n)
    ra = rank_span(a_axis, tol_rank)[0]
    rb = rank_span(b_axis, tol_rank)[0]
    report = DiagnosticReport()
    report.add("span:a-axis", ra == 2, {"rank": ra})
    report.add("span:b-axis", rb == 2, {"rank": rb})
    report.outcome = NOT_IMPLEMENTABLE if ra == 2 and rb == 2 else INCONCLUSIVE
    return report


@dataclass(frozen=True)
class QGammaResult:
    q: float
    argmax_a: tuple
    argmax_b: tuple
    max_a: float
    max_b: float
    normalized_input: bool
    scale: float = 1.0

    @property
    def radius(self) -> float:
        return self.q / 4

    def to_dict(self):
        return {
            "q": self.q,
            "radius": self.radius,
            "max_a": self.max_a,
            "max_b": self.max_b,
            "argmax_a": list(self.argmax_a),
            "argmax_b": list(self.argmax_b),
            "normalized_input": self.normalized_input,
            "scale": self.scale,
        }


def _max_pair_det(vectors):
    v = np.array(vectors)
    dets = np.abs(np.outer(v[:, 0], v[:, 1]) - np.outer(v[:, 1], v[:, 0]))
    x, y = np.unravel_index(int(np.argmax(dets)), dets.shape)
    return float(dets[x, y]), (int(x), int(y))


def q_gamma(state: PolynomialState, normalize=True, tol_norm=None) -> QGammaResult:
    """Smaller of the two largest axis determinants ``|det[g_{x,0} g_{y,0}]|``, ``|det[g_{0,x} g_{0,y}]|``.

    With ``normalize`` the coefficients are first scaled so that
    ``sum_k ||g_k||^2 = 1`` and the scaled state must pass the normalization
    test. ``normalize=False`` evaluates the raw coefficients without any
    check, which is what perturbation bounds need.
    """
    state = _qubit_state(state)
    scale = 1.0
    already = True
    if normalize:
        total = sum(float(np.vdot(v, v).real) for v in state.terms.values())
        if total <= 0:
            raise NotAPolynomialState("the zero polynomial is not a state")
        scale = 1 / np.sqrt(total)
        already = abs(total - 1) <= tol("tol_norm", tol_norm)
        state = state.scaled(scale)
        residual = normalization_residual(state)
        if residual > tol("tol_norm", tol_norm):
            raise NotAPolynomialState(
                f"off-lag autocorrelations do not vanish (residual {residual:.3e})", residual=residual
            )
    n = state.total_degree
    a_axis, b_axis, _ = side_sets(state, n)
    max_a, arg_a = _max_pair_det(a_axis)
    max_b, arg_b = _max_pair_det(b_axis)
    return QGammaResult(min(max_a, max_b), arg_a, arg_b, max_a, max_b, already, float(scale))


def inapprox_radius(state: PolynomialState) -> float:
    """Sup-norm radius around ``state`` that contains no implementable state (``q / 4``)."""
    return q_gamma(state).radius


__all__ = [
    "Protocol3D",
    "Protocol2DChoice",
    "QGammaResult",
    "evaluate_protocol_3d",
    "evaluate_protocol_2d_choice",
    "embed_2d_in_3d",
    "check_necessary_mqsp",
    "extract_step_3d",
    "find_extraction_basis",
    "decompose_3d",
    "check_sufficient_3d",
    "check_unimplementable",
    "q_gamma",
    "inapprox_radius",
    "random_protocol_3d",
    "random_protocol_2d_choice",
    "side_sets",
    "wx_choice_ops",
    "NOT_IMPLEMENTABLE",
    "INCONCLUSIVE",
    "DECOMPOSABLE",
]
