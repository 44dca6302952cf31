"""Single-variable QSP: evaluation, classification, synthesis, conversions.

Signal operators are ``w(z) = diag(1, z)`` (analytic picture) and
``v(z) = diag(1/z, z)`` (Laurent picture). In the ``Wx`` basis the signal is
Hadamard-conjugated, ``H w H`` or ``H v H``. Protocols are stored as the list
of processing unitaries ``A_0 .. A_n`` in application order.

Synthesis always works in the analytic ``Wz`` frame. Laurent states are first
mapped through ``v(z) = z**-1 w(z**2)``, which leaves the processing operators
unchanged, and ``Wx`` protocols are related to ``Wz`` ones by moving the
Hadamards onto the processing operators.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .config import tol
from .errors import ConventionViolated, DimensionMismatch, IndefiniteParity, NotLowerable, NotNormalized
from .linalg import check_unitary, complete_to_unitary, haar_unitary, orthogonal_complement
from .polystate import ANALYTIC, LAURENT, PolynomialState, normalization_residual, renormalize_lattice
from .report import DiagnosticReport

WZ = "Wz"
WX = "Wx"
BASES = (WZ, WX)

FULL = "full"
XROT = "x-rotations"
ZROT = "z-rotations"
ALGEBRAS = (FULL, XROT, ZROT)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)

# Residual allowed when peeling a step off a state that passed the checks.
STEP_TOL = 1e-7


def x_rotation(phi: float) -> np.ndarray:
    """``exp(i phi X)``."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=np.complex128)


def z_rotation(phi: float) -> np.ndarray:
    """``exp(i phi Z)``."""
    return np.diag([np.exp(1j * phi), np.exp(-1j * phi)]).astype(np.complex128)


@dataclass(frozen=True)
class SignalConvention:
    """Which signal operator is interleaved and which processing operators are allowed.

    The QSP conventions in common use are ``(Wz, x-rotations)``,
    ``(Wx, z-rotations)`` and the full algebra with either basis, each in
    the Laurent or the analytic picture.
    """

    picture: str = ANALYTIC
    basis: str = WZ
    algebra: str = FULL

    def __post_init__(self):
        if self.picture not in (ANALYTIC, LAURENT):
            raise ValueError(f"picture must be 'analytic' or 'laurent', got {self.picture!r}")
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.algebra not in ALGEBRAS:
            raise ValueError(f"algebra must be one of {ALGEBRAS}, got {self.algebra!r}")

    @property
    def cell(self) -> str:
        """Identifier of the matching row of the conventions table, e.g. ``laurent-wz``."""
        if self.algebra == FULL:
            return f"{self.picture}-full"
        if (self.basis, self.algebra) == (WZ, XROT):
            return f"{self.picture}-wz"
        if (self.basis, self.algebra) == (WX, ZROT):
            return f"{self.picture}-wx"
        raise ValueError(f"no characterisation for {self.basis} with {self.algebra}")

    def rotation(self, phi):
        if self.algebra == XROT:
            return x_rotation(phi)
        if self.algebra == ZROT:
            return z_rotation(phi)
        raise ValueError("full-algebra protocols carry no phases")


@dataclass(frozen=True, eq=False)
class Protocol1D:
    convention: SignalConvention
    ops: tuple
    phases: Optional[tuple] = None

    def __post_init__(self):
        ops = tuple(check_unitary(u) for u in self.ops)
        if not ops:
            raise ValueError("a protocol needs at least one processing operator")
        if any(u.shape != (2, 2) for u in ops):
            raise DimensionMismatch("univariate protocols use 2x2 processing operators")
        object.__setattr__(self, "ops", ops)
        if self.phases is not None:
            phases = tuple(float(p) for p in self.phases)
            if len(phases) != len(ops):
                raise ValueError(f"{len(phases)} phases for {len(ops)} operators")
            for k, (phi, u) in enumerate(zip(phases, ops)):
                if np.abs(self.convention.rotation(phi) - u).max() > tol("tol_unitary"):
                    raise ValueError(f"operator {k} does not match its phase {phi}")
            object.__setattr__(self, "phases", phases)

    @classmethod
    def from_phases(cls, phases, convention: SignalConvention):
        ops = tuple(convention.rotation(phi) for phi in phases)
        return cls(convention, ops, tuple(phases))

    @property
    def num_calls(self) -> int:
        return len(self.ops) - 1


def _wz_frame(ops):
    """Map processing operators across ``H w H <-> w``; the map is an involution."""
    ops = [np.asarray(u) for u in ops]
    if len(ops) == 1:
        return ops
    h = HADAMARD
    return [h @ ops[0]] + [h @ u @ h for u in ops[1:-1]] + [ops[-1] @ h]


def _shifts(n, step):
    shifts = np.zeros((n, 2, 2), dtype=np.int64)
    shifts[:, 1, 0] = step
    return shifts


def evaluate_protocol_1d(p: Protocol1D) -> PolynomialState:
    """Expand ``A_n S A_{n-1} S ... S A_0 |0>`` into its coefficient vectors."""
    ops = p.ops if p.convention.basis == WZ else _wz_frame(p.ops)
    n = p.num_calls
    if p.convention.picture == ANALYTIC:
        lat = kernels.propagate(np.array(ops), _shifts(n, 1))
        return PolynomialState.from_lattice(lat, num_vars=1, kind=ANALYTIC)
    lat = kernels.propagate(np.array(ops), _shifts(n, 2))
    return PolynomialState.from_lattice(lat, (-n, 0), num_vars=1, kind=LAURENT)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def _first(pairs):
    return next(iter(pairs), None)


def _parity_witness(state, n):
    return _first(k[0] for k in state.terms if (k[0] - n) % 2)


def _real_imag_witness(state, tol_):
    for k, v in state.terms.items():
        if abs(v[0].imag) > tol_ or abs(v[1].real) > tol_:
            return {"exponent": k[0], "P": complex(v[0]), "Q": complex(v[1])}
    return None


def _symmetry_witness(state, reflect, tol_):
    """First ``k`` with ``P_k != P_{r(k)}`` or ``Q_k != -Q_{r(k)}``."""
    for k in sorted(set(state.terms) | {(reflect(k[0]),) for k in state.terms}):
        a = state.coefficient(k)
        b = state.coefficient((reflect(k[0]),))
        if abs(a[0] - b[0]) > tol_ or abs(a[1] + b[1]) > tol_:
            return {"exponent": k[0], "mirror": reflect(k[0])}
    return None


def _check(report, condition, witness):
    report.add(condition, witness is None, witness)


def classify_state_1d(state: PolynomialState, tol_coeff=None) -> DiagnosticReport:
    """Check a univariate two-dimensional state against each QSP convention.

    Verdict ids are ``<picture>-<cell>:<condition>``, with cells ``wz``
    (real ``P``, imaginary ``Q``), ``wx`` (reflection symmetry) and ``full``.
    Parity conditions only exist in the Laurent picture. Only the cells of
    the state's own picture are reported.
    """
    if state.num_vars != 1 or state.dim != 2:
        raise DimensionMismatch("classification needs a univariate state with 2-dimensional coefficients")
    eps = tol("tol_norm", tol_coeff)
    n = state.degree
    report = DiagnosticReport()
    real_imag = _real_imag_witness(state, eps)
    if state.kind == LAURENT:
        parity = _parity_witness(state, n)
        sym = _symmetry_witness(state, lambda k: -k, eps)
        _check(report, "laurent-wz:real-imag", real_imag)
        _check(report, "laurent-wz:parity", parity)
        _check(report, "laurent-wx:symmetry", sym)
        _check(report, "laurent-wx:parity", parity)
        _check(report, "laurent-full:parity", parity)
    else:
        sym = _symmetry_witness(state, lambda k: n - k, eps)
        _check(report, "analytic-wz:real-imag", real_imag)
        _check(report, "analytic-wx:symmetry", sym)
        report.add("analytic-full:none", True)
    return report


def satisfies(report: DiagnosticReport, convention: SignalConvention) -> bool:
    return report.passed(convention.cell + ":")


# ---------------------------------------------------------------------------
# Laurent <-> analytic
# ---------------------------------------------------------------------------


def laurent_to_analytic_1d(state: PolynomialState) -> PolynomialState:
    """``g_{-n + 2j} z**(-n + 2j)  ->  g_{-n + 2j} z**j``."""
    if state.num_vars != 1 or state.kind != LAURENT:
        raise ValueError("expected a univariate Laurent state")
    n = state.degree
    bad = _parity_witness(state, n)
    if bad is not None:
        raise IndefiniteParity(f"exponent {bad} has the wrong parity for degree {n}", exponent=bad, degree=n)
    terms = {((k[0] + n) // 2,): v for k, v in state.terms.items()}
    return PolynomialState.from_terms(terms, num_vars=1, dim=state.dim, kind=ANALYTIC, tol_prune=0.0)


def analytic_to_laurent_1d(state: PolynomialState, degree=None) -> PolynomialState:
    """Inverse of :func:`laurent_to_analytic_1d`; ``degree`` defaults to the state's degree."""
    if state.num_vars != 1 or state.kind != ANALYTIC:
        raise ValueError("expected a univariate analytic state")
    n = state.degree if degree is None else int(degree)
    if n < state.degree:
        raise ValueError(f"degree {n} is below the state's degree {state.degree}")
    terms = {(2 * k[0] - n,): v for k, v in state.terms.items()}
    return PolynomialState.from_terms(terms, num_vars=1, dim=state.dim, kind=LAURENT, tol_prune=0.0)


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def _full_step(top, bottom, eps):
    """Columns ``psi_0, psi_1`` with ``A^dag top ~ |1>`` and ``A^dag bottom ~ |0>``.

    The two endpoints are orthogonal, so either one fixes ``A`` up to column
    phases; the larger one is used for accuracy.
    """
    nt, nb = np.linalg.norm(top), np.linalg.norm(bottom)
    if max(nt, nb) <= eps:
        return np.eye(2, dtype=np.complex128)
    if nt >= nb:
        psi1 = top / nt
        psi0 = orthogonal_complement([psi1])[0]
    else:
        psi0 = bottom / nb
        psi1 = orthogonal_complement([psi0])[0]
    return np.column_stack([psi0, psi1])


def _x_phase(top, bottom, eps):
    """Angle whose x-rotation best sends ``top`` to ``|1>`` and ``bottom`` to ``|0>``.

    Both targets are quadratic forms in ``(cos phi, sin phi)``, so the least
    squares angle is the smallest eigenvector of a real 2x2 matrix.
    """
    if max(np.linalg.norm(top), np.linalg.norm(bottom)) <= eps:
        return 0.0
    # first entry of exp(-i phi X) top is c t0 - i s t1; second of exp(-i phi X) bottom is c b1 - i s b0
    rows = np.array([[top[0], -1j * top[1]], [bottom[1], -1j * bottom[0]]])
    m = (rows.conj().T @ rows).real
    _, vecs = np.linalg.eigh(m)
    c, s = vecs[:, 0]
    return math.atan2(s, c)


def _z_phase(top, bottom, eps):
    """Angle with ``H exp(-i phi Z)`` sending ``top`` near ``|1>`` and ``bottom`` near ``|0>``.

    The residual is ``const + 2 Re(w exp(2 i phi))``, minimised at ``exp(2 i phi) = -conj(w) / |w|``.
    """
    w = np.conj(top[0]) * top[1] - np.conj(bottom[0]) * bottom[1]
    if abs(w) <= eps * eps:
        return 0.0
    return (math.pi - float(np.angle(w))) / 2


def _peel(coeffs, convention, eps):
    """Extract processing operators from analytic coefficients ``g_0 .. g_n``.

    Returns operators ``A_0 .. A_n`` in the convention's own basis and the
    phases when the algebra is a rotation family.
    """
    n = coeffs.shape[0] - 1
    lat = coeffs.reshape(n + 1, 1, 2).astype(np.complex128)
    shifts = np.array([[0, 0], [1, 0]], dtype=np.int64)
    ops, phases = [], []
    for m in range(n, 0, -1):
        lat = renormalize_lattice(lat)
        top, bottom = lat[m, 0], lat[0, 0]
        if convention.algebra == FULL:
            op = _full_step(top, bottom, eps)
            frame = op
        elif convention.algebra == XROT:
            phi = _x_phase(top, bottom, eps)
            op = frame = x_rotation(phi)
            phases.append(phi)
        else:
            phi = _z_phase(top, bottom, eps)
            op = z_rotation(phi)
            frame = op @ HADAMARD
            phases.append(phi)
        lat, residual = kernels.lower(lat, frame, shifts, m)
        if residual > STEP_TOL:
            raise NotLowerable(
                f"step {m} leaves a residual of {residual:.3e}", step=m, residual=residual
            )
        if convention.algebra == ZROT:
            lat = lat @ HADAMARD.T
        ops.append(op)
    v = lat[0, 0] / np.linalg.norm(lat[0, 0])
    if convention.algebra == FULL:
        ops.append(complete_to_unitary([v]))
    elif convention.algebra == XROT:
        phi = math.atan2(v[1].imag, v[0].real)
        ops.append(x_rotation(phi))
        phases.append(phi)
    else:
        phi = float(np.angle(v[0]))
        ops.append(z_rotation(phi))
        phases.append(phi)
    ops.reverse()
    phases.reverse()
    return ops, phases


def synthesize_1d(state: PolynomialState, convention: SignalConvention, tol_norm=None) -> Protocol1D:
    """Find processing operators that produce ``state`` under ``convention``.

    Raises
    ------
    NotNormalized
        ``<g(z)|g(z)>`` is not identically one.
    IndefiniteParity
        Laurent picture with exponents of both parities.
    ConventionViolated
        The state breaks a condition of the requested convention.
    """
    if state.num_vars != 1 or state.dim != 2:
        raise DimensionMismatch("synthesis needs a univariate state with 2-dimensional coefficients")
    if state.kind != convention.picture:
        raise ConventionViolated(f"{state.kind} state cannot be synthesized in the {convention.picture} picture")
    eps = tol("tol_norm", tol_norm)
    residual = normalization_residual(state)
    if residual > eps:
        raise NotNormalized(f"normalization residual {residual:.3e} exceeds {eps:.1e}", residual=residual)
    if state.kind == LAURENT:
        analytic = laurent_to_analytic_1d(state)
        n = state.degree
    else:
        analytic = state
        n = state.degree
    report = classify_state_1d(state, eps)
    if not satisfies(report, convention):
        raise ConventionViolated(
            f"state violates the {convention.cell} conditions",
            failures=[v.to_dict() for v in report.failures() if v.condition.startswith(convention.cell)],
        )
    coeffs = np.array([analytic.coefficient((j,)) for j in range(n + 1)])
    ops, phases = _peel(coeffs, convention, tol("tol_prune"))
    if convention.algebra == FULL and convention.basis == WX:
        ops = _wz_frame(ops)
    if convention.algebra == FULL:
        return Protocol1D(convention, tuple(ops))
    return Protocol1D(convention, tuple(ops), tuple(float(np.mod(p, 2 * np.pi)) for p in phases))


def convert_convention_1d(p: Protocol1D, target_basis: str) -> Protocol1D:
    """Re-express a protocol in the other signal basis without changing its output.

    The result is a full-algebra protocol: moving the Hadamards onto the
    boundary operators takes them out of any rotation family.
    """
    if target_basis not in BASES:
        raise ValueError(f"basis must be one of {BASES}, got {target_basis!r}")
    if target_basis == p.convention.basis:
        return p
    conv = SignalConvention(p.convention.picture, target_basis, FULL)
    return Protocol1D(conv, tuple(_wz_frame(p.ops)))


def random_protocol_1d(num_calls: int, seed: int, convention: SignalConvention = SignalConvention()):
    """Haar-random operators (full algebra) or uniform phases (rotation families)."""
    rng = np.random.default_rng(seed)
    if convention.algebra == FULL:
        return Protocol1D(convention, tuple(haar_unitary(2, rng) for _ in range(num_calls + 1)))
    return Protocol1D.from_phases(rng.uniform(0, 2 * np.pi, num_calls + 1), convention)
