"""JSON documents for states, protocols and reports.

Every document carries ``"schema_version": "1"`` and a ``"type"``. Complex
numbers are ``[re, im]`` pairs; on input each part may also be a rational
string such as ``"-122/37"``. Output floats use 17 significant digits, so
``load(save(x)) == x`` bit for bit.
"""

import json
import math
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import NotUnitary, SchemaError
from .linalg import check_unitary
from .multivariate import Protocol2DChoice, Protocol3D
from .polystate import ANALYTIC, KINDS, LAURENT, PolynomialState
from .report import _plain
from .univariate import ALGEBRAS, BASES, FULL, Protocol1D, SignalConvention

SCHEMA_VERSION = "1"

UNIVARIATE_LAURENT = "univariate-laurent"
UNIVARIATE_ANALYTIC = "univariate-analytic"
MQSP_CHOICE = "mqsp-choice"
THREE_DIM = "three-dim"
FAMILIES = (UNIVARIATE_LAURENT, UNIVARIATE_ANALYTIC, MQSP_CHOICE, THREE_DIM)


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------


def _number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise SchemaError(f"cannot serialize non-finite number {x!r}")
    return format(x, ".17g")


def _is_leaf(obj):
    """Lists of scalars and lists of short scalar lists stay on one line."""
    if not isinstance(obj, list):
        return False
    return all(
        not isinstance(v, (dict, list)) or (isinstance(v, list) and all(not isinstance(w, (dict, list)) for w in v))
        for v in obj
    )


def _encode(obj, level):
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        obj = list(obj)
        if _is_leaf(obj):
            return "[" + ", ".join(_encode(v, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, level + 1) for v in obj) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _number(obj)


def dumps(doc) -> str:
    """Serialize a document; deterministic for a given input."""
    return _encode(_plain(doc), 0) + "\n"


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _matrix(u):
    return [[_pair(x) for x in row] for row in np.asarray(u)]


def state_to_doc(state: PolynomialState) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "state",
        "num_vars": state.num_vars,
        "dim": state.dim,
        "kind": state.kind,
        "terms": [{"exp": list(k), "coeff": [_pair(x) for x in v]} for k, v in state.terms.items()],
    }


def protocol_family(p) -> str:
    if isinstance(p, Protocol1D):
        return UNIVARIATE_LAURENT if p.convention.picture == LAURENT else UNIVARIATE_ANALYTIC
    if isinstance(p, Protocol2DChoice):
        return MQSP_CHOICE
    if isinstance(p, Protocol3D):
        return THREE_DIM
    raise TypeError(f"not a protocol: {type(p).__name__}")


def protocol_to_doc(p) -> dict:
    family = protocol_family(p)
    doc = {"schema_version": SCHEMA_VERSION, "type": "protocol", "family": family}
    if isinstance(p, Protocol1D):
        doc["basis"] = p.convention.basis
        doc["algebra"] = p.convention.algebra
        if p.phases is not None:
            doc["phases"] = list(p.phases)
    elif isinstance(p, Protocol2DChoice):
        doc["picture"] = p.picture
        doc["choices"] = "".join(p.choices)
    doc["ops"] = [_matrix(u) for u in p.ops]
    return doc


def report_to_doc(report, **extra) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "type": "report"}
    doc.update(report.to_dict())
    doc.update(extra)
    return doc


def to_doc(obj) -> dict:
    if isinstance(obj, PolynomialState):
        return state_to_doc(obj)
    return protocol_to_doc(obj)


def save(obj, path):
    """Write a state or protocol document to ``path``."""
    Path(path).write_text(dumps(to_doc(obj)))


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------


def _fail(field, message):
    raise SchemaError(f"{field}: {message}", field=field)


def _real(x, field):
    if isinstance(x, bool):
        _fail(field, "expected a number, got a boolean")
    if isinstance(x, (int, float)):
        value = float(x)
    elif isinstance(x, str):
        try:
            value = float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            _fail(field, f"cannot parse {x!r} as a rational number")
    else:
        _fail(field, f"expected a number or rational string, got {type(x).__name__}")
    if not math.isfinite(value):
        _fail(field, "number is not finite")
    return value


def _complex(x, field):
    if not isinstance(x, list) or len(x) != 2:
        _fail(field, "expected an [re, im] pair")
    return complex(_real(x[0], f"{field}[0]"), _real(x[1], f"{field}[1]"))


def _field(doc, key, where, types=None):
    if key not in doc:
        _fail(f"{where}{key}", "missing field")
    value = doc[key]
    if types is not None and not isinstance(value, types):
        _fail(f"{where}{key}", f"expected {types if isinstance(types, type) else types[0]}")
    return value


def _header(doc, expected_type):
    if not isinstance(doc, dict):
        _fail("<root>", "expected a JSON object")
    version = _field(doc, "schema_version", "")
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported version {version!r}, expected {SCHEMA_VERSION!r}")
    if doc.get("type", expected_type) != expected_type:
        _fail("type", f"expected {expected_type!r}, got {doc['type']!r}")


def state_from_doc(doc) -> PolynomialState:
    _header(doc, "state")
    num_vars = _field(doc, "num_vars", "", int)
    dim = _field(doc, "dim", "", int)
    kind = doc.get("kind")
    if num_vars not in (1, 2):
        _fail("num_vars", f"must be 1 or 2, got {num_vars}")
    if not 1 <= dim <= 4:
        _fail("dim", f"must be between 1 and 4, got {dim}")
    if kind is not None and kind not in KINDS:
        _fail("kind", f"must be one of {KINDS}, got {kind!r}")
    terms = _field(doc, "terms", "", list)
    out = {}
    for i, term in enumerate(terms):
        where = f"terms[{i}]"
        if not isinstance(term, dict):
            _fail(where, "expected an object with 'exp' and 'coeff'")
        exp = _field(term, "exp", f"{where}.", list)
        if len(exp) != num_vars or not all(isinstance(e, int) and not isinstance(e, bool) for e in exp):
            _fail(f"{where}.exp", f"expected {num_vars} integer exponent(s), got {exp!r}")
        coeff = _field(term, "coeff", f"{where}.", list)
        if len(coeff) != dim:
            _fail(f"{where}.coeff", f"expected {dim} entries, got {len(coeff)}")
        key = tuple(exp)
        if key in out:
            _fail(f"{where}.exp", f"duplicate exponent {exp!r}")
        out[key] = [_complex(c, f"{where}.coeff[{j}]") for j, c in enumerate(coeff)]
    if kind == ANALYTIC and any(min(k) < 0 for k in out):
        _fail("terms", "analytic state with a negative exponent")
    return PolynomialState.from_terms(out, num_vars=num_vars, dim=dim, kind=kind, tol_prune=0.0)


def _ops(doc, dim):
    raw = _field(doc, "ops", "", list)
    if not raw:
        _fail("ops", "a protocol needs at least one operator")
    ops = []
    for k, m in enumerate(raw):
        where = f"ops[{k}]"
        if not isinstance(m, list) or len(m) != dim or any(not isinstance(r, list) or len(r) != dim for r in m):
            _fail(where, f"expected a {dim}x{dim} matrix of [re, im] pairs")
        u = np.array([[_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(m)])
        try:
            ops.append(check_unitary(u))
        except NotUnitary as exc:
            raise NotUnitary(f"{where}: {exc}", op=k, **exc.witness) from None
    return tuple(ops)


def protocol_from_doc(doc):
    _header(doc, "protocol")
    family = _field(doc, "family", "", str)
    if family not in FAMILIES:
        _fail("family", f"must be one of {FAMILIES}, got {family!r}")
    if family == THREE_DIM:
        return Protocol3D(_ops(doc, 3))
    ops = _ops(doc, 2)
    if family == MQSP_CHOICE:
        choices = _field(doc, "choices", "", str)
        if set(choices) - {"a", "b"}:
            _fail("choices", f"only 'a' and 'b' are allowed, got {choices!r}")
        if len(choices) + 1 != len(ops):
            _fail("choices", f"{len(choices)} signal calls for {len(ops)} operators")
        picture = doc.get("picture", ANALYTIC)
        if picture not in KINDS:
            _fail("picture", f"must be one of {KINDS}, got {picture!r}")
        return Protocol2DChoice(ops, choices, picture)
    basis = doc.get("basis", "Wz")
    algebra = doc.get("algebra", FULL)
    if basis not in BASES:
        _fail("basis", f"must be one of {BASES}, got {basis!r}")
    if algebra not in ALGEBRAS:
        _fail("algebra", f"must be one of {ALGEBRAS}, got {algebra!r}")
    picture = LAURENT if family == UNIVARIATE_LAURENT else ANALYTIC
    conv = SignalConvention(picture, basis, algebra)
    phases = doc.get("phases")
    if algebra != FULL:
        if phases is None:
            _fail("phases", f"required for the {algebra} algebra")
        if not isinstance(phases, list) or len(phases) != len(ops):
            _fail("phases", f"expected {len(ops)} phases")
        phases = [_real(p, f"phases[{k}]") for k, p in enumerate(phases)]
        try:
            return Protocol1D(conv, ops, tuple(phases))
        except ValueError as exc:
            _fail("phases", str(exc))
    return Protocol1D(conv, ops)


def parse(text: str, source="<string>"):
    """Decode JSON text, reporting the line and column of syntax errors."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
            line=exc.lineno, column=exc.colno,
        ) from None


def from_doc(doc):
    """State or protocol, dispatched on the ``type`` field."""
    kind = doc.get("type") if isinstance(doc, dict) else None
    if kind == "protocol" or (kind is None and isinstance(doc, dict) and "ops" in doc):
        return protocol_from_doc(doc)
    if kind in (None, "state"):
        return state_from_doc(doc)
    _fail("type", f"expected 'state' or 'protocol', got {kind!r}")


def load(path):
    """Read a state or protocol document."""
    path = Path(path)
    return from_doc(parse(path.read_text(), str(path)))


def loads(text: str):
    return from_doc(parse(text))


# ---------------------------------------------------------------------------
# bundled fixtures
# ---------------------------------------------------------------------------


def fixture_dir() -> Path:
    return Path(str(resources.files("qspforge") / "fixtures"))


def resolve(name) -> Path:
    """``name`` itself when it exists, else the bundled fixture of that name."""
    path = Path(name)
    if path.exists():
        return path
    bundled = fixture_dir() / path.name
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"no such file or bundled fixture: {name}")


def load_fixture(name):
    return load(resolve(name))
