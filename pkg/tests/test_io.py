import json

import numpy as np
import pytest

from qspforge import (
    NotUnitary,
    PolynomialState,
    Protocol2DChoice,
    SchemaError,
    SignalConvention,
    random_protocol_1d,
    random_protocol_2d_choice,
    random_protocol_3d,
)
from qspforge import io
from qspforge.linalg import haar_unitary
from qspforge.univariate import WX, ZROT


def canonical_counterexample():
    return io.dumps(io.to_doc(io.load_fixture("counterexample.json")))


def test_rational_strings_parse_exactly():
    doc = {
        "schema_version": "1", "type": "state", "num_vars": 1, "dim": 2,
        "terms": [{"exp": [0], "coeff": [["-122/37", "0"], [0.5, "1/3"]]}],
    }
    s = io.state_from_doc(doc)
    assert s.coefficient((0,))[0] == -122 / 37
    assert s.coefficient((0,))[1] == complex(0.5, 1 / 3)


def test_counterexample_fixture_keeps_its_raw_scale():
    s = io.load_fixture("counterexample.json")
    norm = sum(np.vdot(v, v).real for v in s.terms.values())
    assert norm == pytest.approx(308125 / 1332, rel=1e-14)


@pytest.mark.parametrize("make", [
    lambda: io.load_fixture("counterexample.json"),
    lambda: random_protocol_3d(4, 0),
    lambda: random_protocol_2d_choice(5, 1, picture="laurent"),
    lambda: random_protocol_1d(3, 2, SignalConvention("analytic", WX, ZROT)),
])
def test_round_trip_is_bit_exact(make, tmp_path):
    obj = make()
    path = tmp_path / "x.json"
    io.save(obj, path)
    back = io.load(path)
    if isinstance(obj, PolynomialState):
        assert back.terms.keys() == obj.terms.keys()
        assert all(np.array_equal(back.terms[k], obj.terms[k]) for k in obj.terms)
        assert back.kind == obj.kind
    else:
        assert type(back) is type(obj)
        assert all(np.array_equal(a, b) for a, b in zip(back.ops, obj.ops))
        assert getattr(back, "phases", None) == getattr(obj, "phases", None)
        assert getattr(back, "choices", None) == getattr(obj, "choices", None)


def test_save_of_load_is_byte_identical(tmp_path):
    canonical = canonical_counterexample()
    path = tmp_path / "c.json"
    path.write_text(canonical)
    io.save(io.load(path), tmp_path / "d.json")
    assert (tmp_path / "d.json").read_bytes() == canonical.encode()


def test_output_format():
    text = canonical_counterexample()
    doc = json.loads(text)
    assert doc["schema_version"] == "1"
    assert text.endswith("\n")
    # 17 significant digits
    assert "0.33333333333333331" in io.dumps({"x": 1 / 3})
    assert all(len(pair) == 2 for t in doc["terms"] for pair in t["coeff"])


def test_malformed_exponent_names_the_term():
    doc = json.loads(canonical_counterexample())
    doc["terms"][3]["exp"] = [1, "x"]
    with pytest.raises(SchemaError) as info:
        io.state_from_doc(doc)
    assert "terms[3].exp" in str(info.value)
    assert info.value.witness["field"] == "terms[3].exp"


@pytest.mark.parametrize("mutate, field", [
    (lambda d: d.pop("schema_version"), "schema_version"),
    (lambda d: d.update(schema_version="2"), "schema_version"),
    (lambda d: d["terms"][0]["coeff"].pop(), "terms[0].coeff"),
    (lambda d: d["terms"][1]["coeff"][0].__setitem__(0, "1/0"), "terms[1].coeff[0][0]"),
    (lambda d: d["terms"][0].__setitem__("exp", d["terms"][1]["exp"]), "terms[1].exp"),
    (lambda d: d.update(kind="polar"), "kind"),
])
def test_schema_errors_carry_field_paths(mutate, field):
    doc = json.loads(canonical_counterexample())
    mutate(doc)
    with pytest.raises(SchemaError) as info:
        io.state_from_doc(doc)
    assert info.value.witness["field"] == field


def test_non_unitary_operator_reports_its_residual():
    p = random_protocol_3d(2, 0)
    doc = io.to_doc(p)
    bad = haar_unitary(3, np.random.default_rng(5)) * 1.01
    doc["ops"][1] = [[[x.real, x.imag] for x in row] for row in bad]
    with pytest.raises(NotUnitary) as info:
        io.protocol_from_doc(json.loads(io.dumps(doc)))
    assert info.value.witness["op"] == 1
    assert info.value.witness["residual"] == pytest.approx(0.0201, rel=1e-6)


def test_invalid_json_reports_line_and_column():
    with pytest.raises(SchemaError) as info:
        io.loads('{\n  "schema_version": "1",\n  "terms": [,]\n}')
    assert info.value.witness["line"] == 3
    assert info.value.witness["column"] == 13


def test_protocol_field_checks():
    doc = io.to_doc(random_protocol_2d_choice(3, 0))
    doc["choices"] = "abc"
    with pytest.raises(SchemaError):
        io.protocol_from_doc(doc)
    doc["choices"] = "ab"
    with pytest.raises(SchemaError):
        io.protocol_from_doc(doc)
    rot = io.to_doc(random_protocol_1d(2, 0, SignalConvention("analytic", WX, ZROT)))
    del rot["phases"]
    with pytest.raises(SchemaError):
        io.protocol_from_doc(rot)


def test_type_dispatch():
    assert isinstance(io.loads(io.dumps(io.to_doc(random_protocol_2d_choice(2, 0)))), Protocol2DChoice)
    with pytest.raises(SchemaError):
        io.from_doc({"schema_version": "1", "type": "report"})


def test_fixture_resolution():
    assert io.resolve("counterexample.json").exists()
    with pytest.raises(FileNotFoundError):
        io.resolve("missing.json")
