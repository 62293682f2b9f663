import textwrap

import pytest

from gocc_lab.protocol_io import (
    ProtocolParseError,
    builtin_protocol,
    dump_protocol,
    load_protocol,
    parse_protocol,
    protocol_to_dict,
)

VALID = textwrap.dedent("""\
    version: 1
    name: demo
    modes: 1
    rounds:
      - ancillas: 1
        gates:
          - {type: beamsplitter, modes: [0, 1], param: 0.5}
          - {type: displace, modes: [1], param: [0.1, -0.2]}
        measure: 1
      - feedforward:
          - {target_mode: 0, coefficients: [[0.5, 0.0]]}
        measure: 1
    decision:
      type: binned
      coefficients: [1.0, -1.0]
      edges: [0.0]
      labels: [1, 0]
    """)


@pytest.mark.parametrize("name", ["homodyne_sign", "heterodyne_sign", "adaptive_two_round"])
def test_builtins_load(name):
    p = builtin_protocol(name)
    assert p.name == name


def test_round_trip():
    p = parse_protocol(VALID)
    q = parse_protocol(dump_protocol(p))
    assert p == q
    assert protocol_to_dict(q) == protocol_to_dict(p)


def test_load_from_file(tmp_path):
    path = tmp_path / "p.yaml"
    path.write_text(VALID)
    assert load_protocol(path) == parse_protocol(VALID)


def _error(text):
    with pytest.raises(ProtocolParseError) as info:
        parse_protocol(text, source="t.yaml")
    return info.value


def test_unknown_gate_cites_line_and_field():
    err = _error(VALID.replace("type: beamsplitter", "type: mirror"))
    assert err.line == 7
    assert err.field == "rounds[0].gates[0].type"
    assert "t.yaml: line 7" in str(err)


def test_missing_measure():
    err = _error(VALID.replace("    measure: 1\n  - feedforward", "  - feedforward"))
    assert err.field == "rounds[0]"
    assert "measure" in str(err)


def test_future_outcome_reference_cites_round():
    err = _error(VALID.replace("coefficients: [[0.5, 0.0]]", "coefficients: [[0.5, 0.0], 1.0]"))
    assert err.field == "rounds[1]"
    assert err.line == 10


def test_bad_integer():
    err = _error(VALID.replace("modes: 1\n", "modes: one\n", 1))
    assert err.field == "modes" and err.line == 3


def test_unknown_field():
    err = _error(VALID.replace("name: demo", "nmae: demo"))
    assert err.field == "nmae"


def test_gate_mode_out_of_range():
    err = _error(VALID.replace("modes: [1], param", "modes: [2], param"))
    assert err.field == "rounds[0].gates[1]"


def test_decision_length_mismatch():
    err = _error(VALID.replace("coefficients: [1.0, -1.0]", "coefficients: [1.0]"))
    assert err.field == "decision"


def test_bad_binned_labels():
    err = _error(VALID.replace("labels: [1, 0]", "labels: [1, 0, 1]"))
    assert err.field == "decision"


def test_unsupported_version():
    err = _error(VALID.replace("version: 1", "version: 2"))
    assert err.field == "version" and err.line == 1


def test_malformed_yaml():
    err = _error("modes: [1,\n")
    assert "malformed YAML" in str(err)


def test_empty_file():
    err = _error("")
    assert err.line == 1
