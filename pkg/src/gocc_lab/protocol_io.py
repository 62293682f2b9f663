"""Reading and writing GOCC protocol files (YAML, see docs/protocol_schema.md)."""
from importlib import resources

import yaml

from .gaussian_core import Gate, SymplecticCircuit, GATE_KINDS
from .gocc_sim import DecisionRule, FeedForward, GoccProtocol, ProtocolError, Round

SCHEMA_VERSION = 1


class ProtocolParseError(ValueError):
    def __init__(self, message, field=None, line=None, source=None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)
        self.field = field
        self.line = line


class _Node:
    """Parsed YAML value together with its path and 1-based line."""

    def __init__(self, node, path, source):
        self.node = node
        self.path = path
        self.source = source
        self.line = node.start_mark.line + 1

    def fail(self, message):
        raise ProtocolParseError(message, self.path, self.line, self.source)

    def mapping(self):
        if not isinstance(self.node, yaml.MappingNode):
            self.fail("expected a mapping")
        return {k.value: _Node(v, f"{self.path}.{k.value}" if self.path else k.value, self.source)
                for k, v in self.node.value}

    def sequence(self):
        if not isinstance(self.node, yaml.SequenceNode):
            self.fail("expected a list")
        return [_Node(v, f"{self.path}[{i}]", self.source) for i, v in enumerate(self.node.value)]

    def scalar(self):
        if not isinstance(self.node, yaml.ScalarNode):
            self.fail("expected a scalar")
        return yaml.safe_load(self.node.value) if self.node.value != "" else None

    def integer(self, minimum=None):
        v = self.scalar()
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(f"must be >= {minimum}, got {v}")
        return v

    def real(self):
        v = self.scalar()
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"expected a number, got {v!r}")
        return float(v)

    def complex(self):
        if isinstance(self.node, yaml.SequenceNode):
            parts = self.sequence()
            if len(parts) != 2:
                self.fail("complex numbers are written [re, im]")
            return complex(parts[0].real(), parts[1].real())
        v = self.scalar()
        if isinstance(v, bool):
            self.fail(f"expected a number, got {v!r}")
        try:
            return complex(str(v).replace(" ", "")) if isinstance(v, str) else complex(v)
        except (TypeError, ValueError):
            self.fail(f"expected a number, got {v!r}")


def _require(fields, key, parent):
    if key not in fields:
        parent.fail(f"missing required field '{key}'")
    return fields[key]


def _known(fields, allowed, parent):
    for key, node in fields.items():
        if key not in allowed:
            node.fail(f"unknown field (allowed: {', '.join(sorted(allowed))})")


def _gate(node):
    f = node.mapping()
    _known(f, {"type", "modes", "param"}, node)
    kind = _require(f, "type", node).scalar()
    if kind not in GATE_KINDS:
        f["type"].fail(f"unknown gate type {kind!r} (allowed: {', '.join(GATE_KINDS)})")
    modes = [m.integer(minimum=0) for m in _require(f, "modes", node).sequence()]
    param_node = _require(f, "param", node)
    param = param_node.complex() if kind == "displace" else param_node.real()
    try:
        return Gate(kind, tuple(modes), param)
    except ValueError as exc:
        node.fail(str(exc))


def _round(node, live):
    f = node.mapping()
    _known(f, {"ancillas", "gates", "feedforward", "measure"}, node)
    ancillas = f["ancillas"].integer(minimum=0) if "ancillas" in f else 0
    width = live + ancillas
    gates = [_gate(g) for g in f["gates"].sequence()] if "gates" in f else []
    for g, gnode in zip(gates, f["gates"].sequence() if "gates" in f else []):
        if max(g.modes) >= width:
            gnode.fail(f"gate touches mode {max(g.modes)} but only {width} modes are present")
    ffs = []
    for ff in f["feedforward"].sequence() if "feedforward" in f else []:
        g = ff.mapping()
        _known(g, {"target_mode", "offset", "coefficients"}, ff)
        target = _require(g, "target_mode", ff).integer(minimum=0)
        offset = g["offset"].complex() if "offset" in g else 0j
        coeffs = [c.complex() for c in g["coefficients"].sequence()] if "coefficients" in g else []
        ffs.append(FeedForward(target, offset, tuple(coeffs)))
    measure = _require(f, "measure", node).integer(minimum=1)
    return Round(ancillas, SymplecticCircuit(width, tuple(gates)), measure, tuple(ffs)), width - measure


def _decision(node):
    f = node.mapping()
    _known(f, {"type", "coefficients", "threshold", "edges", "labels"}, node)
    kind = _require(f, "type", node).scalar()
    if kind not in ("sign", "binned"):
        f["type"].fail(f"unknown decision type {kind!r} (allowed: binned, sign)")
    coeffs = [c.real() for c in _require(f, "coefficients", node).sequence()]
    threshold = f["threshold"].real() if "threshold" in f else 0.0
    edges = [e.real() for e in f["edges"].sequence()] if "edges" in f else []
    labels = [v.integer(minimum=0) for v in f["labels"].sequence()] if "labels" in f else []
    try:
        return DecisionRule(kind, tuple(coeffs), threshold, tuple(edges), tuple(labels))
    except ProtocolError as exc:
        node.fail(str(exc))


def parse_protocol(text, source=None):
    """Build a :class:`GoccProtocol` from YAML text; errors cite field and line."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ProtocolParseError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                                 line=None if mark is None else mark.line + 1, source=source) from exc
    if root is None:
        raise ProtocolParseError("empty protocol file", line=1, source=source)
    top = _Node(root, "", source)
    f = top.mapping()
    _known(f, {"version", "name", "modes", "rounds", "decision"}, top)
    if "version" in f and f["version"].integer() != SCHEMA_VERSION:
        f["version"].fail(f"unsupported schema version (this reader understands {SCHEMA_VERSION})")
    modes = _require(f, "modes", top).integer(minimum=1)
    rounds_node = _require(f, "rounds", top)
    rounds, live = [], modes
    for rnode in rounds_node.sequence():
        rnd, live = _round(rnode, live)
        if live < 0:
            rnode.fail("measures more modes than are present")
        rounds.append((rnd, rnode))
    decision = _decision(_require(f, "decision", top))
    name = str(f["name"].scalar()) if "name" in f else ""
    try:
        return GoccProtocol(modes, tuple(r for r, _ in rounds), decision, name=name)
    except ProtocolError as exc:
        msg = str(exc)
        if msg.startswith("round "):
            idx = int(msg.split(":")[0].split()[1])
            rounds[idx][1].fail(msg.split(": ", 1)[1])
        if "decision" in msg:
            f["decision"].fail(msg)
        rounds_node.fail(msg)


def load_protocol(path):
    with open(path, encoding="utf-8") as fh:
        return parse_protocol(fh.read(), source=str(path))


def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


def protocol_to_dict(p):
    rounds = []
    for rnd in p.rounds:
        rounds.append({
            "ancillas": rnd.ancillas,
            "gates": [{"type": g.kind, "modes": list(g.modes),
                       "param": _cplx(g.param) if g.kind == "displace" else float(complex(g.param).real)}
                      for g in rnd.circuit.gates],
            "feedforward": [{"target_mode": ff.target_mode, "offset": _cplx(ff.offset),
                             "coefficients": [_cplx(c) for c in ff.coefficients]}
                            for ff in rnd.feedforward],
            "measure": rnd.measure,
        })
    d = p.decision
    decision = {"type": d.kind, "coefficients": list(d.coefficients), "threshold": d.threshold}
    if d.kind == "binned":
        decision.update(edges=list(d.edges), labels=list(d.labels))
    out = {"version": SCHEMA_VERSION, "modes": p.n_modes, "rounds": rounds, "decision": decision}
    if p.name:
        out = {"name": p.name, **out}
    return out


def dump_protocol(p):
    return yaml.safe_dump(protocol_to_dict(p), sort_keys=False)


def builtin_protocol(name):
    """Load one of the protocol files shipped with the package, e.g. ``"homodyne_sign"``."""
    text = resources.files("gocc_lab").joinpath("protocols", f"{name}.yaml").read_text()
    return parse_protocol(text, source=f"<builtin {name}>")
