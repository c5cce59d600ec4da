"""Layered networks over a field: syntax, evaluation and polynomial expansion.

Node ``(0, 0)`` is the constant 1 and ``(0, j)`` is the input x_j.  Every other
node ``(i, j)`` (``1 <= j <= L_i``) applies the network's activation to the
affine combination of its fan-in weighted by the edge parameters.  Nodes in
``linear`` use the identity instead; compiled squaring networks need them to
expose sums of squares as node values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import NamedTuple

from .errors import (
    ArityMismatch,
    BadFanInDepth,
    BudgetExceeded,
    DanglingEdge,
    EmptyOutputs,
    NetworkError,
    ParseError,
    RationalActivationNotExpandable,
)
from .field import FieldElement, FieldSpec
from .polynomial import SparsePoly


class NodeId(NamedTuple):
    depth: int
    index: int

    def __str__(self):
        return f"{self.depth}.{self.index}"

    @classmethod
    def parse(cls, text):
        try:
            a, b = str(text).split(".")
            return cls(int(a), int(b))
        except ValueError:
            raise ParseError(f"bad node id {text!r}") from None


CONST = NodeId(0, 0)


def edge_key(edge):
    child, parent = edge
    return f"{child}<-{parent}"


def parse_edge_key(text):
    try:
        child, parent = str(text).split("<-")
    except ValueError:
        raise ParseError(f"bad edge key {text!r}") from None
    return NodeId.parse(child), NodeId.parse(parent)


# univariate helpers on ascending coefficient tuples of raw values

def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return tuple(coeffs)


def _uhorner(coeffs, t, p):
    r = 0
    if p is None:
        for c in reversed(coeffs):
            r = r * t + c
        return r
    for c in reversed(coeffs):
        r = (r * t + c) % p
    return r


def _udivmod(a, b, fld):
    a = list(a)
    q = [fld.zero] * max(len(a) - len(b) + 1, 0)
    inv_lead = fld.inv(b[-1])
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        factor = fld.normalize(a[-1] * inv_lead)
        q[shift] = factor
        for i, c in enumerate(b):
            a[i + shift] = fld.normalize(a[i + shift] - factor * c)
        a = list(_trim(a))
    return _trim(q), _trim(a)


def univariate_gcd(a, b, fld):
    """Monic gcd of two coefficient tuples by the Euclidean algorithm."""
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _udivmod(a, b, fld)
        a, b = b, r
    if not a:
        return ()
    inv = fld.inv(a[-1])
    return tuple(fld.normalize(c * inv) for c in a)


@dataclass(frozen=True)
class Activation:
    """phi = num/den with ascending coefficient tuples of raw field values."""

    kind: str
    num: tuple
    den: tuple

    @classmethod
    def square(cls, fld):
        return cls("square", (fld.zero, fld.zero, fld.one), (fld.one,))

    @classmethod
    def polynomial(cls, fld, coeffs):
        num = _trim(fld.normalize(c) for c in coeffs)
        if len(num) < 2:
            raise ValueError("activation polynomial must have degree >= 1")
        return cls("polynomial", num, (fld.one,))

    @classmethod
    def rational(cls, fld, num, den):
        num = _trim(fld.normalize(c) for c in num)
        den = _trim(fld.normalize(c) for c in den)
        if not den:
            raise ValueError("activation denominator is identically zero")
        if max(len(num), len(den)) < 2:
            raise ValueError("activation degree must be >= 1")
        g = univariate_gcd(num, den, fld) if num else _trim(den)
        if len(g) > 1:
            raise ValueError("activation numerator and denominator are not coprime")
        return cls("rational", num, den)

    @property
    def degree(self):
        return max(len(self.num), len(self.den)) - 1

    def apply_raw(self, t, fld):
        """phi(t) as a raw value, or None where the denominator vanishes."""
        p = fld.prime
        if self.kind == "square":
            return t * t % p if p is not None else t * t
        n = _uhorner(self.num, t, p)
        if self.kind == "polynomial":
            return n
        d = _uhorner(self.den, t, p)
        if not d:
            return None
        return fld.div(n, d)

    def apply_poly(self, s):
        if self.kind == "square":
            return s * s
        if self.kind == "rational":
            raise RationalActivationNotExpandable("rational activations have no polynomial expansion")
        r = SparsePoly.zero(s.field, s.num_vars)
        for c in reversed(self.num):
            r = r * s + c
        return r

    def to_json(self, fld):
        fmt = fld.format_value
        if self.kind == "square":
            return {"kind": "square"}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coeffs": [fmt(c) for c in self.num]}
        return {"kind": "rational", "num": [fmt(c) for c in self.num], "den": [fmt(c) for c in self.den]}

    @classmethod
    def from_json(cls, obj, fld):
        kind = obj.get("kind")
        if kind == "square":
            return cls.square(fld)
        if kind == "polynomial":
            return cls.polynomial(fld, [fld.parse_value(c) for c in obj["coeffs"]])
        if kind == "rational":
            return cls.rational(fld, [fld.parse_value(c) for c in obj["num"]],
                                [fld.parse_value(c) for c in obj["den"]])
        raise ParseError(f"unknown activation kind {kind!r}")


@dataclass(frozen=True, eq=True)
class NetworkSpec:
    field: FieldSpec
    num_inputs: int
    activation: Activation
    layers: tuple
    fan_in: dict
    outputs: tuple
    linear: frozenset = dc_field(default_factory=frozenset)

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(int(w) for w in self.layers))
        fan = {NodeId(*k): tuple(NodeId(*p) for p in v) for k, v in self.fan_in.items()}
        object.__setattr__(self, "outputs", tuple(NodeId(*o) for o in self.outputs))
        object.__setattr__(self, "linear", frozenset(NodeId(*o) for o in self.linear))
        self._check_shape(fan)
        ordered = {v: fan.get(v, ()) for v in self.nodes}
        object.__setattr__(self, "fan_in", ordered)
        self._check_edges()

    # structure

    def _check_shape(self, fan):
        if self.num_inputs < 0:
            raise NetworkError("negative input count")
        if len(self.layers) < 2:
            raise NetworkError("a network needs at least one non-input layer")
        if self.layers[0] != self.num_inputs + 1:
            raise NetworkError(f"layer 0 must have {self.num_inputs + 1} nodes, got {self.layers[0]}")
        if any(w < 1 for w in self.layers[1:]):
            raise NetworkError("every non-input layer needs at least one node")
        for v in fan:
            if not self.has_node(v) or v.depth == 0:
                raise DanglingEdge(f"fan-in given for unknown node {v}")
        for v in self.linear:
            if not self.has_node(v) or v.depth == 0:
                raise DanglingEdge(f"linear mark on unknown node {v}")

    def _check_edges(self):
        for v, parents in self.fan_in.items():
            if len(set(parents)) != len(parents):
                raise NetworkError(f"duplicate edge into {v}")
            for mu in parents:
                if not self.has_node(mu):
                    raise DanglingEdge(f"edge {mu} -> {v} references an unknown node")
                if mu.depth >= v.depth:
                    raise BadFanInDepth(f"fan-in {mu} of {v} is not shallower than {v}")
        if not self.outputs:
            raise EmptyOutputs("network has no outputs")
        if len(set(self.outputs)) != len(self.outputs):
            raise NetworkError("duplicate output node")
        consumed = {mu for parents in self.fan_in.values() for mu in parents}
        for o in self.outputs:
            if not self.has_node(o) or o.depth == 0:
                raise DanglingEdge(f"output {o} is not a non-input node")
            if o in consumed:
                raise NetworkError(f"output {o} has nonempty fan-out")

    def has_node(self, v):
        if v.depth < 0 or v.depth >= len(self.layers):
            return False
        if v.depth == 0:
            return 0 <= v.index <= self.num_inputs
        return 1 <= v.index <= self.layers[v.depth]

    @property
    def depth(self):
        return len(self.layers) - 1

    @property
    def nodes(self):
        """Non-input nodes in (depth, index) order."""
        return [NodeId(i, j) for i in range(1, len(self.layers)) for j in range(1, self.layers[i] + 1)]

    @property
    def input_nodes(self):
        return [NodeId(0, j) for j in range(self.num_inputs + 1)]

    def edges(self):
        return [(v, mu) for v, parents in self.fan_in.items() for mu in parents]

    @property
    def size(self):
        return sum(self.layers[1:])

    @property
    def space(self):
        return max((len(p) for p in self.fan_in.values()), default=0)

    @property
    def num_edges(self):
        return sum(len(p) for p in self.fan_in.values())

    # serialization

    def to_json(self):
        obj = {
            "field": self.field.to_json(),
            "num_inputs": self.num_inputs,
            "activation": self.activation.to_json(self.field),
            "layers": list(self.layers),
            "fan_in": {str(v): [str(mu) for mu in parents] for v, parents in self.fan_in.items()},
            "outputs": [str(o) for o in self.outputs],
        }
        if self.linear:
            obj["linear"] = [str(v) for v in sorted(self.linear)]
        return obj

    @classmethod
    def from_json(cls, obj):
        try:
            fld = FieldSpec.from_json(obj["field"])
            return cls(
                field=fld,
                num_inputs=int(obj["num_inputs"]),
                activation=Activation.from_json(obj["activation"], fld),
                layers=tuple(obj["layers"]),
                fan_in={NodeId.parse(k): tuple(NodeId.parse(p) for p in v) for k, v in obj.get("fan_in", {}).items()},
                outputs=tuple(NodeId.parse(o) for o in obj["outputs"]),
                linear=frozenset(NodeId.parse(v) for v in obj.get("linear", ())),
            )
        except KeyError as exc:
            raise ParseError(f"network JSON missing key {exc}") from None

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class NetStats:
    L: int
    S: int
    depth: int
    N: int
    widths: tuple


def net_validate_stats(spec):
    """Size L, space S, depth, edge count N and layer widths."""
    # invariants are enforced at construction; re-run them for specs built by hand
    spec._check_shape(spec.fan_in)
    spec._check_edges()
    return NetStats(L=spec.size, S=spec.space, depth=spec.depth, N=spec.num_edges, widths=spec.layers)


class Instantiation:
    """One field value per edge ``(child, parent)`` of a network."""

    __slots__ = ("spec", "values")

    def __init__(self, spec, values):
        fld = spec.field
        edges = spec.edges()
        given = {(NodeId(*c), NodeId(*p)): v for (c, p), v in dict(values).items()}
        missing = [e for e in edges if e not in given]
        if missing or len(given) != len(edges):
            extra = set(given) - set(edges)
            raise DanglingEdge(
                f"instantiation does not cover the edge set (missing {len(missing)}, extra {len(extra)})")
        self.spec = spec
        self.values = {e: fld.normalize(given[e]) for e in edges}

    def __getitem__(self, edge):
        return FieldElement(self.spec.field, self.values[edge])

    def __eq__(self, other):
        return isinstance(other, Instantiation) and self.values == other.values

    @classmethod
    def random(cls, spec, rng, low=None, high=None):
        from ._random import randbelow

        fld = spec.field
        vals = {}
        for e in spec.edges():
            if fld.prime is not None and low is None:
                vals[e] = randbelow(rng, fld.prime)
            else:
                lo = -5 if low is None else low
                hi = 5 if high is None else high
                vals[e] = int(rng.integers(lo, hi + 1))
        return cls(spec, vals)

    def to_json(self):
        fmt = self.spec.field.format_value
        return {"params": {edge_key(e): fmt(v) for e, v in self.values.items()}}

    @classmethod
    def from_json(cls, spec, obj):
        params = obj.get("params", obj)
        fld = spec.field
        return cls(spec, {parse_edge_key(k): fld.parse_value(v) for k, v in params.items()})


@dataclass(frozen=True, order=True)
class Undefined:
    """Value of a node outside the domain; ``node`` is the least offending node."""

    node: NodeId

    def __str__(self):
        return f"undefined@{self.node}"


@dataclass(frozen=True)
class EvalTrace:
    values: dict
    outputs: tuple

    @property
    def defined(self):
        return not any(isinstance(v, Undefined) for v in self.outputs)

    @property
    def first_undefined(self):
        bad = [v.node for v in self.values.values() if isinstance(v, Undefined)]
        return min(bad) if bad else None


class Evaluator:
    """Evaluates one instantiated network at many points."""

    def __init__(self, spec, inst):
        if inst.spec is not spec and inst.spec != spec:
            raise NetworkError("instantiation belongs to a different network")
        self.spec = spec
        self.field = spec.field
        order = spec.input_nodes + spec.nodes
        self.order = order
        index = {v: i for i, v in enumerate(order)}
        self.index = index
        plan = []
        for v in spec.nodes:
            parents = spec.fan_in[v]
            plan.append((
                tuple(index[mu] for mu in parents),
                tuple(inst.values[(v, mu)] for mu in parents),
                v in spec.linear,
                v,
            ))
        self.plan = plan
        self.out_idx = tuple(index[o] for o in spec.outputs)

    def run(self, point):
        """Raw values (or :class:`Undefined`) for every node, in ``self.order``."""
        spec = self.spec
        if len(point) != spec.num_inputs:
            raise ArityMismatch(f"point of length {len(point)} for {spec.num_inputs} inputs")
        fld = self.field
        p = fld.prime
        act = spec.activation
        vals = [fld.one]
        vals.extend(point)
        square = act.kind == "square"
        for parents, weights, linear, node in self.plan:
            acc = 0
            bad = None
            for i, w in zip(parents, weights):
                x = vals[i]
                if type(x) is Undefined:
                    if bad is None or x.node < bad:
                        bad = x.node
                    continue
                acc += w * x
            if bad is not None:
                vals.append(Undefined(bad))
                continue
            if p is not None:
                acc %= p
            if linear:
                vals.append(acc if p is not None else Fraction(acc))
            elif square:
                vals.append(acc * acc % p if p is not None else Fraction(acc * acc))
            else:
                y = act.apply_raw(acc, fld)
                vals.append(Undefined(node) if y is None else y)
        return vals

    def outputs(self, point):
        vals = self.run(point)
        return tuple(vals[i] for i in self.out_idx)

    def trace(self, point):
        fld = self.field
        raw = tuple(fld.normalize(x) for x in point)
        vals = self.run(raw)
        wrapped = {}
        for v, x in zip(self.order, vals):
            wrapped[v] = x if isinstance(x, Undefined) else FieldElement(fld, x)
        return EvalTrace(values=wrapped, outputs=tuple(wrapped[o] for o in self.spec.outputs))


def net_eval(spec, inst, point):
    """Evaluate every node of ``spec`` under ``inst`` at ``point``."""
    return Evaluator(spec, inst).trace(point)


def expand_nodes(spec, inst=None, mode="in_inputs", max_edges=12, max_degree=64):
    """Polynomial of every node.

    ``in_inputs``: a :class:`SparsePoly` in x_1..x_n under the instantiation.
    ``in_parameters``: ``{theta: SparsePoly in the edge variables}`` where the
    edge variables follow ``spec.edges()`` order.
    """
    act = spec.activation
    if act.kind == "rational":
        raise RationalActivationNotExpandable(
            "rational networks are expanded through their division-free compilation")
    fld = spec.field
    n = spec.num_inputs
    if mode == "in_inputs":
        if inst is None:
            raise ValueError("in_inputs expansion needs an instantiation")
        nv = n
        weights = {e: SparsePoly.constant(fld, nv, v) for e, v in inst.values.items()}
        offset = 0
    elif mode == "in_parameters":
        edges = spec.edges()
        N = len(edges)
        if N > max_edges:
            raise BudgetExceeded(f"{N} edges exceed the symbolic budget of {max_edges}")
        if act.degree ** (spec.depth + 1) > max_degree:
            raise BudgetExceeded(f"d^(l+1) = {act.degree ** (spec.depth + 1)} exceeds {max_degree}")
        nv = N + n
        weights = {e: SparsePoly.variable(fld, nv, k + 1) for k, e in enumerate(edges)}
        offset = N
    else:
        raise ValueError(f"unknown expansion mode {mode!r}")
    values = {CONST: SparsePoly.constant(fld, nv, 1)}
    for j in range(1, n + 1):
        values[NodeId(0, j)] = SparsePoly.variable(fld, nv, offset + j)
    for v in spec.nodes:
        s = SparsePoly.zero(fld, nv)
        for mu in spec.fan_in[v]:
            s = s + weights[(v, mu)] * values[mu]
        values[v] = s if v in spec.linear else act.apply_poly(s)
    if mode == "in_inputs":
        return values
    return {v: split_coefficients(f, offset) for v, f in values.items()}


def split_coefficients(f, num_params):
    """Group a polynomial in (params, inputs) by input monomial."""
    groups = {}
    for exps, c in f.terms.items():
        groups.setdefault(exps[num_params:], {})[exps[:num_params]] = c
    return {theta: SparsePoly._raw(f.field, num_params, terms) for theta, terms in sorted(groups.items())}


def net_expand(spec, inst=None, mode="in_inputs", max_edges=12, max_degree=64):
    """Expansion of each output node (see :func:`expand_nodes`)."""
    values = expand_nodes(spec, inst, mode, max_edges=max_edges, max_degree=max_degree)
    return [values[o] for o in spec.outputs]


def load_network(path):
    with open(path) as fh:
        return NetworkSpec.from_json(json.load(fh))


def load_instantiation(spec, path):
    with open(path) as fh:
        return Instantiation.from_json(spec, json.load(fh))
