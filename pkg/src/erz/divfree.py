"""Division-free compilation of rational-activation networks.

A source node nu with fan-in mu_1..mu_M computes phi(t), t = sum_i a_i u_i/v_i,
where (u_i, v_i) is the numerator/denominator pair already built for mu_i.
With Y = prod v_i, Z_i = prod_{j != i} v_j and S = sum_i a_i Z_i u_i we have
t = S/Y, so for phi = p/q of degree d

    P = sum_k b_k Y^(d-k) S^k,    Q = sum_k c_k Y^(d-k) S^k,    P/Q = phi(t).

Everything except the weighted sum S is a product, and products are built from
squares: xy = ((x+y)^2 - x^2 - y^2)/2.  The compiled network therefore uses
the activation t^2 plus identity ("linear") nodes, which hold the affine sums
P, Q, S and the materialized products.

The source edge parameters a_i appear unchanged as the weights of the edges
into S; every other weight is a fixed constant (1/2, -1/2, b_k, c_k, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ArityMismatch, CharacteristicTwo, MixedField, NotRationalActivation
from .field import FieldSpec
from .network import CONST, Activation, Evaluator, Instantiation, NetworkSpec, NodeId, Undefined, edge_key

# Size/depth constant for compiled networks; reproduced by calibrate_c_eff().
C_EFF = Fraction(8)

ONE = {0: 1}


def _scalar(form):
    """The constant value of a form with no node terms, else None."""
    if all(h == 0 for h in form):
        return form.get(0, 0)
    return None


class CircuitBuilder:
    """Incrementally builds a squaring network.

    Handles are integers: 0 is the constant node, 1..n the inputs, larger
    handles are created nodes.  A *form* is ``{handle: constant}`` standing
    for an affine combination that has not been given its own node.
    """

    def __init__(self, fld, num_inputs, variant=0):
        if fld.characteristic == 2:
            raise CharacteristicTwo("the squaring product needs 1/2")
        self.field = fld
        self.num_inputs = num_inputs
        self.variant = variant
        self.half = fld.inv(fld.normalize(2))
        self.neg_half = fld.normalize(-self.half)
        self.kinds = []
        self.fans = []
        self.depths = [0] * (num_inputs + 1)

    def handle_count(self):
        return len(self.depths)

    def _new(self, kind, fan):
        depth = 1 + max((self.depths[h] for h, _ in fan), default=0)
        self.kinds.append(kind)
        self.fans.append(fan)
        self.depths.append(depth)
        return len(self.depths) - 1

    def _const_fan(self, form):
        norm = self.field.normalize
        return [(h, ("c", norm(c))) for h, c in form.items()]

    def square(self, form):
        return self._new("square", self._const_fan(form))

    def linear(self, form):
        return self._new("linear", self._const_fan(form))

    def weighted_sum(self, terms):
        """Linear node over ``[(handle, weight)]`` with arbitrary weight tags."""
        handles = [h for h, _ in terms]
        if len(set(handles)) != len(handles):
            raise ValueError("weighted sum over repeated handles")
        return self._new("linear", list(terms))

    def materialize(self, form):
        if len(form) == 1:
            (h, c), = form.items()
            if c == 1:
                return h
        return self.linear(form)

    def add(self, a, b, sign=1):
        norm = self.field.normalize
        out = dict(a)
        for h, c in b.items():
            v = norm(out.get(h, 0) + sign * c)
            if v:
                out[h] = v
            else:
                out.pop(h, None)
        return out

    def scale(self, form, c):
        norm = self.field.normalize
        c = norm(c)
        if not c:
            return {}
        return {h: norm(v * c) for h, v in form.items()}

    def product(self, a, b):
        """Form equal to a*b; scalar factors cost nothing, a*a costs one square."""
        ca, cb = _scalar(a), _scalar(b)
        if ca is not None:
            return self.scale(b, ca)
        if cb is not None:
            return self.scale(a, cb)
        if a == b:
            return {self.square(a): 1}
        if self.variant:
            a, b = b, a
        sa = self.square(a)
        sb = self.square(b)
        sab = self.square(self.add(a, b))
        return {sab: self.half, sa: self.neg_half, sb: self.neg_half}

    def gadget(self, a, b):
        """Product as a materialized node: three squares and one linear node."""
        if self.variant:
            a, b = b, a
        sa = self.square(a)
        sb = self.square(b)
        sab = self.square(self.add(a, b))
        return self.linear({sab: self.half, sa: self.neg_half, sb: self.neg_half})

    def power_table(self, base, exponents):
        """Forms base^k for the requested k via square-and-multiply."""
        table = {0: dict(ONE), 1: base}

        def get(k):
            if k not in table:
                half = get(k // 2)
                sq = self.product(half, half)
                table[k] = sq if k % 2 == 0 else self.product(sq, base)
            return table[k]

        for k in sorted(exponents):
            get(k)
        return table

    def all_but_one(self, dens):
        """Full product Y and the products Z_i omitting one factor each.

        Balanced splitting keeps the depth logarithmic in len(dens).
        """
        if len(dens) == 1:
            return dens[0], [dict(ONE)]
        mid = (len(dens) + 1) // 2
        yl, zl = self.all_but_one(dens[:mid])
        yr, zr = self.all_but_one(dens[mid:])
        y = self.product(yl, yr)
        z = [self.product(f, yr) for f in zl] + [self.product(f, yl) for f in zr]
        return y, z

    def rational_node(self, act, pairs, weights):
        """Numerator and denominator handles for one source node.

        ``pairs`` lists the (num, den) handles of the fan-in, ``weights`` the
        matching weight tags for the edges into S.
        """
        order = list(range(len(pairs)))
        if self.variant:
            order.reverse()
        d = act.degree
        b = list(act.num) + [0] * (d + 1 - len(act.num))
        c = list(act.den) + [0] * (d + 1 - len(act.den))
        if pairs:
            dens = [{pairs[i][1]: 1} for i in order]
            y, zs = self.all_but_one(dens)
            terms = []
            for z, i in zip(zs, order):
                w = self.product(z, {pairs[i][0]: 1})
                terms.append((self.materialize(w), weights[i]))
            s = {self.weighted_sum(terms): 1}
        else:
            y, s = dict(ONE), {}
        needed = [k for k in range(d + 1) if b[k] or c[k]]
        spow = self.power_table(s, [k for k in needed if k > 0])
        ypow = self.power_table(y, [d - k for k in needed if k < d])
        p_form, q_form = {}, {}
        for k in needed:
            t = self.product(ypow[d - k], spow[k])
            p_form = self.add(p_form, self.scale(t, b[k]))
            q_form = self.add(q_form, self.scale(t, c[k]))
        return self.linear(p_form), self.linear(q_form)

    def compile_network(self, spec, tag=0):
        """Numerator/denominator handle pairs for every node of ``spec``."""
        if spec.activation.kind != "rational":
            raise NotRationalActivation(f"activation kind is {spec.activation.kind!r}")
        if spec.field != self.field:
            raise MixedField(f"{spec.field} network in a {self.field} builder")
        if spec.num_inputs != self.num_inputs:
            raise ArityMismatch(f"{spec.num_inputs} inputs for a {self.num_inputs}-input builder")
        pairs = {CONST: (0, 0)}
        for j in range(1, spec.num_inputs + 1):
            pairs[NodeId(0, j)] = (j, 0)
        costs = {}
        for v in spec.nodes:
            fan = spec.fan_in[v]
            before = self.handle_count()
            base = max((self.depths[h] for mu in fan for h in pairs[mu]), default=0)
            pairs[v] = self.rational_node(
                spec.activation,
                [pairs[mu] for mu in fan],
                [("p", tag, (v, mu)) for mu in fan],
            )
            costs[v] = (self.handle_count() - before, max(self.depths[h] for h in pairs[v]) - base)
        return pairs, costs

    def build(self, outputs):
        """Lay the created nodes out by depth and return the network pieces."""
        n = self.num_inputs
        ids = {h: NodeId(0, h) for h in range(n + 1)}
        widths = {}
        for h in range(n + 1, self.handle_count()):
            dep = self.depths[h]
            widths[dep] = widths.get(dep, 0) + 1
            ids[h] = NodeId(dep, widths[dep])
        depth = max(widths)
        layers = [n + 1] + [widths[i] for i in range(1, depth + 1)]
        fan_in = {}
        linear = set()
        constants = {}
        param_map = {}
        for k, (kind, fan) in enumerate(zip(self.kinds, self.fans)):
            h = n + 1 + k
            v = ids[h]
            if kind == "linear":
                linear.add(v)
            fan_in[v] = tuple(ids[g] for g, _ in fan)
            for g, w in fan:
                edge = (v, ids[g])
                if w[0] == "c":
                    constants[edge] = w[1]
                else:
                    param_map[edge] = (w[1], w[2])
        spec = NetworkSpec(
            field=self.field,
            num_inputs=n,
            activation=Activation.square(self.field),
            layers=tuple(layers),
            fan_in=fan_in,
            outputs=tuple(ids[h] for h in outputs),
            linear=frozenset(linear),
        )
        return spec, ids, constants, param_map


def _instantiate(spec, constants, param_map, insts):
    values = dict(constants)
    for edge, (tag, src) in param_map.items():
        values[edge] = insts[tag].values[src]
    return Instantiation(spec, values)


def gadget_product(fld, variant=0):
    """Two-input network whose single output is x1*x2 (depth 2, size 4)."""
    b = CircuitBuilder(fld, 2, variant)
    out = b.gadget({1: 1}, {2: 1})
    spec, _, constants, _ = b.build([out])
    return spec, Instantiation(spec, constants)


def _ceil_log2(x):
    return math.ceil(math.log2(x)) if x > 1 else 0


def depth_core(depth, d, S):
    return depth * (_ceil_log2(d) + _ceil_log2(S) + 1)


def size_core(size, d, S):
    return size * (d + S)


@dataclass
class DivFreeResult:
    source: NetworkSpec
    compiled: NetworkSpec
    pairing: dict
    constants: dict
    param_map: dict
    node_costs: dict
    metrics: dict

    def instantiate(self, inst):
        """Compiled instantiation induced by a source instantiation."""
        return _instantiate(self.compiled, self.constants, self.param_map, {0: inst})

    def to_json(self):
        fmt = self.compiled.field.format_value
        obj = self.compiled.to_json()
        obj["pairing"] = {str(v): [str(a), str(b)] for v, (a, b) in self.pairing.items()}
        obj["constants"] = {edge_key(e): fmt(c) for e, c in self.constants.items()}
        obj["param_map"] = {edge_key(e): edge_key(src) for e, (_, src) in self.param_map.items()}
        obj["metrics"] = self.metrics
        return obj


def _metrics(source, compiled, c_eff=C_EFF):
    d = source.activation.degree
    S = max(source.space, 1)
    L, ell = source.size, source.depth
    size_bound = c_eff * size_core(L, d, S)
    depth_bound = c_eff * depth_core(ell, d, S)
    return {
        "source": {"L": L, "S": source.space, "depth": ell, "N": source.num_edges, "d": d},
        "size": compiled.size,
        "depth": compiled.depth,
        "space": compiled.space,
        "edges": compiled.num_edges,
        "c_eff": str(c_eff),
        "size_bound": str(size_bound),
        "depth_bound": str(depth_bound),
        "size_ratio": str(Fraction(compiled.size, size_core(L, d, S))),
        "depth_ratio": str(Fraction(compiled.depth, depth_core(ell, d, S))),
        "size_ok": compiled.size <= size_bound,
        "depth_ok": compiled.depth <= depth_bound,
    }


def compile_divfree(spec, variant=0):
    """Compile a rational-activation network into a squaring network.

    Outputs of the compiled network are the (numerator, denominator) nodes of
    each source output, in order.  ``variant=1`` builds an equivalent network
    with mirrored operand order.
    """
    if spec.activation.kind != "rational":
        raise NotRationalActivation(f"activation kind is {spec.activation.kind!r}")
    b = CircuitBuilder(spec.field, spec.num_inputs, variant)
    pairs, costs = b.compile_network(spec)
    outs = [h for o in spec.outputs for h in pairs[o]]
    compiled, ids, constants, param_map = b.build(outs)
    pairing = {v: (ids[p], ids[q]) for v, (p, q) in pairs.items()}
    return DivFreeResult(
        source=spec,
        compiled=compiled,
        pairing=pairing,
        constants=constants,
        param_map=param_map,
        node_costs=costs,
        metrics=_metrics(spec, compiled),
    )


def calibration_activation(fld, d):
    """phi with every coefficient of p and q nonzero, the costliest case."""
    num = [1] * (d + 1)
    for base in range(2, 50):
        try:
            return Activation.rational(fld, num, [base**k for k in range(d + 1)])
        except ValueError:
            continue
    raise ValueError(f"no coprime calibration activation over {fld}")


def calibration_shape(fld, M, d):
    """Two-level network whose top node has M fan-ins, all non-input nodes."""
    return NetworkSpec(
        field=fld,
        num_inputs=M,
        activation=calibration_activation(fld, d),
        layers=(M + 1, M, 1),
        fan_in={**{NodeId(1, j): (NodeId(0, j),) for j in range(1, M + 1)},
                NodeId(2, 1): tuple(NodeId(1, j) for j in range(1, M + 1))},
        outputs=(NodeId(2, 1),),
    )


def calibrate_c_eff(max_space=4, max_degree=3, fld=None):
    """Worst per-node size and depth ratios over all fan-in sizes and degrees.

    Returns ``(c_eff, table)`` where ``table[(M, d)] = (size, depth_inc)``.
    """
    fld = fld or FieldSpec(2147483647)
    worst = Fraction(0)
    table = {}
    for M in range(1, max_space + 1):
        for d in range(1, max_degree + 1):
            res = compile_divfree(calibration_shape(fld, M, d))
            f, g = res.node_costs[NodeId(2, 1)]
            table[(M, d)] = (f, g)
            worst = max(worst, Fraction(f, d + M), Fraction(g, _ceil_log2(d) + _ceil_log2(M) + 1))
    return worst, table


def check_pair(result, inst, point, comp_eval=None, src_eval=None):
    """Compare compiled pairs against direct evaluation at one point.

    Returns ``(ok, defined)``.  For a defined source output, ok means
    num/den equals the value with den != 0.  For an undefined one, ok means
    the compiled denominator of the first offending node is zero.
    """
    fld = result.source.field
    src_eval = src_eval or Evaluator(result.source, inst)
    comp_eval = comp_eval or Evaluator(result.compiled, result.instantiate(inst))
    sv = src_eval.run(point)
    cv = comp_eval.run(point)
    if any(isinstance(x, Undefined) for x in cv):
        return False, None
    cidx = comp_eval.index
    ok = True
    defined = True
    for o in result.source.outputs:
        val = sv[src_eval.index[o]]
        pn, pd = result.pairing[o]
        num, den = cv[cidx[pn]], cv[cidx[pd]]
        if isinstance(val, Undefined):
            defined = False
            bad = result.pairing[val.node][1]
            ok = ok and not cv[cidx[bad]]
        else:
            ok = ok and bool(den) and fld.div(num, den) == val
    return ok, defined


def random_rational_activation(rng, fld, d):
    while True:
        num = [int(rng.integers(0, 5)) - 2 for _ in range(d + 1)]
        den = [int(rng.integers(0, 5)) - 2 for _ in range(d + 1)]
        try:
            act = Activation.rational(fld, num, den)
        except ValueError:
            continue
        if act.degree == d:
            return act


def random_rational_network(rng, fld, max_depth=4, max_size=12, max_space=4, max_degree=3, max_inputs=3):
    """Random layered rational network within the given shape envelope."""
    n = int(rng.integers(1, max_inputs + 1))
    ell = int(rng.integers(1, max_depth + 1))
    size = int(rng.integers(ell, max_size + 1))
    widths = [1] * ell
    for _ in range(size - ell):
        widths[int(rng.integers(0, ell))] += 1
    layers = [n + 1] + widths
    fan_in = {}
    earlier = [NodeId(0, j) for j in range(n + 1)]
    for i in range(1, ell + 1):
        prev = [v for v in earlier if v.depth == i - 1]
        for j in range(1, widths[i - 1] + 1):
            k = int(rng.integers(1, min(max_space, len(earlier)) + 1))
            first = prev[int(rng.integers(0, len(prev)))]
            rest = [v for v in earlier if v != first]
            picks = rng.choice(len(rest), size=k - 1, replace=False) if k > 1 else []
            fan = [first] + [rest[int(t)] for t in picks]
            fan.sort()
            fan_in[NodeId(i, j)] = tuple(fan)
        earlier += [NodeId(i, j) for j in range(1, widths[i - 1] + 1)]
    consumed = {mu for fan in fan_in.values() for mu in fan}
    outputs = [v for v in earlier if v.depth > 0 and v not in consumed]
    d = int(rng.integers(1, max_degree + 1))
    return NetworkSpec(
        field=fld,
        num_inputs=n,
        activation=random_rational_activation(rng, fld, d),
        layers=tuple(layers),
        fan_in=fan_in,
        outputs=tuple(outputs),
    )


@dataclass
class IdentityTarget:
    """Squaring network whose single output vanishes where an identity holds.

    ``single``: numerator times denominator of one network.
    ``pair``: (n1*d2 - n2*d1)*(d1*d2) for two networks.
    """

    network: NetworkSpec
    provenance: str
    degree_bound: int
    sources: tuple
    constants: dict
    param_map: dict
    den_nodes: tuple
    insts: tuple | None = None

    @property
    def field(self):
        return self.network.field

    @property
    def num_vars(self):
        return self.network.num_inputs

    def instantiate(self, insts=None):
        insts = insts if insts is not None else self.insts
        if insts is None:
            raise ValueError("identity target has no source instantiations")
        return _instantiate(self.network, self.constants, self.param_map, dict(enumerate(insts)))

    def evaluator(self, insts=None):
        return TargetEvaluator(self, self.instantiate(insts))

    def to_json(self):
        obj = self.network.to_json()
        obj["provenance"] = self.provenance
        obj["degree_bound"] = self.degree_bound
        return obj


class TargetEvaluator:
    def __init__(self, target, inst):
        self.target = target
        self.ev = Evaluator(target.network, inst)
        self.out = self.ev.index[target.network.outputs[0]]
        self.dens = [self.ev.index[v] for v in target.den_nodes]

    def value(self, point):
        """Target value, or None when some compiled denominator vanishes."""
        vals = self.ev.run(point)
        if any(not vals[i] for i in self.dens):
            return None
        return vals[self.out]


def _degree_bound(spec):
    d = spec.activation.degree
    return (d * max(spec.space, 1)) ** spec.depth


def compile_identity_targets(specs, insts=None, variants=None):
    """Identity-test target for one network (single) or two networks (pair)."""
    specs = tuple(specs)
    if len(specs) not in (1, 2):
        raise ValueError("identity targets take one or two networks")
    for s in specs:
        if len(s.outputs) != 1:
            raise ArityMismatch("identity targets need single-output networks")
    fld, n = specs[0].field, specs[0].num_inputs
    for s in specs[1:]:
        if s.field != fld:
            raise MixedField(f"{s.field} vs {fld}")
        if s.num_inputs != n:
            raise ArityMismatch(f"{s.num_inputs} vs {n} inputs")
    variants = tuple(variants) if variants is not None else (0,) * len(specs)
    b = CircuitBuilder(fld, n)
    outs, dens = [], []
    for tag, (s, var) in enumerate(zip(specs, variants)):
        b.variant = var
        pairs, _ = b.compile_network(s, tag)
        outs.append(pairs[s.outputs[0]])
        dens.extend(q for v, (_, q) in pairs.items() if v.depth > 0)
    b.variant = 0
    if len(specs) == 1:
        (p, q), = outs
        out = b.gadget({p: 1}, {q: 1})
        provenance, bound = "single", 2 * _degree_bound(specs[0])
    else:
        (n1, d1), (n2, d2) = outs
        cross = b.add(b.product({n1: 1}, {d2: 1}), b.product({n2: 1}, {d1: 1}), -1)
        out = b.linear(b.product(cross, b.product({d1: 1}, {d2: 1})))
        provenance, bound = "pair", 4 * max(_degree_bound(s) for s in specs)
    spec, ids, constants, param_map = b.build([out])
    return IdentityTarget(
        network=spec,
        provenance=provenance,
        degree_bound=bound,
        sources=specs,
        constants=constants,
        param_map=param_map,
        den_nodes=tuple(ids[h] for h in dens),
        insts=tuple(insts) if insts is not None else None,
    )
