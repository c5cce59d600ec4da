import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from erz._random import stream
from erz.errors import (BadFanInDepth, BudgetExceeded, DanglingEdge, EmptyOutputs, NetworkError,
                        RationalActivationNotExpandable)
from erz.field import FieldSpec
from erz.network import (Activation, Instantiation, NetworkSpec, NodeId, Undefined, expand_nodes,
                         net_eval, net_expand, net_validate_stats)
from erz.polynomial import SparsePoly

from shapes import activation_of_degree, tiny_shapes

F5, F7 = FieldSpec(5), FieldSpec(7)
Q = FieldSpec.rationals()
C, X1, X2 = NodeId(0, 0), NodeId(0, 1), NodeId(0, 2)
N11, N12, N21 = NodeId(1, 1), NodeId(1, 2), NodeId(2, 1)


def ratio_net():
    act = Activation.rational(Q, [0, 1], [1, 1])
    spec = NetworkSpec(Q, 1, act, (2, 1), {N11: (C, X1)}, (N11,))
    return spec, Instantiation(spec, {(N11, C): 1, (N11, X1): 2})


def test_stats_examples():
    act = Activation.square(F7)
    one = NetworkSpec(F7, 1, act, (2, 1), {N11: (C, X1)}, (N11,))
    s = net_validate_stats(one)
    assert (s.L, s.S, s.depth, s.N) == (1, 2, 1, 2)
    chain = NetworkSpec(F7, 1, act, (2, 1, 1), {N11: (C, X1), N21: (N11,)}, (N21,))
    s = net_validate_stats(chain)
    assert (s.L, s.S, s.depth, s.N) == (2, 2, 2, 3)
    assert s.widths == (2, 1, 1)


def test_structural_errors():
    act = Activation.square(F7)
    with pytest.raises(BadFanInDepth):
        NetworkSpec(F7, 1, act, (2, 2), {N11: (N12,)}, (N11,))
    with pytest.raises(EmptyOutputs):
        NetworkSpec(F7, 1, act, (2, 1), {N11: (C,)}, ())
    with pytest.raises(DanglingEdge):
        NetworkSpec(F7, 1, act, (2, 1), {N11: (NodeId(0, 5),)}, (N11,))
    with pytest.raises(NetworkError):
        NetworkSpec(F7, 1, act, (2, 1, 1), {N11: (C,), N21: (N11,)}, (N11, N21))
    spec = NetworkSpec(F7, 1, act, (2, 1), {N11: (C, X1)}, (N11,))
    with pytest.raises(DanglingEdge):
        Instantiation(spec, {(N11, C): 1})


def test_activation_validation():
    with pytest.raises(ValueError):
        Activation.rational(Q, [1, 1], [1, 1])  # common factor t+1
    with pytest.raises(ValueError):
        Activation.rational(Q, [1], [0])
    with pytest.raises(ValueError):
        Activation.polynomial(F7, [3])
    assert Activation.rational(F7, [0, 1], [1, 1]).degree == 1
    # x^2 - 1 and x - 1 share a root
    with pytest.raises(ValueError):
        Activation.rational(F7, [-1, 0, 1], [-1, 1])


def test_eval_examples():
    spec, inst = ratio_net()
    assert net_eval(spec, inst, (3,)).outputs == (Fraction(7, 8),)
    tr = net_eval(spec, inst, (-1,))
    assert tr.outputs == (Undefined(N11),)
    assert not tr.defined and tr.first_undefined == N11
    sq = NetworkSpec(F7, 2, Activation.square(F7), (3, 1), {N11: (X1, X2)}, (N11,))
    inst = Instantiation(sq, {(N11, X1): 1, (N11, X2): 1})
    assert net_eval(sq, inst, (2, 3)).outputs[0] == 4


def test_undefined_propagation_least_node():
    act = Activation.rational(Q, [1], [0, 1])  # 1/t
    fan = {N11: (X1,), N12: (X1,), N21: (N11, N12)}
    spec = NetworkSpec(Q, 1, act, (2, 2, 1), fan, (N21,))
    inst = Instantiation(spec, {e: 1 for e in spec.edges()})
    tr = net_eval(spec, inst, (0,))
    assert tr.values[N11] == Undefined(N11) and tr.values[N12] == Undefined(N12)
    assert tr.outputs == (Undefined(N11),)


def test_empty_fan_in_is_phi_of_zero():
    act = Activation.polynomial(F7, [3, 1])
    spec = NetworkSpec(F7, 1, act, (2, 1), {}, (N11,))
    assert net_eval(spec, Instantiation(spec, {}), (4,)).outputs == (3,)


def test_expand_examples():
    sq = NetworkSpec(F7, 1, Activation.square(F7), (2, 1), {N11: (C, X1)}, (N11,))
    coeffs = expand_nodes(sq, mode="in_parameters")[N11]
    # edge variables: y1 = b (from const), y2 = a (from x)
    assert coeffs[(2,)] == SparsePoly.parse(F7, "x2^2", 2)
    assert coeffs[(1,)] == SparsePoly.parse(F7, "2*x1*x2", 2)
    assert coeffs[(0,)] == SparsePoly.parse(F7, "x1^2", 2)
    assert coeffs[(2,)].total_degree() <= 2**2 - 2

    chain = NetworkSpec(F7, 1, Activation.square(F7), (2, 1, 1), {N11: (C, X1), N21: (N11,)}, (N21,))
    inst = Instantiation(chain, {e: 1 for e in chain.edges()})
    (f,) = net_expand(chain, inst)
    assert f == SparsePoly.parse(F7, "x1 + 1") ** 4
    assert f.total_degree() == 4

    cube = NetworkSpec(F7, 1, Activation.polynomial(F7, [0, 0, 0, 1]), (2, 1), {N11: (C, X1)}, (N11,))
    (g,) = net_expand(cube, Instantiation(cube, {(N11, C): 0, (N11, X1): 1}))
    assert g == SparsePoly.parse(F7, "x1^3") and g.total_degree() == 3


def test_expand_errors():
    spec, inst = ratio_net()
    with pytest.raises(RationalActivationNotExpandable):
        net_expand(spec, inst)
    act = Activation.square(F7)
    wide = NetworkSpec(F7, 13, act, (14, 1), {N11: tuple(NodeId(0, j) for j in range(14))}, (N11,))
    with pytest.raises(BudgetExceeded):
        net_expand(wide, mode="in_parameters")
    deep = NetworkSpec(F7, 1, act, (2, 1, 1, 1, 1, 1, 1), {
        NodeId(i, 1): ((NodeId(i - 1, 1),) if i > 1 else (X1,)) for i in range(1, 7)}, (NodeId(6, 1),))
    with pytest.raises(BudgetExceeded):
        net_expand(deep, mode="in_parameters")


def reference_eval(spec, inst, point):
    """Plain recursive evaluation with field elements."""
    fld = spec.field
    vals = {C: fld(1)}
    for j, x in enumerate(point, 1):
        vals[NodeId(0, j)] = fld(x)
    for v in spec.nodes:
        t = fld(0)
        for mu in spec.fan_in[v]:
            t = t + inst[(v, mu)] * vals[mu]
        r = fld(0)
        for c in reversed(spec.activation.num):
            r = r * t + c
        vals[v] = r
    return tuple(vals[o] for o in spec.outputs)


@pytest.mark.parametrize("num_inputs", [1, 2])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_expansion_matches_eval_exhaustively(num_inputs, d):
    act = activation_of_degree(F5, d)
    shapes = list(tiny_shapes(F5, act, num_inputs=num_inputs))
    rng = stream(11, num_inputs, d)
    # n = 2 has thousands of shapes; take every 7th to keep runtime small
    step = 1 if num_inputs == 1 else 7
    points = list(itertools.product(range(5), repeat=num_inputs))
    for spec in shapes[::step]:
        inst = Instantiation.random(spec, rng)
        polys = expand_nodes(spec, inst)
        for x in points:
            tr = net_eval(spec, inst, x)
            for v in spec.nodes:
                assert polys[v].eval(x) == tr.values[v]
            assert tr.outputs == reference_eval(spec, inst, x)
        for v in spec.nodes:
            assert polys[v].total_degree() <= d**v.depth


def test_eval_deterministic():
    act = Activation.rational(F7, [0, 1], [1, 1])
    for spec in list(tiny_shapes(F7, act))[:100]:
        inst = Instantiation.random(spec, stream(3))
        for x in range(7):
            assert net_eval(spec, inst, (x,)) == net_eval(spec, inst, (x,))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([F7, FieldSpec(2147483647), Q]))
def test_json_round_trip_bit_exact(seed, fld):
    from erz.divfree import random_rational_network

    rng = stream(seed)
    spec = random_rational_network(rng, fld)
    inst = Instantiation.random(spec, rng)
    text = spec.dumps()
    again = NetworkSpec.from_json(json.loads(text))
    assert again == spec and again.dumps() == text
    ptext = json.dumps(inst.to_json(), indent=2)
    inst2 = Instantiation.from_json(again, json.loads(ptext))
    assert inst2 == inst and json.dumps(inst2.to_json(), indent=2) == ptext
