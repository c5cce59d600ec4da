import itertools
from fractions import Fraction

import pytest

from erz._random import stream
from erz.divfree import (C_EFF, calibrate_c_eff, check_pair, compile_divfree, compile_identity_targets,
                         gadget_product, random_rational_network)
from erz.errors import ArityMismatch, CharacteristicTwo, MixedField, NotRationalActivation
from erz.field import FieldSpec
from erz.network import Activation, Evaluator, Instantiation, NetworkSpec, NodeId, Undefined, net_eval

Q = FieldSpec.rationals()
F7, F31 = FieldSpec(7), FieldSpec(31)
C, X1 = NodeId(0, 0), NodeId(0, 1)
N11, N21 = NodeId(1, 1), NodeId(2, 1)
RATIO = Activation.rational(Q, [0, 1], [1, 1])


def single(fld, act, fan, params):
    spec = NetworkSpec(fld, 1, act, (2, 1), {N11: fan}, (N11,))
    return spec, Instantiation(spec, dict(zip([(N11, mu) for mu in fan], params)))


def pair_values(res, inst, x, node):
    tr = net_eval(res.compiled, res.instantiate(inst), x)
    a, b = res.pairing[node]
    return tr.values[a], tr.values[b]


def test_gadget_examples():
    spec, inst = gadget_product(F7)
    assert spec.activation.kind == "square"
    assert spec.depth == 2 and spec.size == 4
    assert net_eval(spec, inst, (3, 4)).outputs == (5,)
    for x in range(7):
        assert net_eval(spec, inst, (x, x)).outputs == (x * x % 7,)


@pytest.mark.parametrize("variant", [0, 1])
def test_gadget_exhaustive_f31(variant):
    spec, inst = gadget_product(F31, variant)
    ev = Evaluator(spec, inst)
    for a, b in itertools.product(range(31), repeat=2):
        assert ev.outputs((a, b)) == (a * b % 31,)


def test_characteristic_two_rejected():
    F2 = FieldSpec(2)
    with pytest.raises(CharacteristicTwo):
        gadget_product(F2)
    spec, _ = single(F2, Activation.rational(F2, [0, 1], [1, 1]), (C, X1), (1, 1))
    with pytest.raises(CharacteristicTwo):
        compile_divfree(spec)


def test_not_rational():
    spec, _ = single(F7, Activation.square(F7), (C, X1), (1, 1))
    with pytest.raises(NotRationalActivation):
        compile_divfree(spec)


def test_ratio_example():
    spec, inst = single(Q, RATIO, (C, X1), (1, 2))
    res = compile_divfree(spec)
    assert res.compiled.activation.kind == "square"
    assert pair_values(res, inst, (3,), N11) == (7, 8)
    assert res.metrics["size_ok"] and res.metrics["depth_ok"]


def test_chain_example():
    fan = {N11: (C, X1), N21: (N11,)}
    spec = NetworkSpec(Q, 1, RATIO, (2, 1, 1), fan, (N21,))
    inst = Instantiation(spec, {(N11, C): 1, (N11, X1): 2, (N21, N11): 1})
    res = compile_divfree(spec)
    n, d = pair_values(res, inst, (3,), N21)
    assert (n, d) == (7, 15)
    t = Fraction(7, 8)
    assert Fraction(n.value, d.value) == t / (t + 1) == net_eval(spec, inst, (3,)).outputs[0]


def test_reciprocal_example():
    act = Activation.rational(Q, [1], [0, 1])
    for a, x in [(2, 5), (-3, 7), (1, 0)]:
        spec, inst = single(Q, act, (X1,), (a,))
        res = compile_divfree(spec)
        assert pair_values(res, inst, (x,), N11) == (1, a * x)


def test_compiled_parameters_embed_source_edges():
    spec, inst = single(Q, RATIO, (C, X1), (1, 2))
    res = compile_divfree(spec)
    srcs = {src for _, src in res.param_map.values()}
    assert srcs == set(spec.edges())
    cinst = res.instantiate(inst)
    for e, (_, src) in res.param_map.items():
        assert cinst.values[e] == inst.values[src]


def test_variants_differ_but_agree():
    rng = stream(5)
    spec = random_rational_network(rng, F31, max_depth=3, max_size=6, max_space=3)
    a, b = compile_divfree(spec, 0), compile_divfree(spec, 1)
    assert a.compiled.dumps() != b.compiled.dumps()
    inst = Instantiation.random(spec, rng)
    for x in itertools.product(range(31), repeat=spec.num_inputs):
        if len(x) > 1 and sum(x) % 5:
            continue
        assert check_pair(a, inst, x)[0] and check_pair(b, inst, x)[0]


def test_small_field_corpus_including_undefined():
    """Over F_7 many points are undefined; the offending node's compiled denominator must vanish."""
    rng = stream(2024)
    undefined = 0
    for _ in range(40):
        spec = random_rational_network(rng, F7, max_depth=3, max_size=6, max_space=3, max_inputs=2)
        res = compile_divfree(spec)
        for _ in range(3):
            inst = Instantiation.random(spec, rng)
            cev = Evaluator(res.compiled, res.instantiate(inst))
            sev = Evaluator(spec, inst)
            for x in itertools.product(range(7), repeat=spec.num_inputs):
                ok, defined = check_pair(res, inst, x, cev, sev)
                assert ok, (spec.dumps(), x)
                assert defined is not None  # compiled network never undefined
                undefined += not defined
    assert undefined > 0


def test_calibration_reproduces_published_constant():
    c, table = calibrate_c_eff()
    assert c == C_EFF == 8
    assert table[(4, 1)] == (40, 6)


def test_target_examples():
    spec, inst = single(Q, RATIO, (C, X1), (1, 2))
    t = compile_identity_targets([spec], [inst])
    assert t.provenance == "single" and t.degree_bound == 2 * (1 * 2) ** 1
    assert t.evaluator().value((3,)) == 56

    s1, i1 = single(Q, RATIO, (C, X1), (0, 1))
    s2, i2 = single(Q, RATIO, (C, X1), (1, 1))
    t = compile_identity_targets([s1, s2], [i1, i2])
    assert t.provenance == "pair" and t.degree_bound == 4 * 2
    assert t.evaluator().value((1,)) == -6

    same = compile_identity_targets([s1, s1], [i1, i1], variants=(0, 1))
    ev = same.evaluator()
    vals = [ev.value((x,)) for x in range(-10, 10)]
    assert all(v == 0 for v in vals if v is not None)
    assert sum(v is not None for v in vals) == 19  # only x = -1 rejected


def test_target_errors():
    s1, _ = single(Q, RATIO, (C, X1), (0, 1))
    s2, _ = single(F7, Activation.rational(F7, [0, 1], [1, 1]), (C, X1), (0, 1))
    with pytest.raises(MixedField):
        compile_identity_targets([s1, s2])
    two = NetworkSpec(Q, 2, RATIO, (3, 1), {N11: (C, X1)}, (N11,))
    with pytest.raises(ArityMismatch):
        compile_identity_targets([s1, two])


@pytest.mark.parametrize("fld", [F7, FieldSpec(13)])
def test_target_soundness_exhaustive(fld):
    """Target is zero at a defined point exactly when the identity holds there."""
    rng = stream(77, fld.prime)
    p = fld.prime
    checked = 0
    for _ in range(25):
        a = random_rational_network(rng, fld, max_depth=2, max_size=4, max_space=2, max_inputs=2)
        n = a.num_inputs
        # a second network on the same inputs, sometimes the same one reparametrized
        while True:
            b = random_rational_network(rng, fld, max_depth=2, max_size=4, max_space=2, max_inputs=2)
            if b.num_inputs == n:
                break
        a, b = NetworkSpec(**{**a.__dict__, "outputs": a.outputs[:1]}), NetworkSpec(**{**b.__dict__, "outputs": b.outputs[:1]})
        ia, ib = Instantiation.random(a, rng), Instantiation.random(b, rng)
        ts = compile_identity_targets([a], [ia]).evaluator()
        tp = compile_identity_targets([a, b], [ia, ib]).evaluator()
        ea, eb = Evaluator(a, ia), Evaluator(b, ib)
        for x in itertools.product(range(p), repeat=n):
            va, vb = ea.outputs(x)[0], eb.outputs(x)[0]
            s, t = ts.value(x), tp.value(x)
            if isinstance(va, Undefined):
                assert s is None
                continue
            if s is not None:
                assert (s == 0) == (va == 0)
            if isinstance(vb, Undefined):
                assert t is None
                continue
            if t is not None:
                assert (t == 0) == (va == vb)
                checked += 1
    assert checked > 100
