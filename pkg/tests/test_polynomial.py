import itertools

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from erz.errors import ArityMismatch, BudgetExceeded, MixedField
from erz.field import FieldSpec
from erz.polynomial import GridSpec, SparsePoly, poly_ops, poly_zero_oracle

F3, F5, F7 = FieldSpec(3), FieldSpec(5), FieldSpec(7)
Q = FieldSpec.rationals()


def P(fld, text, n=None):
    return SparsePoly.parse(fld, text, n)


def test_examples():
    f = poly_ops(P(F7, "x1 + 1"), P(F7, "x1 - 1"), "mul")
    assert f == P(F7, "x1^2 - 1")
    assert f.total_degree() == 2
    g = P(F7, "x1^2*x2 + 3")
    assert poly_ops(g, op="eval", point=(2, 5)) == 2
    h = P(F7, "2*x1*x2 + x2^3")
    z = poly_ops(h, -h, "add")
    assert z.is_zero() and z.total_degree() == -1


def test_zero_oracle_examples():
    r = poly_zero_oracle(P(F3, "x1*x2"))
    assert (r.zero_count, r.is_identically_zero_on_domain) == (5, False)
    assert tuple(int(v) for v in r.witness) == (1, 1)
    z = poly_zero_oracle(SparsePoly.zero(F5, 2))
    assert z.is_identically_zero_on_domain and z.zero_count == 25 and z.witness is None
    g = poly_zero_oracle(P(F7, "x1 - 1"), GridSpec(F7, 1, 4))
    assert (g.zero_count, g.grid_bound, g.grid_bound_ok) == (1, 1, True)


def test_zero_oracle_budget():
    with pytest.raises(BudgetExceeded):
        poly_zero_oracle(P(F7, "x1", 3), GridSpec(F7, 3, 7), budget=100)


def test_arity_and_field_errors():
    with pytest.raises(ArityMismatch):
        P(F7, "x1", 1) + P(F7, "x2", 2)
    with pytest.raises(MixedField):
        P(F7, "x1") + P(F5, "x1")
    with pytest.raises(ArityMismatch):
        P(F7, "x1").eval((1, 2))


def test_text_round_trip_examples():
    for text in ["3*x1^2*x2 + 5", "0", "x1 - x2", "-1/2*x1 + 7/3"]:
        f = P(Q, text, 2)
        assert P(Q, f.format(), 2) == f
    assert P(Q, "3*x1^2*x2 + 5").format() == "3*x1^2*x2 + 5"


def test_grid_spec():
    g = GridSpec(F7, 2, 4)
    assert g.size == 16 == len(list(g.points()))
    for h in g.vanishing_polys():
        assert h.total_degree() == 4
        assert all(not h.eval_raw(x) for x in g.points())
    with pytest.raises(ValueError):
        GridSpec(F5, 1, 6)


# random polynomials

def polys(fld, n, max_terms=5, max_exp=3):
    mono = st.tuples(*[st.integers(0, max_exp)] * n)
    coeff = st.integers(-50, 50)
    return st.dictionaries(mono, coeff, max_size=max_terms).map(lambda t: SparsePoly(fld, n, t))


FIELDS = [F5, FieldSpec(101), Q]


@st.composite
def triples(draw):
    fld = draw(st.sampled_from(FIELDS))
    n = draw(st.integers(1, 3))
    return fld, n, draw(polys(fld, n)), draw(polys(fld, n)), draw(polys(fld, n))


@settings(max_examples=200)
@given(triples())
def test_ring_laws(t):
    fld, n, f, g, h = t
    assert (f + g) + h == f + (g + h)
    assert (f * g) * h == f * (g * h)
    assert f + g == g + f and f * g == g * f
    assert f * (g + h) == f * g + f * h
    assert f - f == SparsePoly.zero(fld, n)
    assert all(c for c in (f * g).terms.values())


@settings(max_examples=200)
@given(triples(), st.lists(st.integers(-20, 20), min_size=3, max_size=3))
def test_eval_is_homomorphism(t, x):
    fld, n, f, g, _ = t
    x = x[:n]
    assert (f * g).eval(x) == f.eval(x) * g.eval(x)
    assert (f + g).eval(x) == f.eval(x) + g.eval(x)


def _to_sympy(f, gens):
    return sum(sympy.Integer(int(c)) * sympy.Mul(*[v**e for v, e in zip(gens, ex)]) for ex, c in f.terms.items())


@settings(max_examples=150)
@given(triples())
def test_product_matches_sympy(t):
    fld, n, f, g, _ = t
    if fld.prime is None:
        return
    gens = sympy.symbols(f"x1:{n + 1}")
    ref = sympy.Poly(_to_sympy(f, gens) * _to_sympy(g, gens), *gens, modulus=fld.prime)
    ours = f * g
    expected = {ex: int(c) % fld.prime for ex, c in ref.as_dict().items() if int(c) % fld.prime}
    assert ours.terms == expected


@settings(max_examples=200)
@given(triples())
def test_text_round_trip(t):
    fld, n, f, _, _ = t
    assert SparsePoly.parse(fld, f.format(), n) == f


def all_polys_upto(fld, n, deg):
    monos = [e for e in itertools.product(range(deg + 1), repeat=n) if sum(e) <= deg]
    for coeffs in itertools.product(range(fld.prime), repeat=len(monos)):
        yield SparsePoly(fld, n, dict(zip(monos, coeffs)))


@pytest.mark.parametrize("n", [1, 2])
def test_grid_zero_count_bound_exhaustive(n):
    grid = GridSpec(F5, n, 5)
    checked = 0
    for f in all_polys_upto(F5, n, 2):
        if f.is_zero():
            continue
        r = poly_zero_oracle(f, grid)
        # independent count
        zeros = sum(1 for x in itertools.product(range(5), repeat=n) if f.eval(x) == 0)
        assert r.zero_count == zeros
        assert zeros <= f.total_degree() * 5 ** (n - 1)
        assert r.grid_bound_ok
        checked += 1
    assert checked == 5 ** (3 if n == 1 else 6) - 1


@settings(max_examples=100)
@given(st.data())
def test_equals_iff_zero_on_full_space(data):
    n = data.draw(st.integers(1, 2))
    f = data.draw(polys(F7, n, max_exp=3))
    g = data.draw(polys(F7, n, max_exp=3))
    if (f - g).total_degree() >= 7:
        return
    same = poly_ops(f, g, "equals")
    assert same == poly_zero_oracle(f - g).is_identically_zero_on_domain


def test_witness_is_lexicographically_first():
    f = P(F5, "x1*x2 - x1")
    r = poly_zero_oracle(f)
    first = next(x for x in itertools.product(range(5), repeat=2) if f.eval(x) != 0)
    assert tuple(int(v) for v in r.witness) == first
