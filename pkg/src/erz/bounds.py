"""Closed-form bounds and length conditions.

Every evaluator takes plain numbers and returns plain numbers or a small
report dict.  Logarithms are natural unless the name says log2.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import comb

from .errors import NonsenseInput


def _positive(**kw):
    for name, v in kw.items():
        if v is None or v <= 0:
            raise NonsenseInput(f"{name} must be positive, got {v!r}")


def _log_affine(a, base, exponent, b):
    """log(a * base**exponent + b) without overflowing for huge powers."""
    e = float(exponent) * math.log(base)
    if e < 600:
        val = a * math.exp(e) + b
        if val <= 0:
            raise NonsenseInput(f"log of non-positive value {val}")
        return math.log(val)
    return math.log(a) + e + math.log1p(b / (a * math.exp(min(e, 700))))


# cell counts and growth

def cell_bound(deg_lci, grad, dim):
    """Bound on the number of nonempty cells: deg_lci * (1 + grad)^dim."""
    return deg_lci * (1 + grad) ** dim


def boolean_algebra_bound(deg_lci, grad, dim):
    """Bound on the size of the generated Boolean algebra: 2^(cell bound)."""
    return 2 ** cell_bound(deg_lci, grad, dim)


def growth_bound(deg_lci, m, d, dim):
    """Restrictions of distinguished-open classifiers to m points."""
    return deg_lci * (1 + m * (d + 1)) ** dim


def network_growth_bound(deg_lci, d, depth, m, L, S):
    """Growth of classifiers D(f) with f evaluable by a polynomial network."""
    return deg_lci * ((d ** (depth + 1) - 2) * (1 + m * (d**depth + 1))) ** (L * S)


def sauer_bound(m, s):
    return sum(comb(m, i) for i in range(0, min(s, m) + 1))


def krull_lhs(s, deg_lci, grad):
    """s/(log2 s + k) - log2(deg_lci)/(log2 s + k) with k = 1 + log2(grad).

    For s = 0 the left side is taken as 0 (nothing is shattered).
    """
    _positive(deg_lci=deg_lci, grad=grad)
    if s == 0:
        return 0.0
    k = 1 + math.log2(grad)
    denom = math.log2(s) + k
    return s / denom - math.log2(deg_lci) / denom


def krull_check(s, deg_lci, grad, dim):
    lhs = krull_lhs(s, deg_lci, grad)
    return {"lhs": lhs, "rhs": dim, "ok": lhs <= dim}


def pham_bound(D, d1, k):
    return D * d1**k


# network degrees

def input_degree_bound(d, depth):
    return d**depth


def parameter_degree_bound(d, depth):
    return d ** (depth + 1) - 2


def image_dimension_bound(L, S):
    return L * S


def image_degree_bound(deg_lci, d, depth, dim_params):
    return deg_lci * (d ** (depth + 1) - 2) ** dim_params


def compiled_size_bound(c, L, d, S):
    return c * L * (d + S)


def compiled_depth_bound(c, depth, d, S):
    lg = lambda x: math.ceil(math.log2(x)) if x > 1 else 0
    return c * depth * (lg(d) + lg(S) + 1)


def false_zero_bound(D, delta, M):
    """(D/delta)^M for 0 <= D < delta, else None."""
    if D is None or D < 0 or D >= delta:
        return None
    return float(Fraction(D, delta) ** M)


# length conditions

def thm411_lhs(deg_lci, dim, d, L):
    return 64 * (1 + (1 + math.log(deg_lci)) / dim + math.log(L * (d + 1)))


def thm411_holds(deg_lci, dim, d, L):
    return thm411_lhs(deg_lci, dim, d, L) < L / dim


def thm411_minimal_L(deg_lci, dim, d):
    """Least L with the length inequality; it fails for every L <= 64*dim
    and the gap L/dim - lhs increases beyond that point."""
    lo = 64 * dim
    hi = lo + 1
    while not thm411_holds(deg_lci, dim, d, hi):
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if thm411_holds(deg_lci, dim, d, mid):
            hi = mid
        else:
            lo = mid
    return hi


def thm411_probability(deg_lci, dim):
    return 1 - 1 / (deg_lci * math.exp(dim))


def thm411(deg_lci, dim, d, L=None):
    _positive(deg_lci=deg_lci, dim=dim, d=d)
    out = {"formula": "thm411", "minimal_L": thm411_minimal_L(deg_lci, dim, d),
           "probability_bound": thm411_probability(deg_lci, dim)}
    if L is not None:
        _positive(L=L)
        lhs = thm411_lhs(deg_lci, dim, d, L)
        out.update(lhs=lhs, rhs=L / dim, satisfied=lhs < L / dim)
    return out


def _minimal_delta(log_rhs):
    delta = max(2, math.ceil(math.exp(log_rhs)) - 1)
    while math.log(delta) < log_rhs:
        delta += 1
    return delta


def _test_length_condition(name, factor, mult, L, S, d, depth, s, deg_term, deg_prob, t, c, M, delta):
    _positive(L=L, S=S, d=d, depth=depth, s=s, t=t, c=c)
    dS = d * S
    if dS == 1:
        raise NonsenseInput("d*S = 1 makes the parameter-degree term log(0)")
    log_param = _log_affine(mult, dS, c * depth, -mult)
    first = 2 * (1 + _log_affine(mult // 2, dS, depth, 1))
    second = 2 * t * (math.log(deg_term) / s + log_param)
    log_rhs = max(first, second)
    threshold = factor * L * S
    out = {
        "formula": name,
        "minimal_M": threshold,
        "log_delta_rhs": log_rhs,
        "minimal_delta": _minimal_delta(log_rhs),
        "probability_bound": 1 - math.exp(-(math.log(deg_prob) + s * (log_param + 1))),
        # the bound is often 1.0 in floating point; its complement survives as a logarithm
        "log_failure_bound": -(math.log(deg_prob) + s * (log_param + 1)),
        "conditions": {},
    }
    ok = True
    if M is not None:
        out["conditions"]["M"] = {"lhs": M, "rhs": threshold, "ok": M >= threshold}
        out["lhs"], out["rhs"] = M, threshold
        ok = ok and M >= threshold
    if delta is not None:
        _positive(delta=delta)
        lhs = math.log(delta)
        out["conditions"]["delta"] = {"lhs": lhs, "rhs": log_rhs, "ok": lhs >= log_rhs}
        ok = ok and lhs >= log_rhs
    out["satisfied"] = ok
    return out


def cor59(L, S, d, depth, s=None, deg_lci=1, t=1, c=8, M=None, delta=None):
    """Single-network test length: M >= 6LS and the log(delta) condition."""
    s = L * S if s is None else s
    return _test_length_condition("cor59", 6, 4, L, S, d, depth, s, deg_lci, deg_lci, t, c, M, delta)


def cor510(L, S, d, depth, s=None, deg_lci=1, deg_lci_other=1, t=1, c=8, M=None, delta=None):
    """Two-network equivalence test length: M >= 12LS and the log(delta) condition."""
    s = 2 * L * S if s is None else s
    return _test_length_condition("cor510", 12, 8, L, S, d, depth, s,
                                  deg_lci * deg_lci_other, deg_lci, t, c, M, delta)


def cts_condition_eval(which, **inputs):
    """Evaluate one of the length conditions by name."""
    table = {"thm411": thm411, "cor59": cor59, "cor510": cor510}
    if which not in table:
        raise NonsenseInput(f"unknown condition {which!r}")
    try:
        return table[which](**inputs)
    except TypeError as exc:
        raise NonsenseInput(str(exc)) from None
    except ZeroDivisionError as exc:
        raise NonsenseInput(str(exc)) from None


FORMULAS = {
    "thm411": thm411,
    "cor59": cor59,
    "cor510": cor510,
    "cells": lambda deg_lci, grad, dim: {"bound": cell_bound(deg_lci, grad, dim)},
    "boolean_algebra": lambda deg_lci, grad, dim: {"log2_bound": cell_bound(deg_lci, grad, dim)},
    "growth": lambda deg_lci, m, d, dim: {"bound": growth_bound(deg_lci, m, d, dim)},
    "network_growth": lambda deg_lci, d, depth, m, L, S: {
        "bound": network_growth_bound(deg_lci, d, depth, m, L, S)},
    "sauer": lambda m, s: {"bound": sauer_bound(m, s)},
    "krull": lambda s, deg_lci, grad, dim: krull_check(s, deg_lci, grad, dim),
    "pham": lambda D, d1, k: {"bound": pham_bound(D, d1, k)},
    "degrees": lambda d, depth: {"input_degree": input_degree_bound(d, depth),
                                 "parameter_degree": parameter_degree_bound(d, depth)},
    "image": lambda L, S, d, depth, deg_lci=1: {
        "dim_bound": image_dimension_bound(L, S),
        "deg_bound": image_degree_bound(deg_lci, d, depth, L * S)},
    "compiled": lambda L, S, d, depth, c=8: {
        "size_bound": compiled_size_bound(c, L, d, S),
        "depth_bound": compiled_depth_bound(c, depth, d, S)},
    "false_zero": lambda D, delta, M: {"bound": false_zero_bound(D, delta, M)},
}


def evaluate(formula, **inputs):
    if formula not in FORMULAS:
        raise NonsenseInput(f"unknown formula {formula!r}; known: {', '.join(sorted(FORMULAS))}")
    try:
        return FORMULAS[formula](**inputs)
    except TypeError as exc:
        raise NonsenseInput(f"{formula}: {exc}") from None
