"""Correct test sequences and one-sided randomized identity testing.

A sequence of points is a correct test sequence for a finite family of
polynomials (w.r.t. an exceptional set, by default {0}) when every member
vanishing at all the points is exceptional.  Testing a target at random grid
points is one-sided: a nonzero value proves the target nonzero, all zeros may
be a false zero.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from ._random import STREAM_POINTS, STREAM_TRIALS, stream
from .bounds import cts_condition_eval, false_zero_bound, thm411_probability
from .divfree import C_EFF, IdentityTarget
from .errors import MixedField, RejectionBudgetExceeded
from .field import FieldElement
from .network import Instantiation, expand_nodes
from .polynomial import GridSpec, SparsePoly

__all__ = [
    "CtsPlan", "CtsReport", "cts_oracle", "randomized_zero_test", "false_zero_frequency",
    "cts_density_estimate", "cts_condition_eval", "network_family", "worker_count",
]


def worker_count():
    """Thread cap from ERZ_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("ERZ_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """map() over a thread pool of ``worker_count()`` threads, results in input order."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class CtsPlan:
    grid: GridSpec
    M: int
    source_stats: dict = dc_field(default_factory=dict)
    param_stats: dict = dc_field(default_factory=dict)
    c: object = C_EFF
    rejection_factor: int = 100

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("test length M must be positive")
        if self.grid.side < 2:
            raise ValueError("grid side must be at least 2")


@dataclass
class CtsReport:
    verdict: str
    witness: tuple | None = None
    points_used: int = 0
    M: int | None = None
    false_zero_bound: float | None = None
    rejections: int = 0
    trials: int | None = None
    passes: int | None = None
    cts_frequency: float | None = None
    density_bound: float | None = None

    def to_json(self, fld=None):
        obj = {"verdict": self.verdict}
        if self.witness is not None:
            obj["witness"] = [str(x) for x in self.witness]
        for key in ("M", "points_used", "rejections", "false_zero_bound",
                    "trials", "passes", "cts_frequency", "density_bound"):
            val = getattr(self, key)
            if val is not None:
                obj[key] = val
        return obj


def _raw_point(fld, x):
    return tuple(fld.normalize(v) for v in x)


def cts_oracle(sequence, family, sigma=None):
    """True iff every member of ``family`` vanishing on ``sequence`` lies in ``sigma``.

    ``sigma`` defaults to the zero polynomial only.
    """
    family = list(family)
    if not family:
        return True
    fld = family[0].field
    pts = [_raw_point(fld, x) for x in sequence]
    for f in family:
        if all(not f.eval_raw(x) for x in pts):
            exceptional = f.is_zero() if sigma is None else f in sigma
            if not exceptional:
                return False
    return True


def _degree(target):
    if isinstance(target, IdentityTarget):
        return target.degree_bound
    return target.total_degree()


def randomized_zero_test(target, plan, seed=0, rng=None, insts=None):
    """Evaluate ``target`` at ``plan.M`` uniform grid points.

    Stops at the first nonzero value (``certified_nonzero``).  For identity
    targets, points where a compiled denominator vanishes are redrawn, at most
    ``plan.rejection_factor * M`` draws in total.
    """
    grid = plan.grid
    fld = grid.field
    if target_field(target) != fld:
        raise MixedField(f"{target_field(target)} target on a {fld} grid")
    if target_vars(target) != grid.num_vars:
        raise ValueError(f"{target_vars(target)}-variate target on a {grid.num_vars}-dim grid")
    rng = rng if rng is not None else stream(seed, STREAM_POINTS)
    axis = grid.axis
    if isinstance(target, IdentityTarget):
        ev = target.evaluator(insts)
        value = ev.value
    else:
        value = target.eval_raw
    budget = plan.rejection_factor * plan.M
    draws = used = rejections = 0
    bound = false_zero_bound(_degree(target), grid.side, plan.M)
    while used < plan.M:
        if draws >= budget:
            raise RejectionBudgetExceeded(f"{rejections} of {draws} draws hit a vanishing denominator")
        draws += 1
        idx = rng.integers(0, grid.side, size=grid.num_vars)
        x = tuple(axis[int(i)] for i in idx)
        v = value(x)
        if v is None:
            rejections += 1
            continue
        used += 1
        if v:
            witness = tuple(FieldElement(fld, c) for c in x)
            return CtsReport("certified_nonzero", witness, used, plan.M, bound, rejections)
    return CtsReport("all_zero", None, used, plan.M, bound, rejections)


def target_field(target):
    return target.field


def target_vars(target):
    return target.num_vars


def false_zero_frequency(target, plan, trials, seed=0, insts=None):
    """Fraction of independent runs ending in ``all_zero``."""

    def one(t):
        rep = randomized_zero_test(target, plan, rng=stream(seed, STREAM_TRIALS, t), insts=insts)
        return rep.verdict == "all_zero"

    hits = sum(ordered_map(one, range(trials)))
    return hits / trials


def zero_matrix(family, points):
    """Boolean matrix Z[f, x] = (f(x) == 0)."""
    z = np.zeros((len(family), len(points)), dtype=bool)
    for i, f in enumerate(family):
        z[i] = [not f.eval_raw(x) for x in points]
    return z


def cts_density_estimate(family, grid, L, trials, seed=0, deg_lci=None, dim=None):
    """Monte Carlo frequency of correct test sequences of length L.

    Sequence t uses the stream (seed, STREAM_TRIALS, t) and draws its points
    one at a time, so the length-L sequence extends the shorter ones drawn
    with the same seed.
    """
    points = list(grid.points())
    family = [f for f in family if not f.is_zero()]
    z = zero_matrix(family, points)
    passes = 0
    for t in range(trials):
        rng = stream(seed, STREAM_TRIALS, t)
        idx = [int(rng.integers(0, len(points))) for _ in range(L)]
        if not family or not z[:, idx].all(axis=1).any():
            passes += 1
    bound = None
    if deg_lci is not None and dim is not None:
        bound = thm411_probability(deg_lci, dim)
    return CtsReport(
        verdict="density",
        trials=trials,
        passes=passes,
        cts_frequency=passes / trials,
        density_bound=bound,
    )


def network_family(spec, values, output=0):
    """Output polynomials of ``spec`` for every instantiation drawn from ``values``.

    Duplicates are removed, order of first appearance kept.
    """
    fld = spec.field
    edges = spec.edges()
    seen = {}
    for combo in itertools.product(values, repeat=len(edges)):
        inst = Instantiation(spec, dict(zip(edges, combo)))
        f = expand_nodes(spec, inst)[spec.outputs[output]]
        seen.setdefault(f, None)
    return list(seen)


def all_polys(fld, num_vars, degree):
    """Every polynomial of total degree <= degree over a prime field."""
    monos = [e for e in itertools.product(range(degree + 1), repeat=num_vars) if sum(e) <= degree]
    out = []
    for coeffs in itertools.product(range(fld.prime), repeat=len(monos)):
        out.append(SparsePoly._raw(fld, num_vars, {m: c for m, c in zip(monos, coeffs) if c}))
    return out


def condition_table(L, S, d, depth, c=C_EFF):
    """Both test-length conditions for given network stats, at the default parameter-space stats."""
    cc = float(c)
    return {
        "cor59": cts_condition_eval("cor59", L=L, S=S, d=d, depth=depth, c=cc),
        "cor510": cts_condition_eval("cor510", L=L, S=S, d=d, depth=depth, c=cc),
    }

