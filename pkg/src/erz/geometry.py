"""Brute-force cell counts, growth functions, VC search and Pham-system checks.

All point sets are F_p-rational points, a subset of the points over the
algebraic closure.  Counting fewer points (or cells, or patterns) can only
make a measured value smaller, so every "measured <= bound" check here is
one-sided safe.  Dimensions and lci-degrees are declared inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from math import comb

import numpy as np

from ._random import STREAM_LINES, stream
from .bounds import boolean_algebra_bound, cell_bound, growth_bound, krull_lhs, pham_bound, sauer_bound
from .errors import BudgetExceeded, DegenerateSystem, ParseError
from .field import FieldElement, FieldSpec
from .polynomial import DEFAULT_POINT_BUDGET, SparsePoly


# constructible sets

class Constructible:
    """Set given by a Boolean formula over polynomial equations and inequations.

    ``expr`` is a nested tuple: ``("all",)``, ``("eq", f)``, ``("neq", f)``,
    ``("not", e)``, ``("and", [e...])`` or ``("or", [e...])``.
    """

    def __init__(self, expr, dim=None, deg_lci=None, provenance=""):
        self.expr = expr
        self.dim = dim
        self.deg_lci = deg_lci
        self.provenance = provenance

    @classmethod
    def everything(cls, dim=None, deg_lci=1, provenance="affine space"):
        return cls(("all",), dim, deg_lci, provenance)

    @classmethod
    def zero_set(cls, *polys, **kw):
        if len(polys) == 1:
            return cls(("eq", polys[0]), **kw)
        return cls(("and", [("eq", f) for f in polys]), **kw)

    @classmethod
    def nonzero_set(cls, f, **kw):
        return cls(("neq", f), **kw)

    def contains(self, x):
        return _holds(self.expr, x)

    __contains__ = contains

    def polys(self):
        out = []
        _collect(self.expr, out)
        return out

    @classmethod
    def from_json(cls, obj, fld, num_vars):
        meta = obj if isinstance(obj, dict) else {}
        expr = _parse_expr(meta.get("set", obj), fld, num_vars)
        return cls(expr, meta.get("dim"), meta.get("deg_lci"), meta.get("provenance", ""))


def _holds(e, x):
    tag = e[0]
    if tag == "all":
        return True
    if tag == "eq":
        return not e[1].eval_raw(x)
    if tag == "neq":
        return bool(e[1].eval_raw(x))
    if tag == "not":
        return not _holds(e[1], x)
    if tag == "and":
        return all(_holds(s, x) for s in e[1])
    if tag == "or":
        return any(_holds(s, x) for s in e[1])
    raise ValueError(f"bad constructible node {tag!r}")


def _collect(e, out):
    tag = e[0]
    if tag in ("eq", "neq"):
        if e[1] not in out:
            out.append(e[1])
    elif tag == "not":
        _collect(e[1], out)
    elif tag in ("and", "or"):
        for s in e[1]:
            _collect(s, out)


def _parse_expr(obj, fld, n):
    if obj == "all":
        return ("all",)
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ParseError(f"bad set description {obj!r}")
    (tag, body), = obj.items()
    if tag in ("eq", "neq"):
        return (tag, SparsePoly.parse(fld, body, n))
    if tag == "not":
        return ("not", _parse_expr(body, fld, n))
    if tag in ("and", "or"):
        return (tag, [_parse_expr(b, fld, n) for b in body])
    raise ParseError(f"unknown set operator {tag!r}")


def _points(fld, n, budget):
    if fld.prime is None:
        raise ValueError("point enumeration needs a prime field")
    size = fld.prime**n
    if size > budget:
        raise BudgetExceeded(f"{size} points exceed budget {budget}")
    return list(itertools.product(range(fld.prime), repeat=n))


# cells

@dataclass
class CellExperiment:
    field: FieldSpec
    num_vars: int
    C: Constructible
    H: list
    grad_upper: int | None = None
    name: str = ""

    def grad(self):
        """Declared grad upper bound, else the total degree of the distinct
        polynomials defining H (each V(f) has degree <= deg f)."""
        if self.grad_upper is not None:
            return self.grad_upper
        polys = []
        for h in self.H:
            for f in h.polys():
                if f not in polys:
                    polys.append(f)
        return sum(max(f.total_degree(), 0) for f in polys)


@dataclass
class CellReport:
    nonempty_cell_count: int
    cell_sizes: dict
    partition_ok: bool
    points_in_C: int
    bound: int
    within_bound: bool
    algebra_size: int | None = None
    algebra_ok: bool | None = None
    notes: list = dc_field(default_factory=list)

    def to_json(self):
        return {
            "nonempty_cells": {"measured": self.nonempty_cell_count, "bound": self.bound, "ok": self.within_bound},
            "cell_sizes": {"".join("1" if b else "0" for b in k): v for k, v in sorted(self.cell_sizes.items())},
            "partition_ok": self.partition_ok,
            "points_in_C": self.points_in_C,
            "boolean_algebra": None if self.algebra_size is None else {
                "measured": self.algebra_size, "log2_bound": self.bound, "ok": self.algebra_ok},
            "notes": self.notes,
        }


def _boolean_closure(generators, universe, cap):
    """Size of the Boolean algebra of subsets of ``universe`` generated by the masks."""
    sets = {0, universe} | {g & universe for g in generators}
    frontier = list(sets)
    while frontier:
        new = []
        current = list(sets)
        for a in frontier:
            for b in current + [universe]:
                for c in (a & b, a | b, universe & ~a):
                    if c not in sets:
                        sets.add(c)
                        new.append(c)
                        if len(sets) > cap:
                            return None
        frontier = new
    return len(sets)


def _atoms(masks, universe):
    atoms = [universe] if universe else []
    for g in masks:
        atoms = [a for b in atoms for a in (b & g, b & ~g) if a]
    return atoms


def cells_enumerate(exp, budget=DEFAULT_POINT_BUDGET, closure_cap=4):
    """Sign vectors of the points of C with respect to the members of H."""
    fld, n = exp.field, exp.num_vars
    pts = [x for x in _points(fld, n, budget) if exp.C.contains(x)]
    signs = [tuple(h.contains(x) for h in exp.H) for x in pts]
    cells = {}
    for s in signs:
        cells[s] = cells.get(s, 0) + 1
    # independent partition check: rebuild each cell from its defining sign vector
    covered = set()
    disjoint = True
    for s in cells:
        members = {x for x in pts if all(h.contains(x) == b for h, b in zip(exp.H, s))}
        if members & covered:
            disjoint = False
        covered |= members
    partition_ok = disjoint and covered == set(pts)
    grad = exp.grad()
    bound = cell_bound(exp.C.deg_lci, grad, exp.C.dim)
    report = CellReport(
        nonempty_cell_count=len(cells),
        cell_sizes=cells,
        partition_ok=partition_ok,
        points_in_C=len(pts),
        bound=bound,
        within_bound=len(cells) <= bound,
        notes=["F_p-rational points only; counts are lower bounds for the closure"],
    )
    if len(exp.H) <= closure_cap:
        masks = []
        for h in exp.H:
            m = 0
            for i, x in enumerate(pts):
                if h.contains(x):
                    m |= 1 << i
            masks.append(m)
        universe = (1 << len(pts)) - 1
        size = _boolean_closure(masks, universe, cap=1024)
        if size is None:
            size = 2 ** len(_atoms(masks, universe))
            report.notes.append("Boolean algebra size from its atoms (closure over 1024 sets)")
        report.algebra_size = size
        report.algebra_ok = size <= boolean_algebra_bound(exp.C.deg_lci, grad, exp.C.dim)
    return report


def la_croix_de_berny(fld):
    """Projection of V(xz + y^2 - 1) to the (x, y)-plane: {x != 0} union {(0, 1), (0, -1)}.

    Declared dim 2 and lci-degree 3.
    """
    x = SparsePoly.variable(fld, 2, 1)
    y = SparsePoly.variable(fld, 2, 2)
    expr = ("or", [("neq", x), ("and", [("eq", x), ("eq", y * y - 1)])])
    return Constructible(expr, dim=2, deg_lci=3, provenance="lci-degree 3 for this projection")


def projection_points(f, fld):
    """Points (x, y) with some z such that f(x, y, z) = 0, by brute force."""
    p = fld.prime
    return {(a, b) for a in range(p) for b in range(p) if any(not f.eval_raw((a, b, c)) for c in range(p))}


# classifier families

@dataclass
class ClassifierFamily:
    """Indicators of the sets D(f) = {f != 0} for f in an enumerated list."""

    polys: list
    d: int
    omega_dim: int
    omega_deg_lci: int = 1
    provenance: str = ""

    @property
    def field(self):
        return self.polys[0].field

    @property
    def num_vars(self):
        return self.polys[0].num_vars

    def nonzero_matrix(self, points):
        z = np.zeros((len(self.polys), len(points)), dtype=bool)
        for i, f in enumerate(self.polys):
            z[i] = [bool(f.eval_raw(x)) for x in points]
        return z


def all_polys_family(fld, num_vars, degree):
    """Every polynomial of degree <= ``degree``; the coefficient space is an affine space."""
    monos = [e for e in itertools.product(range(degree + 1), repeat=num_vars) if sum(e) <= degree]
    polys = [SparsePoly._raw(fld, num_vars, {m: c for m, c in zip(monos, cs) if c})
             for cs in itertools.product(range(fld.prime), repeat=len(monos))]
    return ClassifierFamily(polys, degree, len(monos), 1, "full coefficient space: dim = #monomials, lci-degree 1")


def _row_codes(mat):
    """Integer code of each row of a boolean matrix (columns are bits)."""
    weights = np.array([1 << i for i in range(mat.shape[1])], dtype=object)
    return [int(v) for v in (mat.astype(object) * weights).sum(axis=1)] if mat.shape[1] else [0] * mat.shape[0]


def growth_measure(family, X, max_points=24):
    """Number of distinct restrictions of the family to the finite set X."""
    X = [tuple(x) for x in X]
    if len(X) > max_points:
        raise BudgetExceeded(f"|X| = {len(X)} exceeds {max_points}")
    if not X:
        count = 1
    else:
        count = len(set(_row_codes(family.nonzero_matrix(X))))
    bound = growth_bound(family.omega_deg_lci, len(X), family.d, family.omega_dim)
    return {"measured": count, "bound": bound, "ok": count <= bound}


def _realizes(family, pts, pattern):
    for f in family.polys:
        if all(bool(f.eval_raw(x)) == b for x, b in zip(pts, pattern)):
            return True
    return False


def vcdim_search(family, universe, s_max, budget=10**8, declared_vc_upper=None,
                 sauer_ms=(), pool_is_domain=False):
    """Largest shattered subset of the pool, with Sauer and Krull checks.

    The result ``s`` is a lower bound on the VC-dimension.  When the pool is
    the whole domain and the search stopped before ``s_max``, ``s`` is exact
    and serves as the VC upper bound for the Sauer check.
    """
    universe = [tuple(x) for x in universe]
    U, K = len(universe), len(family.polys)
    cost = sum(comb(U, j) * 2**j * K for j in range(s_max + 1))
    if cost > budget:
        raise BudgetExceeded(f"search cost {cost} exceeds {budget}")
    mat = family.nonzero_matrix(universe)
    s, witness = (0, ()) if K else (-1, None)
    exhausted = False
    for j in range(1, s_max + 1):
        found = None
        for subset in itertools.combinations(range(U), j):
            patterns = set(map(tuple, mat[:, subset]))
            if len(patterns) == 2**j:
                found = subset
                break
        if found is None:
            exhausted = True
            break
        s, witness = j, tuple(universe[i] for i in found)
    verified = witness is not None and all(
        _realizes(family, witness, pat) for pat in itertools.product((False, True), repeat=len(witness)))
    upper = declared_vc_upper
    if upper is None and pool_is_domain and exhausted:
        upper = s
    sauer = []
    for m in sauer_ms:
        g = len(set(_row_codes(mat[:, :m]))) if m else 1
        if upper is None:
            sauer.append({"m": m, "measured": g, "bound": None, "ok": None})
        else:
            b = sauer_bound(m, upper)
            sauer.append({"m": m, "measured": g, "bound": b, "ok": g <= b})
    grad = family.d + 1
    lhs = krull_lhs(max(s, 0), family.omega_deg_lci, grad)
    return {
        "vc_lower_bound": s,
        "shattered_witness": [list(x) for x in witness] if witness is not None else None,
        "witness_verified": verified,
        "vc_upper_used": upper,
        "sauer": sauer,
        "sauer_ok": None if upper is None else all(r["ok"] for r in sauer),
        "krull": {"lhs": lhs, "rhs": family.omega_dim, "ok": lhs <= family.omega_dim},
        "krull_ok": lhs <= family.omega_dim,
    }


# Pham systems

def rank_mod_p(rows, p):
    m = [[v % p for v in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [v * inv % p for v in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


@dataclass
class PhamSystem:
    """f_i = sum_j a_ij X_j^(d_j), replicated over n/m blocks of variables."""

    field: FieldSpec
    matrix: list
    degrees: tuple
    num_vars: int
    D: int = 1

    def __post_init__(self):
        p = self.field.prime
        k, m = len(self.matrix), len(self.degrees)
        if any(len(r) != m for r in self.matrix):
            raise ValueError("matrix width must equal the number of degrees")
        if not m > k >= 1:
            raise ValueError("need m > k >= 1")
        if self.num_vars % m:
            raise ValueError("m must divide the number of variables")
        if rank_mod_p(self.matrix, p) < k:
            raise DegenerateSystem(f"matrix has rank below {k} over F_{p}")
        ds = self.degrees
        if any(a <= b for a, b in zip(ds, ds[1:])):
            raise ValueError("degrees must be strictly decreasing")
        if any(math.gcd(a, b) != 1 for a, b in itertools.combinations(ds, 2)):
            raise ValueError("degrees must be pairwise coprime")
        if ds[-1] <= self.D:
            raise ValueError("all degrees must exceed D")

    @property
    def k(self):
        return len(self.matrix)

    @property
    def m(self):
        return len(self.degrees)

    def polys(self):
        """f_ij = f_i on the j-th block of m variables."""
        fld, n, m = self.field, self.num_vars, self.m
        out = []
        for row in self.matrix:
            for blk in range(n // m):
                f = SparsePoly.zero(fld, n)
                for j, (a, dj) in enumerate(zip(row, self.degrees)):
                    f = f + SparsePoly.variable(fld, n, blk * m + j + 1) ** dj * a
                out.append(f)
        return out


def pham_evasive_check(sys, V, f=None, budget=DEFAULT_POINT_BUDGET):
    """Count F_q-points of V on the Pham variety and look for a point of V off V(f)."""
    fld, n = sys.field, sys.num_vars
    eqs = sys.polys()
    count = 0
    witness = None
    for x in _points(fld, n, budget):
        if not V.contains(x):
            continue
        if all(not g.eval_raw(x) for g in eqs):
            count += 1
        if f is not None and witness is None and f.eval_raw(x):
            witness = x
    D = V.deg_lci if V.deg_lci is not None else sys.D
    k = V.dim if V.dim is not None else sys.k
    bound = pham_bound(D, sys.degrees[0], k)
    return {
        "intersection_count": count,
        "bound": bound,
        "within_bound": count <= bound,
        "witness_nonvanishing": None if witness is None else [str(FieldElement(fld, v)) for v in witness],
    }


def random_line(fld, rng):
    """Line a*x1 + b*x2 + c = 0 in the plane with (a, b) != (0, 0)."""
    p = fld.prime
    while True:
        a, b, c = (int(v) for v in rng.integers(0, p, size=3))
        if a or b:
            break
    f = SparsePoly(fld, 2, {(1, 0): a, (0, 1): b, (0, 0): c})
    return Constructible(("eq", f), dim=1, deg_lci=1, provenance="line: degree 1, dimension 1")


def random_lines(fld, count, seed):
    return [random_line(fld, stream(seed, STREAM_LINES, i)) for i in range(count)]


def hypersurface_evasive_check(V, family, fld, num_vars, budget=DEFAULT_POINT_BUDGET):
    """For each nonzero member of the family, the first F_q-point of V where it is nonzero.

    ``evasive_visible`` is True when every nonzero member has such a point;
    a member vanishing on all F_q-points of V is listed in ``unresolved``.
    """
    pts = [x for x in _points(fld, num_vars, budget) if V.contains(x)]
    witnesses = {}
    unresolved = []
    for f in family:
        if f.is_zero():
            continue
        w = next((x for x in pts if f.eval_raw(x)), None)
        if w is None:
            unresolved.append(f.format())
        else:
            witnesses[f.format()] = [str(FieldElement(fld, v)) for v in w]
    return {"witnesses": witnesses, "unresolved": unresolved, "evasive_visible": not unresolved}


__all__ = [
    "Constructible", "CellExperiment", "CellReport", "cells_enumerate", "la_croix_de_berny",
    "projection_points", "ClassifierFamily", "all_polys_family", "growth_measure", "vcdim_search",
    "PhamSystem", "pham_evasive_check", "random_line", "random_lines", "hypersurface_evasive_check",
    "rank_mod_p",
]
