"""Sparse multivariate polynomials and brute-force zero testing."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ArityMismatch, BudgetExceeded, MixedField, ParseError
from .field import FieldElement, FieldSpec

DEFAULT_POINT_BUDGET = 10**7


class SparsePoly:
    """Polynomial in ``num_vars`` variables as ``{exponent tuple: coefficient}``.

    Coefficients are raw canonical field values and never zero.  Instances are
    treated as immutable.
    """

    __slots__ = ("field", "num_vars", "terms", "_hash")

    def __init__(self, field, num_vars, terms=None):
        self.field = field
        self.num_vars = num_vars
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != num_vars or any(e < 0 for e in exps):
                    raise ArityMismatch(f"bad exponent vector {exps} for {num_vars} variables")
                c = field.normalize(clean.get(exps, 0) + field.normalize(c))
                if c:
                    clean[exps] = c
                else:
                    clean.pop(exps, None)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, field, num_vars, terms):
        # trusted constructor: terms already canonical and nonzero
        obj = cls.__new__(cls)
        obj.field = field
        obj.num_vars = num_vars
        obj.terms = terms
        obj._hash = None
        return obj

    # constructors

    @classmethod
    def zero(cls, field, num_vars):
        return cls._raw(field, num_vars, {})

    @classmethod
    def constant(cls, field, num_vars, c):
        return cls(field, num_vars, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, field, num_vars, j):
        """The variable x_j, 1-based."""
        if not 1 <= j <= num_vars:
            raise ArityMismatch(f"x{j} out of range for {num_vars} variables")
        exps = [0] * num_vars
        exps[j - 1] = 1
        return cls._raw(field, num_vars, {tuple(exps): field.one})

    # structure

    def is_zero(self):
        return not self.terms

    def total_degree(self):
        """Largest total degree of a term; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def coefficient(self, exps):
        return FieldElement(self.field, self.terms.get(tuple(exps), self.field.zero))

    def _check(self, other):
        if not isinstance(other, SparsePoly):
            return self.constant(self.field, self.num_vars, other)
        if other.field != self.field:
            raise MixedField(f"{self.field} vs {other.field}")
        if other.num_vars != self.num_vars:
            raise ArityMismatch(f"{self.num_vars} vs {other.num_vars} variables")
        return other

    # arithmetic

    def __add__(self, other):
        other = self._check(other)
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return self._combine(other, -1)

    def __rsub__(self, other):
        return self._check(other) - self

    def _combine(self, other, sign):
        norm = self.field.normalize
        out = dict(self.terms)
        for exps, c in other.terms.items():
            v = norm(out.get(exps, 0) + sign * c)
            if v:
                out[exps] = v
            else:
                out.pop(exps, None)
        return SparsePoly._raw(self.field, self.num_vars, out)

    def __neg__(self):
        norm = self.field.normalize
        return SparsePoly._raw(self.field, self.num_vars, {e: norm(-c) for e, c in self.terms.items()})

    def scale(self, c):
        c = self.field.normalize(c)
        if not c:
            return SparsePoly.zero(self.field, self.num_vars)
        norm = self.field.normalize
        return SparsePoly._raw(self.field, self.num_vars, {e: norm(v * c) for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            return self.scale(other)
        other = self._check(other)
        norm = self.field.normalize
        acc = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0) + c1 * c2
        out = {}
        for e, c in acc.items():
            c = norm(c)
            if c:
                out[e] = c
        return SparsePoly._raw(self.field, self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = SparsePoly.constant(self.field, self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # evaluation

    def eval_raw(self, point):
        p = self.field.prime
        total = 0
        if p is None:
            for exps, c in self.terms.items():
                t = c
                for x, e in zip(point, exps):
                    if e:
                        t = t * x**e
                total += t
            return Fraction(total)
        for exps, c in self.terms.items():
            t = c
            for x, e in zip(point, exps):
                if e:
                    t = t * pow(x, e, p)
            total += t
        return total % p

    def eval(self, point):
        if len(point) != self.num_vars:
            raise ArityMismatch(f"point of length {len(point)} for {self.num_vars} variables")
        raw = tuple(self.field.normalize(x) for x in point)
        return FieldElement(self.field, self.eval_raw(raw))

    __call__ = eval

    # comparison

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return (self.field == other.field and self.num_vars == other.num_vars
                    and self.terms == other.terms)
        if isinstance(other, (int, Fraction, FieldElement)):
            try:
                return self == self._check(other)
            except (MixedField, ArityMismatch):
                return False
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self.num_vars, frozenset(self.terms.items())))
        return self._hash

    # text

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-e for e in t[0])))

    def format(self):
        if not self.terms:
            return "0"
        pieces = []
        for exps, c in self.sorted_terms():
            neg = self.field.prime is None and c < 0
            mag = -c if neg else c
            factors = []
            for j, e in enumerate(exps, start=1):
                if e == 1:
                    factors.append(f"x{j}")
                elif e > 1:
                    factors.append(f"x{j}^{e}")
            coeff = self.field.format_value(mag)
            if factors and coeff == "1":
                body = "*".join(factors)
            else:
                body = "*".join([coeff] + factors)
            if not pieces:
                pieces.append(("-" if neg else "") + body)
            else:
                pieces.append(("- " if neg else "+ ") + body)
        return " ".join(pieces)

    __str__ = format

    def __repr__(self):
        return f"SparsePoly({self.field}, {self.num_vars}, {self.format()!r})"

    @classmethod
    def parse(cls, field, text, num_vars=None):
        """Parse ``"3*x1^2*x2 + 5"``-style text; variables are x1, x2, ..."""
        s = str(text).replace(" ", "")
        if not s:
            raise ParseError("empty polynomial text")
        chunks = re.findall(r"[+-]?[^+-]+", s)
        if "".join(chunks) != s:
            raise ParseError(f"malformed polynomial: {text!r}")
        parsed = []
        max_var = 0
        for chunk in chunks:
            sign = -1 if chunk.startswith("-") else 1
            body = chunk.lstrip("+-")
            if not body:
                raise ParseError(f"dangling sign in {text!r}")
            coeff = Fraction(1)
            powers = {}
            for factor in body.split("*"):
                m = re.fullmatch(r"x(\d+)(?:\^(\d+))?", factor)
                if m:
                    j = int(m.group(1))
                    if j < 1:
                        raise ParseError(f"variable index must start at 1: {factor!r}")
                    powers[j] = powers.get(j, 0) + int(m.group(2) or 1)
                    max_var = max(max_var, j)
                    continue
                m = re.fullmatch(r"(\d+)(?:/(\d+))?", factor)
                if not m:
                    raise ParseError(f"bad factor {factor!r} in {text!r}")
                den = int(m.group(2) or 1)
                if den == 0:
                    raise ParseError(f"zero denominator in {text!r}")
                coeff *= Fraction(int(m.group(1)), den)
            parsed.append((sign * coeff, powers))
        if num_vars is None:
            num_vars = max_var
        elif max_var > num_vars:
            raise ArityMismatch(f"x{max_var} used with {num_vars} variables")
        terms = {}
        for coeff, powers in parsed:
            exps = tuple(powers.get(j, 0) for j in range(1, num_vars + 1))
            terms[exps] = field.normalize(terms.get(exps, 0) + field.normalize(coeff))
        return cls(field, num_vars, terms)


def poly_ops(lhs, rhs=None, op="add", point=None, scalar=None):
    """Functional front end over :class:`SparsePoly` operations."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "scale":
        return lhs.scale(scalar)
    if op == "eval":
        return lhs.eval(point)
    if op == "total_degree":
        return lhs.total_degree()
    if op == "equals":
        lhs._check(rhs)
        return lhs == rhs
    raise ValueError(f"unknown op {op!r}")


@dataclass(frozen=True)
class GridSpec:
    """The grid S^n where S holds the first ``side`` canonical field elements.

    It is the zero set of h_i = prod_{a in S}(x_i - a), each of degree
    ``side``, and has exactly side**num_vars points.
    """

    field: FieldSpec
    num_vars: int
    side: int

    def __post_init__(self):
        if self.side < 1:
            raise ValueError("grid side must be positive")
        if self.field.prime is not None and self.side > self.field.prime:
            raise ValueError(f"grid side {self.side} exceeds field size {self.field.prime}")

    @classmethod
    def full(cls, field, num_vars):
        if field.prime is None:
            raise ValueError("full affine space over Q is not enumerable")
        return cls(field, num_vars, field.prime)

    @property
    def axis(self):
        return self.field.elements(self.side)

    @property
    def size(self):
        return self.side**self.num_vars

    def points(self):
        """Grid points in lexicographic order."""
        return itertools.product(self.axis, repeat=self.num_vars)

    def vanishing_polys(self):
        out = []
        for i in range(1, self.num_vars + 1):
            h = SparsePoly.constant(self.field, self.num_vars, 1)
            xi = SparsePoly.variable(self.field, self.num_vars, i)
            for a in self.axis:
                h = h * (xi - a)
            out.append(h)
        return out


@dataclass(frozen=True)
class ZeroReport:
    is_identically_zero_on_domain: bool
    zero_count: int
    witness: tuple | None
    domain_size: int
    grid_bound: int | None
    grid_bound_ok: bool | None


def poly_zero_oracle(f, domain=None, budget=DEFAULT_POINT_BUDGET):
    """Count zeros of ``f`` on a grid (default: all of F_p^n) by enumeration.

    The witness is the lexicographically first point where ``f`` is nonzero.
    For a nonzero ``f`` of degree D < side the count is compared with the
    grid zero bound D * side**(n-1).
    """
    if domain is None:
        domain = GridSpec.full(f.field, f.num_vars)
    if domain.field != f.field:
        raise MixedField(f"{f.field} polynomial on a {domain.field} grid")
    if domain.num_vars != f.num_vars:
        raise ArityMismatch(f"{f.num_vars}-variate polynomial on a {domain.num_vars}-dim grid")
    if domain.size > budget:
        raise BudgetExceeded(f"{domain.size} points exceed budget {budget}")
    zeros = 0
    witness = None
    for x in domain.points():
        if f.eval_raw(x):
            if witness is None:
                witness = x
        else:
            zeros += 1
    D = f.total_degree()
    bound = ok = None
    if 0 <= D < domain.side:
        bound = D * domain.side ** (f.num_vars - 1)
        ok = zeros <= bound
    if witness is not None:
        witness = tuple(FieldElement(f.field, v) for v in witness)
    return ZeroReport(
        is_identically_zero_on_domain=witness is None,
        zero_count=zeros,
        witness=witness,
        domain_size=domain.size,
        grid_bound=bound,
        grid_bound_ok=ok,
    )
