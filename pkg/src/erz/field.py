"""Exact arithmetic over prime fields F_p and the rationals.

A :class:`FieldSpec` names the field.  Values live in two forms:

* raw canonical values (``int`` in ``[0, p)`` for F_p, ``fractions.Fraction``
  for Q) which the hot loops in the evaluator and polynomial code use, and
* :class:`FieldElement`, an immutable wrapper carrying its field, used on the
  public surface.

F_p stands in for an algebraically closed field.  Point enumerations over
F_p only see F_p-rational points, so any "count <= bound" check built on them
is one-sided.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from sympy import isprime

from .errors import DivisionByZero, MixedField, ParseError

MAX_PRIME = 2**63

_NUMBER = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


@dataclass(frozen=True)
class FieldSpec:
    """F_p when ``prime`` is set, otherwise the rationals."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None:
            p = self.prime
            if not isinstance(p, int) or p < 2 or p >= MAX_PRIME or not isprime(p):
                raise ValueError(f"field modulus must be a prime below 2**63, got {p!r}")

    @classmethod
    def rationals(cls):
        return cls(None)

    @property
    def is_prime(self):
        return self.prime is not None

    @property
    def characteristic(self):
        return self.prime if self.prime is not None else 0

    @property
    def zero(self):
        return 0 if self.prime is not None else Fraction(0)

    @property
    def one(self):
        return 1 if self.prime is not None else Fraction(1)

    # raw-value helpers

    def normalize(self, x):
        """Canonical raw value for an int, Fraction or FieldElement."""
        if isinstance(x, FieldElement):
            if x.field != self:
                raise MixedField(f"element of {x.field} used in {self}")
            return x.value
        if isinstance(x, str):
            return self.parse_value(x)
        p = self.prime
        if p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % p == 0:
                raise DivisionByZero(f"denominator of {x} vanishes mod {p}")
            return x.numerator * pow(x.denominator, -1, p) % p
        if isinstance(x, bool) or not isinstance(x, int):
            x = int(x)
        return x % p

    def inv(self, a):
        if not a:
            raise DivisionByZero("inverse of zero")
        if self.prime is None:
            return 1 / a
        return pow(a, -1, self.prime)

    def div(self, a, b):
        if self.prime is None:
            if not b:
                raise DivisionByZero("division by zero")
            return a / b
        return a * self.inv(b) % self.prime

    def power(self, a, k):
        if k < 0:
            return self.power(self.inv(a), -k)
        if self.prime is None:
            return a**k
        return pow(a, k, self.prime)

    def format_value(self, a):
        if self.prime is None:
            a = Fraction(a)
            if a.denominator == 1:
                return str(a.numerator)
            return f"{a.numerator}/{a.denominator}"
        return str(a)

    def parse_value(self, text):
        m = _NUMBER.match(str(text))
        if not m:
            raise ParseError(f"not a field element: {text!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise ParseError(f"zero denominator in {text!r}")
        if self.prime is None:
            return Fraction(num, den)
        if den % self.prime == 0:
            raise ParseError(f"denominator of {text!r} vanishes mod {self.prime}")
        return num * pow(den, -1, self.prime) % self.prime

    def elements(self, count=None):
        """The first ``count`` canonical elements: 0, 1, 2, ..."""
        if count is None:
            if self.prime is None:
                raise ValueError("the rationals cannot be enumerated")
            count = self.prime
        if self.prime is not None and count > self.prime:
            raise ValueError(f"F_{self.prime} has fewer than {count} elements")
        return tuple(self.normalize(i) for i in range(count))

    # element-level helpers

    def __call__(self, x):
        return FieldElement(self, self.normalize(x))

    def parse(self, text):
        return FieldElement(self, self.parse_value(text))

    def to_json(self):
        return "rationals" if self.prime is None else {"prime": self.prime}

    @classmethod
    def from_json(cls, obj):
        if obj == "rationals" or obj == "Q":
            return cls(None)
        if isinstance(obj, int):
            return cls(obj)
        if isinstance(obj, str) and obj.isdigit():
            return cls(int(obj))
        if isinstance(obj, dict) and "prime" in obj:
            return cls(int(obj["prime"]))
        raise ParseError(f"bad field description: {obj!r}")

    def __str__(self):
        return "Q" if self.prime is None else f"F_{self.prime}"


class FieldElement:
    """Immutable element of a :class:`FieldSpec`."""

    __slots__ = ("field", "value")

    def __init__(self, field, value):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise MixedField(f"{self.field} vs {other.field}")
            return other.value
        if isinstance(other, (int, Fraction)):
            return self.field.normalize(other)
        return NotImplemented

    def _wrap(self, v):
        return FieldElement(self.field, self.field.normalize(v))

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self._wrap(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.field, self.field.div(self.value, o))

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.field, self.field.div(o, self.value))

    def __neg__(self):
        return self._wrap(-self.value)

    def __pow__(self, k):
        return FieldElement(self.field, self.field.power(self.value, int(k)))

    def inv(self):
        return FieldElement(self.field, self.field.inv(self.value))

    def __bool__(self):
        return bool(self.value)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, (int, Fraction)):
            try:
                return self.value == self.field.normalize(other)
            except DivisionByZero:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def __int__(self):
        if self.field.prime is None and self.value.denominator != 1:
            raise ValueError(f"{self} is not an integer")
        return int(self.value)

    def __str__(self):
        return self.field.format_value(self.value)

    def __repr__(self):
        return f"FieldElement({self.field}, {self})"


_OPS = ("add", "sub", "mul", "div", "inv", "pow", "parse", "format")


def fe_ops(spec, lhs, rhs=None, op="add"):
    """Single entry point for element arithmetic.

    ``inv`` and ``format`` ignore ``rhs``; ``pow`` takes an integer exponent
    as ``rhs``; ``parse`` takes the text as ``lhs``.
    """
    if op not in _OPS:
        raise ValueError(f"unknown op {op!r}")
    if op == "parse":
        return spec.parse(lhs)
    a = spec(lhs) if not isinstance(lhs, FieldElement) else lhs
    if a.field != spec:
        raise MixedField(f"{a.field} operand for {spec}")
    if op == "format":
        return str(a)
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** int(rhs)
    b = spec(rhs) if not isinstance(rhs, FieldElement) else rhs
    if b.field != spec:
        raise MixedField(f"{b.field} operand for {spec}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    return a / b
