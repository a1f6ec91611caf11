"""Exact multivariate polynomial calculus over the rationals.

This module is the exact reference oracle for the floating-point machinery:
every coefficient is a fractions.Fraction and no floating point enters any
computation here.  Decimal literals coming from parsed expressions are read
as exact decimals ("0.25" means 1/4, "0.1" means 1/10).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import expression as ex
from .errors import BoxcalcError, DomainError, InternalCheckError
from .geometry import Hypercuboid


class NonPolynomialError(BoxcalcError):
    """The expression cannot be converted to an exact polynomial."""


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial: exponent tuple -> nonzero rational coefficient.

    The zero polynomial has an empty term map.  Equality is semantic (term
    maps compare independent of insertion order); printing is canonicalized
    in graded lexicographic order, highest degree first.
    """

    arity: int
    terms: Mapping[tuple[int, ...], Fraction]

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise DomainError(f"arity must be nonnegative, got {self.arity}")
        clean = {}
        for exps, coeff in self.terms.items():
            exps = tuple(int(k) for k in exps)
            if len(exps) != self.arity:
                raise DomainError(f"exponent tuple {exps} does not match arity {self.arity}")
            if any(k < 0 for k in exps):
                raise DomainError(f"negative exponent in {exps}")
            coeff = Fraction(coeff)
            if coeff != 0:
                clean[exps] = coeff
        object.__setattr__(self, "terms", clean)

    @classmethod
    def constant(cls, arity: int, value) -> "Polynomial":
        value = Fraction(value)
        if value == 0:
            return cls(arity, {})
        return cls(arity, {(0,) * arity: value})

    @classmethod
    def variable(cls, arity: int, index: int) -> "Polynomial":
        if not 1 <= index <= arity:
            raise DomainError(f"variable x{index} does not exist at arity {arity}")
        exps = tuple(1 if j == index - 1 else 0 for j in range(arity))
        return cls(arity, {exps: Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(exps) == 0 for exps in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise DomainError("polynomial is not constant")
        return self.terms.get((0,) * self.arity, Fraction(0))

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.arity != self.arity:
                raise DomainError(f"arity mismatch: {self.arity} vs {other.arity}")
            return other
        return Polynomial.constant(self.arity, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + coeff
        return Polynomial(self.arity, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.arity, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                terms[exps] = terms.get(exps, Fraction(0)) + c1 * c2
        return Polynomial(self.arity, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise DomainError(f"polynomial power must be a nonnegative integer, got {k!r}")
        out = Polynomial.constant(self.arity, 1)
        for _ in range(k):
            out = out * self
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        ordered = sorted(self.terms, key=lambda e: (sum(e), e), reverse=True)
        pieces = []
        for exps in ordered:
            coeff = self.terms[exps]
            factors = [
                f"x{j + 1}" + (f"^{k}" if k > 1 else "")
                for j, k in enumerate(exps)
                if k > 0
            ]
            if not factors:
                pieces.append(str(coeff))
            elif coeff == 1:
                pieces.append("*".join(factors))
            elif coeff == -1:
                pieces.append("-" + "*".join(factors))
            else:
                pieces.append(str(coeff) + "*" + "*".join(factors))
        out = pieces[0]
        for piece in pieces[1:]:
            out += " - " + piece[1:] if piece.startswith("-") else " + " + piece
        return out


def _max_var_index(node: ex.Expr) -> int:
    if isinstance(node, ex.Var):
        return node.index
    if isinstance(node, ex.Neg):
        return _max_var_index(node.operand)
    if isinstance(node, ex.BinOp):
        return max(_max_var_index(node.left), _max_var_index(node.right))
    if isinstance(node, ex.Call):
        return max((_max_var_index(a) for a in node.args), default=0)
    return 0


def _int_exponent(p: Polynomial) -> int:
    if not p.is_constant():
        raise NonPolynomialError("exponent must be a constant")
    c = p.constant_value()
    if c.denominator != 1:
        raise NonPolynomialError(f"fractional exponent {c}")
    if c < 0:
        raise NonPolynomialError(f"negative exponent {c}")
    return int(c)


def _build(node: ex.Expr, arity: int) -> Polynomial:
    if isinstance(node, ex.Num):
        return Polynomial.constant(arity, Fraction(node.text))
    if isinstance(node, ex.Var):
        return Polynomial.variable(arity, node.index)
    if isinstance(node, ex.Const):
        raise NonPolynomialError(f"constant '{node.name}' is not rational")
    if isinstance(node, ex.Neg):
        return -_build(node.operand, arity)
    if isinstance(node, ex.BinOp):
        if node.op == "+":
            return _build(node.left, arity) + _build(node.right, arity)
        if node.op == "-":
            return _build(node.left, arity) - _build(node.right, arity)
        if node.op == "*":
            return _build(node.left, arity) * _build(node.right, arity)
        if node.op == "/":
            denom = _build(node.right, arity)
            if not denom.is_constant():
                raise NonPolynomialError("division by a non-constant expression")
            c = denom.constant_value()
            if c == 0:
                raise NonPolynomialError("division by zero")
            return _build(node.left, arity) * Polynomial.constant(arity, 1 / c)
        if node.op == "^":
            return _build(node.left, arity) ** _int_exponent(_build(node.right, arity))
    if isinstance(node, ex.Call):
        if node.name == "pow":
            return _build(node.args[0], arity) ** _int_exponent(_build(node.args[1], arity))
        raise NonPolynomialError(f"'{node.name}' is not polynomial")
    raise TypeError(f"not an expression node: {node!r}")


def poly_from_expr(node: ex.Expr, arity: int | None = None) -> Polynomial:
    """Expand an expression into an exact polynomial.

    Allowed constructs: numeric literals (read as exact decimals), variables,
    +, -, *, ^ or pow with constant nonnegative integer exponents, and
    division by a nonzero constant.  Anything else raises
    NonPolynomialError.
    """
    top = _max_var_index(node)
    if arity is None:
        arity = top
    elif top > arity:
        raise DomainError(f"expression uses x{top} but arity is {arity}")
    return _build(node, arity)


def poly_eval(p: Polynomial, point) -> Fraction:
    """Exact value at a rational point."""
    point = tuple(point)
    if len(point) != p.arity:
        raise DomainError(f"point has {len(point)} coordinates, arity is {p.arity}")
    coords = [Fraction(x) for x in point]
    total = Fraction(0)
    for exps, coeff in p.terms.items():
        v = coeff
        for x, k in zip(coords, exps):
            if k:
                v *= x**k
        total += v
    return total


def _integrate_axis(p: Polynomial, j: int, a: Fraction) -> Polynomial:
    terms: dict[tuple[int, ...], Fraction] = {}

    def add(exps, coeff):
        terms[exps] = terms.get(exps, Fraction(0)) + coeff

    for exps, coeff in p.terms.items():
        k = exps[j]
        c1 = coeff / (k + 1)
        add(exps[:j] + (k + 1,) + exps[j + 1 :], c1)
        if a != 0:
            add(exps[:j] + (0,) + exps[j + 1 :], -c1 * a ** (k + 1))
    return Polynomial(p.arity, terms)


def poly_antiderivative(p: Polynomial, corner) -> Polynomial:
    """Iterated exact antiderivative vanishing on every corner hyperplane.

    Axis by axis, each monomial c*x^k becomes c*(x^(k+1) - a^(k+1))/(k+1),
    so the result's mixed partial is p and the result is zero whenever some
    coordinate equals the matching corner coordinate.
    """
    corner = tuple(corner)
    if len(corner) != p.arity:
        raise DomainError(f"corner has {len(corner)} coordinates, arity is {p.arity}")
    out = p
    for j, a in enumerate(corner):
        out = _integrate_axis(out, j, Fraction(a))
    return out


def poly_mixed_partial(p: Polynomial) -> Polynomial:
    """One derivative along every axis, exactly."""
    out = p
    for j in range(p.arity):
        terms: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in out.terms.items():
            k = exps[j]
            if k == 0:
                continue
            down = exps[:j] + (k - 1,) + exps[j + 1 :]
            terms[down] = terms.get(down, Fraction(0)) + coeff * k
        out = Polynomial(p.arity, terms)
    return out


def _box_corners(box) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    if isinstance(box, Hypercuboid):
        lo, hi = box.lower, box.upper
    else:
        lo, hi = box
    lo = tuple(Fraction(x) for x in lo)
    hi = tuple(Fraction(x) for x in hi)
    if len(lo) != len(hi):
        raise DomainError(f"bound lengths differ: {len(lo)} vs {len(hi)}")
    for j, (a, b) in enumerate(zip(lo, hi), start=1):
        if a > b:
            raise DomainError(f"axis {j}: lower bound {a} exceeds upper bound {b}")
    return lo, hi


def poly_vertex_sum(p: Polynomial, box) -> Fraction:
    """Alternating sum of p over the box vertices, exact.

    The sign of a vertex is +1 when it uses an even number of lower bounds.
    """
    lo, hi = _box_corners(box)
    if len(lo) != p.arity:
        raise DomainError(f"box has {len(lo)} axes, arity is {p.arity}")
    total = Fraction(0)
    for bits in itertools.product((0, 1), repeat=len(lo)):
        sign = -1 if bits.count(0) % 2 else 1
        point = tuple(b if bit else a for a, b, bit in zip(lo, hi, bits))
        total += sign * poly_eval(p, point)
    return total


def vertex_sum_integral(p: Polynomial, box) -> Fraction:
    """Box integral via the alternating vertex sum of the exact antiderivative."""
    lo, hi = _box_corners(box)
    if len(lo) != p.arity:
        raise DomainError(f"box has {len(lo)} axes, arity is {p.arity}")
    F = poly_antiderivative(p, lo)
    return poly_vertex_sum(F, (lo, hi))


def monomial_product_integral(p: Polynomial, box) -> Fraction:
    """Box integral as a sum over monomials of products of 1-d integrals."""
    lo, hi = _box_corners(box)
    if len(lo) != p.arity:
        raise DomainError(f"box has {len(lo)} axes, arity is {p.arity}")
    total = Fraction(0)
    for exps, coeff in p.terms.items():
        v = coeff
        for a, b, k in zip(lo, hi, exps):
            v *= (b ** (k + 1) - a ** (k + 1)) / (k + 1)
        total += v
    return total


def poly_box_integral(p: Polynomial, box) -> Fraction:
    """Exact box integral, computed by two routes that must agree.

    Route one is the alternating vertex sum of the exact antiderivative;
    route two integrates each monomial as a product of 1-d integrals.  A
    mismatch means a bug in this module, never bad input.
    """
    via_vertices = vertex_sum_integral(p, box)
    via_products = monomial_product_integral(p, box)
    if via_vertices != via_products:
        raise InternalCheckError(
            f"integral routes disagree: vertex sum {via_vertices} vs product {via_products}"
        )
    return via_vertices
