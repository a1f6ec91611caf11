"""Shared helpers: relative error and seeded random generators for cases."""

from fractions import Fraction

from boxcalc import Hypercuboid, Polynomial


def rel_err(value: float, ref: float) -> float:
    return abs(value - ref) / max(1.0, abs(ref))


def random_polynomial(rng, arity, max_degree=4, max_terms=5) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = tuple(rng.randint(0, max_degree) for _ in range(arity))
        coeff = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        terms[exps] = terms.get(exps, Fraction(0)) + coeff
    terms = {e: c for e, c in terms.items() if c}
    if not terms:
        terms = {(0,) * arity: Fraction(1)}
    return Polynomial(arity, terms)


def random_rational_box(rng, arity, span=3) -> Hypercuboid:
    lower = []
    upper = []
    for _ in range(arity):
        a = Fraction(rng.randint(-4 * span, 4 * span), 4)
        b = a + Fraction(rng.randint(1, 4 * span), 4)
        lower.append(a)
        upper.append(b)
    return Hypercuboid(tuple(lower), tuple(upper))


def random_float_box(rng, arity, lo=-2.0, hi=2.0, max_extent=1.5) -> Hypercuboid:
    lower = []
    upper = []
    for _ in range(arity):
        a = rng.uniform(lo, hi - 0.1)
        b = a + rng.uniform(0.1, max_extent)
        lower.append(a)
        upper.append(b)
    return Hypercuboid(tuple(lower), tuple(upper))
