import math
import random
from fractions import Fraction

import numpy as np
import pytest

import boxcalc.oracle as oracle
from boxcalc import (
    BudgetExceededError,
    DomainError,
    Hypercuboid,
    MonteCarloEstimate,
    QuadratureConfig,
    field_from_callable,
    field_from_expression,
    field_from_polynomial,
    gauss_legendre_box,
    legendre_rule,
    monomial_product_integral,
    monte_carlo_affine,
    poly_from_expr,
)
from helpers import random_polynomial, random_rational_box, rel_err


class TestLegendreRule:
    @pytest.mark.parametrize("q", [2, 3, 5, 12, 32])
    def test_rule_shape_and_weights(self, q):
        nodes, weights = legendre_rule(q)
        assert nodes.shape == weights.shape == (q,)
        assert math.fsum(weights) == pytest.approx(2.0, abs=1e-14)
        assert np.all(weights > 0)
        assert np.all(np.diff(nodes) > 0)
        assert nodes[0] > -1 and nodes[-1] < 1

    @pytest.mark.parametrize("q", [2, 4, 8, 16])
    def test_symmetry(self, q):
        nodes, weights = legendre_rule(q)
        assert np.allclose(nodes, -nodes[::-1], atol=1e-15)
        assert np.allclose(weights, weights[::-1], atol=1e-15)

    @pytest.mark.parametrize("q", [2, 3, 7, 12])
    def test_exact_on_monomials_up_to_degree_2q_minus_1(self, q):
        nodes, weights = legendre_rule(q)
        for k in range(2 * q):
            got = math.fsum(weights * nodes**k)
            want = 0.0 if k % 2 else 2.0 / (k + 1)
            assert abs(got - want) < 5e-15

    def test_cached(self):
        assert legendre_rule(12) is legendre_rule(12)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            legendre_rule(1)
        with pytest.raises(DomainError):
            legendre_rule(33)


class TestQuadratureConfig:
    def test_defaults(self):
        cfg = QuadratureConfig()
        assert (cfg.nodes, cfg.panels, cfg.max_evals) == (12, 4, 10**8)

    @pytest.mark.parametrize("bad", [{"nodes": 1}, {"nodes": 33}, {"panels": 0}, {"max_evals": 0}])
    def test_validation(self, bad):
        with pytest.raises(DomainError):
            QuadratureConfig(**bad)


class TestGaussLegendreBox:
    def test_polynomials_within_degree_bound(self):
        rng = random.Random(5)
        cfg = QuadratureConfig(nodes=8, panels=2)
        for _ in range(25):
            arity = rng.randint(1, 3)
            p = random_polynomial(rng, arity, max_degree=4)
            box = random_rational_box(rng, arity)
            want = float(monomial_product_integral(p, box))
            got = gauss_legendre_box(field_from_polynomial(p), box, cfg)
            assert rel_err(got, want) < 1e-12

    def test_sin_over_period(self):
        f = field_from_expression("sin(x1)", 1)
        box = Hypercuboid((0.0,), (math.pi,))
        assert abs(gauss_legendre_box(f, box) - 2.0) < 1e-13

    def test_degenerate_axis_is_exactly_zero(self):
        f = field_from_expression("exp(x1)+x2", 2)
        box = Hypercuboid((0.0, 1.5), (2.0, 1.5))
        assert gauss_legendre_box(f, box) == 0.0

    def test_budget_refused(self):
        f = field_from_expression("x1*x2", 2)
        box = Hypercuboid((0.0, 0.0), (1.0, 1.0))
        with pytest.raises(BudgetExceededError, match="exceed the budget"):
            gauss_legendre_box(f, box, QuadratureConfig(nodes=12, panels=4, max_evals=1000))

    def test_arity_mismatch(self):
        f = field_from_expression("x1", 1)
        with pytest.raises(DomainError):
            gauss_legendre_box(f, Hypercuboid((0.0, 0.0), (1.0, 1.0)))

    def test_block_size_does_not_change_the_value(self, monkeypatch):
        f = field_from_expression("sin(x1)*exp(x2)", 2)
        box = Hypercuboid((Fraction(-1, 2), 0), (2, Fraction(3, 4)))
        whole = gauss_legendre_box(f, box)
        monkeypatch.setattr(oracle, "_EVAL_BLOCK", 37)
        chunked = gauss_legendre_box(f, box)
        assert rel_err(chunked, whole) < 1e-14

    def test_deterministic(self):
        f = field_from_expression("exp(x1*x2)", 2)
        box = Hypercuboid((0.0, 0.0), (1.0, 2.0))
        assert gauss_legendre_box(f, box) == gauss_legendre_box(f, box)

    def test_rational_bounds_accepted(self):
        f = field_from_expression("1", 1)
        box = Hypercuboid((Fraction(1, 3),), (Fraction(2, 3),))
        assert abs(gauss_legendre_box(f, box) - 1 / 3) < 1e-15


class TestMonteCarlo:
    def test_constant_is_exact(self):
        f = field_from_expression("3", 2)
        est = monte_carlo_affine(f, (0.0, 0.0), [[2.0, 1.0], [0.0, 1.0]], 100, 7)
        assert est.estimate == 6.0
        assert est.stderr == 0.0
        assert est.samples == 100
        assert est.seed == 7

    def test_same_seed_same_bits(self):
        f = field_from_expression("x1*x2", 2)
        a = monte_carlo_affine(f, (0.0, 0.0), np.eye(2), 5000, 42)
        b = monte_carlo_affine(f, (0.0, 0.0), np.eye(2), 5000, 42)
        assert a == b

    def test_different_seed_differs(self):
        f = field_from_expression("x1*x2", 2)
        a = monte_carlo_affine(f, (0.0, 0.0), np.eye(2), 5000, 1)
        b = monte_carlo_affine(f, (0.0, 0.0), np.eye(2), 5000, 2)
        assert a.estimate != b.estimate

    def test_mean_near_truth(self):
        f = field_from_expression("x1", 2)
        est = monte_carlo_affine(f, (0.0, 0.0), np.eye(2), 40000, 42)
        assert abs(est.estimate - 0.5) < 4 * est.stderr
        assert 0 < est.stderr < 0.01

    def test_affine_weighting(self):
        # doubling one edge doubles a constant integral through |det|
        f = field_from_callable(lambda point: 1.0, arity=2)
        est = monte_carlo_affine(f, (1.0, -1.0), [[2.0, 0.0], [0.0, 3.0]], 10, 0)
        assert est.estimate == 6.0

    def test_singular_edges_rejected(self):
        f = field_from_expression("1", 2)
        with pytest.raises(DomainError, match="singular"):
            monte_carlo_affine(f, (0.0, 0.0), [[1.0, 2.0], [2.0, 4.0]], 100, 0)

    def test_needs_two_samples(self):
        f = field_from_expression("1", 1)
        with pytest.raises(DomainError, match="at least 2 samples"):
            monte_carlo_affine(f, (0.0,), [[1.0]], 1, 0)

    def test_shape_check(self):
        f = field_from_expression("1", 2)
        with pytest.raises(DomainError, match="edge matrix"):
            monte_carlo_affine(f, (0.0, 0.0), [[1.0, 0.0]], 100, 0)
