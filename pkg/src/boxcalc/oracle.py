"""Ground-truth integrators: composite Gauss-Legendre cubature and seeded Monte Carlo.

Both are deterministic.  The cubature uses cached Legendre rules computed by
Newton iteration; the Monte Carlo stream comes from a counter-based generator
so a seed maps to the same sample sequence on every platform and run.  All
reductions go through math.fsum, which returns the correctly rounded exact
sum regardless of term order.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DomainError
from .geometry import Hypercuboid, checked_determinant


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite tensor-product rule: `nodes` points per panel, `panels` per axis.

    A request costs (nodes * panels)**dim evaluations and is refused when that
    exceeds `max_evals`.
    """

    nodes: int = 12
    panels: int = 4
    max_evals: int = 10**8

    def __post_init__(self) -> None:
        if not 2 <= self.nodes <= 32:
            raise DomainError(f"nodes per panel must be in [2, 32], got {self.nodes}")
        if self.panels < 1:
            raise DomainError(f"panels must be at least 1, got {self.panels}")
        if self.max_evals < 1:
            raise DomainError(f"max_evals must be positive, got {self.max_evals}")


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int


@functools.lru_cache(maxsize=None)
def legendre_rule(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the q-point Gauss-Legendre rule on [-1, 1].

    Roots of P_q by Newton iteration from the Chebyshev-like initial guess,
    run until |P_q(x)| < 1e-15 at every root or the iterates stop moving
    (the recurrence's rounding floor), capped at 100 sweeps.  Results are
    cached per q and returned read-only.
    """
    if not 2 <= q <= 32:
        raise DomainError(f"rule size must be in [2, 32], got {q}")
    k = np.arange(q, dtype=float)
    x = np.cos(math.pi * (k + 0.75) / (q + 0.5))
    p, dp = _legendre_and_derivative(q, x)
    for _ in range(100):
        if np.max(np.abs(p)) < 1e-15:
            break
        step = p / dp
        x_new = x - step
        if np.array_equal(x_new, x):
            break
        x = x_new
        p, dp = _legendre_and_derivative(q, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x = x[order].copy()
    w = w[order].copy()
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _legendre_and_derivative(q: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(1, q):
        p_prev, p = p, ((2 * j + 1) * x * p - j * p_prev) / (j + 1)
    dp = q * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def _axis_rule(a: float, b: float, cfg: QuadratureConfig) -> tuple[np.ndarray, np.ndarray]:
    x_ref, w_ref = legendre_rule(cfg.nodes)
    edges = a + (b - a) * np.arange(cfg.panels + 1) / cfg.panels
    nodes = []
    weights = []
    for k in range(cfg.panels):
        mid = 0.5 * (edges[k] + edges[k + 1])
        half = 0.5 * (edges[k + 1] - edges[k])
        nodes.append(mid + half * x_ref)
        weights.append(half * w_ref)
    return np.concatenate(nodes), np.concatenate(weights)


_EVAL_BLOCK = 1 << 20


def gauss_legendre_box(f, box: Hypercuboid, cfg: QuadratureConfig | None = None) -> float:
    """Composite tensor-product Gauss-Legendre integral of f over a box.

    Exact (to rounding) for polynomials of per-axis degree up to
    2*nodes - 1.  Degenerate axes contribute zero weight, so the result is
    exactly 0.0 when the box is degenerate.  The tensor grid is walked in
    C order in fixed-size blocks, so memory stays bounded for large rules
    and the result is reproducible bit for bit.
    """
    cfg = cfg or QuadratureConfig()
    n = box.dim
    if getattr(f, "arity", n) != n:
        raise DomainError(f"field arity {f.arity} does not match box dimension {n}")
    per_axis = cfg.nodes * cfg.panels
    if per_axis**n > cfg.max_evals:
        raise BudgetExceededError(
            f"({cfg.nodes}*{cfg.panels})^{n} evaluations exceed the budget {cfg.max_evals}"
        )
    axis_nodes = []
    axis_weights = []
    for j in range(n):
        nodes, weights = _axis_rule(float(box.lower[j]), float(box.upper[j]), cfg)
        axis_nodes.append(nodes)
        axis_weights.append(weights)
    total = per_axis**n
    block_sums = []
    for start in range(0, total, _EVAL_BLOCK):
        flat = np.arange(start, min(start + _EVAL_BLOCK, total))
        axis_index = [None] * n
        rem = flat
        for j in reversed(range(n)):
            rem, axis_index[j] = np.divmod(rem, per_axis)
        points = np.stack([axis_nodes[j][axis_index[j]] for j in range(n)], axis=1)
        weights = axis_weights[0][axis_index[0]]
        for j in range(1, n):
            weights = weights * axis_weights[j][axis_index[j]]
        block_sums.append(math.fsum(weights * f.evaluate(points)))
    return math.fsum(block_sums) + 0.0


def monte_carlo_affine(f, origin, edges, samples: int, seed: int) -> MonteCarloEstimate:
    """Uniform Monte Carlo estimate of the integral over an affine image of the unit box.

    Draws `samples` points u uniformly in [0,1)^n from a Philox stream keyed
    by `seed`, evaluates f(origin + T u) * |det T|, and reports the sample
    mean with its standard error (sample standard deviation / sqrt(samples)).
    A constant integrand yields the constant times |det T| exactly with a
    standard error of exactly 0.0.
    """
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples}")
    matrix = np.asarray(edges, dtype=float)
    origin = np.asarray(tuple(float(c) for c in origin), dtype=float)
    n = origin.shape[0]
    if matrix.shape != (n, n):
        raise DomainError(f"edge matrix must be {n}x{n}, got shape {matrix.shape}")
    det = checked_determinant(matrix)
    if getattr(f, "arity", n) != n:
        raise DomainError(f"field arity {f.arity} does not match dimension {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random((samples, n))
    points = origin + u @ matrix.T
    values = f.evaluate(points) * abs(det)
    v0 = float(values[0])
    mean = v0 + math.fsum(values - v0) / samples
    deviations = values - mean
    variance = math.fsum(deviations * deviations) / (samples - 1)
    stderr = math.sqrt(variance / samples)
    return MonteCarloEstimate(estimate=mean, stderr=stderr, samples=samples, seed=seed)
