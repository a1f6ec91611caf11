"""Vertex-sum integration: boxes, parallelotopes, and symmetric triangles.

The central identity: the integral of f over a box equals the alternating
sum of an antiderivative F over the box's 2**n vertices, signed by parity of
the number of lower-bound coordinates.  For a parallelotope the same sum
runs over the images of the unit-box vertices with signs given by graph
distance from the marked vertex (the image of the all-ones corner), using
the pulled-back integrand f(origin + T u) |det T|.

All vertex sums go through math.fsum (exact summation), so a degenerate box
cancels to exactly 0.0 pairwise and the vertex visit order cannot change any
result.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .antiderivative import (
    Antiderivative,
    ScalarField,
    as_field,
    numeric_antiderivative,
)
from .errors import BoxcalcError, DomainError, InternalCheckError
from .geometry import (
    Hypercuboid,
    Parallelotope,
    VertexLabel,
    graph_distance,
    subdivide_grid,
    vertex_sign,
    vertices_lex,
)
from .oracle import QuadratureConfig


@dataclass(frozen=True)
class SymmetryReport:
    """Midpoint-symmetry diagnostics for an integrand along a segment."""

    passed: bool
    max_deviation: float
    worst_t: float
    scale: float
    samples: int
    tol: float


class SymmetryError(BoxcalcError):
    """The integrand is not midpoint-symmetric along the required segment."""

    def __init__(self, report: SymmetryReport):
        super().__init__(
            "integrand is not symmetric along the segment QR: "
            f"worst deviation {report.max_deviation:.6e} at t = {report.worst_t:.6g} "
            f"(tolerance {report.tol:g} relative to scale {report.scale:.6g})"
        )
        self.report = report


@dataclass(frozen=True)
class IntegralResult:
    """Integral value plus the vertex contributions that recompute it.

    `value` equals the exact sum of sign * antiderivative over
    `contributions`.  `oracle`, `abs_diff`, `rel_diff` are filled by
    with_oracle; `symmetry` is set by the triangle path.
    """

    value: float
    method: str
    contributions: tuple[tuple[VertexLabel, int, float], ...]
    oracle: float | None = None
    abs_diff: float | None = None
    rel_diff: float | None = None
    symmetry: SymmetryReport | None = None


def with_oracle(result: IntegralResult, oracle_value: float) -> IntegralResult:
    """Attach an independent reference value and its differences."""
    oracle_value = float(oracle_value)
    abs_diff = abs(result.value - oracle_value)
    rel_diff = abs_diff / max(1.0, abs(oracle_value))
    return dataclasses.replace(
        result, oracle=oracle_value, abs_diff=abs_diff, rel_diff=rel_diff
    )


def integrate_box(F, box: Hypercuboid) -> IntegralResult:
    """Alternating vertex sum of an antiderivative over a box.

    Coincident vertices (degenerate axes) are evaluated once, so their
    contributions are bitwise identical and the exact sum cancels them to
    0.0 pairwise rather than by rounding.
    """
    field = as_field(F)
    if field.arity != box.dim:
        raise DomainError(
            f"antiderivative arity {field.arity} does not match box dimension {box.dim}"
        )
    cache: dict[tuple, float] = {}
    contributions = []
    for label, point in vertices_lex(box):
        if point not in cache:
            cache[point] = field(point)
        contributions.append((label, vertex_sign(label), cache[point]))
    value = math.fsum(sign * value for _, sign, value in contributions) + 0.0
    return IntegralResult(value=value, method="vertex-sum", contributions=tuple(contributions))


def integrate_box_from_f(
    f, box: Hypercuboid, quad: QuadratureConfig | None = None
) -> IntegralResult:
    """Integrate f over a box by building its numeric antiderivative first.

    The antiderivative is based at the box's lower corner, so every vertex
    that keeps some lower-bound coordinate contributes exactly 0.0; this is
    asserted structurally.
    """
    corner = tuple(float(a) for a in box.lower)
    F = numeric_antiderivative(as_field(f), corner, quad)
    result = integrate_box(F, box)
    for label, _, value in result.contributions:
        if 0 in label.bits and value != 0.0:
            raise InternalCheckError(
                f"antiderivative must vanish at vertex {label}, got {value!r}"
            )
    return result


@dataclass(frozen=True)
class CompositionalityReport:
    """Whole-box integral versus the sum over a subdivision."""

    lhs: float
    rhs: float
    abs_diff: float
    subboxes: int


def compositionality_check(F, box: Hypercuboid, cuts) -> CompositionalityReport:
    """Compare the vertex sum over a box with the sum over its grid subdivision."""
    parts = subdivide_grid(box, cuts)
    lhs = integrate_box(F, box).value
    rhs = math.fsum(integrate_box(F, piece).value for piece in parts) + 0.0
    return CompositionalityReport(
        lhs=lhs, rhs=rhs, abs_diff=abs(lhs - rhs), subboxes=len(parts)
    )


def pullback_field(f, origin, matrix, weight: float) -> ScalarField:
    """The integrand u -> f(origin + T u) * weight on the unit box."""
    f = as_field(f)
    origin = np.asarray(tuple(float(c) for c in origin), dtype=float)
    matrix = np.asarray(matrix, dtype=float)
    weight = float(weight)

    def fn(pts: np.ndarray) -> np.ndarray:
        return f.evaluate(origin + pts @ matrix.T) * weight

    return ScalarField(f.arity, fn, tag="pullback")


def integrate_parallelotope(
    f,
    p: Parallelotope,
    quad: QuadratureConfig | None = None,
    order=None,
) -> IntegralResult:
    """Integrate f over a parallelotope by a signed vertex sum.

    Change of variables maps the unit box onto the parallelotope; the
    antiderivative of the pulled-back integrand f(origin + T u) |det T| is
    summed over the unit-box corners with sign (-1)**(graph distance to the
    marked all-ones corner).  `order` optionally permutes the visit order of
    the 2**n vertices; the exact summation makes the value independent of it.
    """
    f = as_field(f)
    n = p.dim
    if f.arity != n:
        raise DomainError(f"field arity {f.arity} does not match dimension {n}")
    g = pullback_field(f, p.origin, p.matrix, abs(p.det))
    F = numeric_antiderivative(g, (0.0,) * n, quad)
    indices = list(range(2**n)) if order is None else [int(i) for i in order]
    if sorted(indices) != list(range(2**n)):
        raise DomainError(f"order must be a permutation of 0..{2**n - 1}")
    marked = VertexLabel((1,) * n)
    contributions = []
    for i in indices:
        label = VertexLabel.from_index(i, n)
        sign = -1 if graph_distance(label, marked) % 2 else 1
        value = F(tuple(float(b) for b in label.bits))
        contributions.append((label, sign, value))
    total = math.fsum(sign * value for _, sign, value in contributions) + 0.0
    return IntegralResult(value=total, method="parallelotope", contributions=tuple(contributions))


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def check_segment_symmetry(
    f, q, r, tol: float = 1e-9, samples: int = 17
) -> SymmetryReport:
    """Check f(M + t d) == f(M - t d) for the segment QR, M its midpoint.

    Samples `samples` equally spaced interior parameters t in (0, 1) with
    d = (R - Q) / 2.  The tolerance is relative to the largest |f| seen on
    the samples.
    """
    f = as_field(f)
    if f.arity != 2:
        raise DomainError(f"segment symmetry check needs arity 2, got {f.arity}")
    if samples < 1:
        raise DomainError(f"need at least one sample, got {samples}")
    q = np.asarray(tuple(float(c) for c in q), dtype=float)
    r = np.asarray(tuple(float(c) for c in r), dtype=float)
    mid = 0.5 * (q + r)
    half = 0.5 * (r - q)
    ts = np.arange(1, samples + 1, dtype=float) / (samples + 1)
    plus = mid + ts[:, None] * half
    minus = mid - ts[:, None] * half
    va = f.evaluate(plus)
    vb = f.evaluate(minus)
    scale = float(max(np.max(np.abs(va)), np.max(np.abs(vb))))
    gaps = np.abs(va - vb)
    worst = int(np.argmax(gaps))
    max_dev = float(gaps[worst])
    return SymmetryReport(
        passed=max_dev <= tol * scale,
        max_deviation=max_dev,
        worst_t=float(ts[worst]),
        scale=scale,
        samples=samples,
        tol=tol,
    )


def mirror_extend(f, p, q, r) -> ScalarField:
    """Extend f from triangle PQR to the parallelogram P, Q, Q+R-P, R.

    Points on the far side of the line QR are reflected through the midpoint
    of QR back into the triangle: the extension is z -> f(Q + R - z) there.
    Requires f to be midpoint-symmetric along QR for the result to be
    well-defined on the seam.
    """
    f = as_field(f)
    if f.arity != 2:
        raise DomainError(f"triangle machinery needs arity 2, got {f.arity}")
    pv = np.asarray(tuple(float(c) for c in p), dtype=float)
    qv = np.asarray(tuple(float(c) for c in q), dtype=float)
    rv = np.asarray(tuple(float(c) for c in r), dtype=float)
    edge = rv - qv
    side_p = _cross2(edge, pv - qv)

    def fn(pts: np.ndarray) -> np.ndarray:
        rel = pts - qv
        side = edge[0] * rel[:, 1] - edge[1] * rel[:, 0]
        near = side * side_p >= 0.0
        out = np.empty(pts.shape[0])
        if near.any():
            out[near] = f.evaluate(pts[near])
        far = ~near
        if far.any():
            out[far] = f.evaluate((qv + rv) - pts[far])
        return out

    return ScalarField(2, fn, tag="pullback")


# The mirror extension is continuous but its gradient jumps across QR, which
# pulls back to the unit square's antidiagonal.  Composite tensor rules
# converge only as (nodes*panels)**-2 against that seam, so the triangle
# path defaults to a much denser rule than the smooth-integrand default:
# 32*192 points per axis puts unit-scale examples near 3e-9.
_TRIANGLE_QUAD = QuadratureConfig(nodes=32, panels=192)


def integrate_triangle_symmetric(
    f,
    p,
    q,
    r,
    quad: QuadratureConfig | None = None,
    sym_tol: float = 1e-9,
    sym_samples: int = 17,
) -> IntegralResult:
    """Integrate f over triangle PQR when f is midpoint-symmetric along QR.

    The triangle is completed to the parallelogram with fourth vertex
    S = Q + R - P; the mirror-extended integrand is integrated over it and
    halved.  Degenerate triangles are rejected, and the symmetry
    precondition is sampled first: violations raise SymmetryError carrying
    the worst sample.
    """
    f = as_field(f)
    pv = np.asarray(tuple(float(c) for c in p), dtype=float)
    qv = np.asarray(tuple(float(c) for c in q), dtype=float)
    rv = np.asarray(tuple(float(c) for c in r), dtype=float)
    if f.arity != 2 or pv.shape != (2,) or qv.shape != (2,) or rv.shape != (2,):
        raise DomainError("triangle integration needs three 2-d vertices and an arity-2 field")
    area = 0.5 * abs(_cross2(qv - pv, rv - pv))
    perimeter = (
        float(np.linalg.norm(qv - pv))
        + float(np.linalg.norm(rv - qv))
        + float(np.linalg.norm(pv - rv))
    )
    if area < 1e-12 * (perimeter / 3.0) ** 2:
        raise DomainError(
            f"degenerate triangle: area {area:.3e} below threshold for perimeter {perimeter:.3g}"
        )
    report = check_segment_symmetry(f, qv, rv, tol=sym_tol, samples=sym_samples)
    if not report.passed:
        raise SymmetryError(report)
    extended = mirror_extend(f, pv, qv, rv)
    parallelogram = Parallelotope.from_edge_vectors(tuple(pv), (tuple(qv - pv), tuple(rv - pv)))
    inner = integrate_parallelotope(extended, parallelogram, quad or _TRIANGLE_QUAD)
    return IntegralResult(
        value=0.5 * inner.value,
        method="triangle",
        contributions=inner.contributions,
        symmetry=report,
    )


# Rectangle corners indexed by label order 00, 01, 10, 11.  The vertex-sum
# sign pattern on these corners is (+1, -1, -1, +1).  Walking the rectangle
# boundary visits them in the cyclic order 00, 01, 11, 10.
_CORNER_LABELS = ("00", "01", "10", "11")
_TARGET_PATTERN = (1, -1, -1, 1)
_CYCLE = (0, 1, 3, 2)


def _rectangle_symmetries() -> list[tuple[int, ...]]:
    """The 8 relabelings of the rectangle's corners (dihedral group of the 4-cycle)."""
    perms = []
    for rotation in range(4):
        for flip in (False, True):
            mapping = [0] * 4
            for pos in range(4):
                target_pos = (rotation - pos) % 4 if flip else (rotation + pos) % 4
                mapping[_CYCLE[pos]] = _CYCLE[target_pos]
            perms.append(tuple(mapping))
    return perms


@dataclass(frozen=True)
class TriangulationSearch:
    """Exhaustive sign-assignment search over one diagonal triangulation."""

    diagonal: str
    triangles: tuple[tuple[str, str, str], tuple[str, str, str]]
    assignments: int
    target_matches: int
    shared_coefficient_values: tuple[int, ...]
    zero_vector_matches: int
    cancelling_shared_patterns: int


@dataclass(frozen=True)
class ImpossibilityReport:
    """No plus/minus labeling of two triangles reproduces the box sign pattern."""

    claim_holds: bool
    target: tuple[int, int, int, int]
    target_orbit: tuple[tuple[int, ...], ...]
    searches: tuple[TriangulationSearch, TriangulationSearch]


def triangle_impossibility_check() -> ImpossibilityReport:
    """Show no vertex sign assignment on two triangles recovers the rectangle sum.

    For each diagonal triangulation of the rectangle, every assignment of
    +-1 to the six triangle-vertex slots is enumerated; slot values landing
    on the same corner accumulate.  A match means the induced coefficient
    vector equals the rectangle's alternating pattern up to the rectangle's
    8 dihedral relabelings.  Shared corners (the diagonal's endpoints) carry
    two slots, so their induced coefficients are even, while the other two
    corners carry one slot each and stay odd; matching the all-odd target
    is therefore structurally impossible, and the search confirms zero
    matches.  The report also counts assignments reaching the all-zero
    vector (none, by the same parity) and the distinct shared-slot patterns
    that cancel both shared corners.
    """
    orbit = sorted(
        {
            tuple(applied)
            for perm in _rectangle_symmetries()
            for applied in [_apply_perm(_TARGET_PATTERN, perm)]
        }
    )
    triangulations = (
        ("00-11", ((0, 2, 3), (0, 3, 1))),
        ("01-10", ((0, 2, 1), (2, 3, 1))),
    )
    searches = []
    for diagonal, (tri_a, tri_b) in triangulations:
        slots = tri_a + tri_b
        shared = sorted({c for c in slots if slots.count(c) == 2})
        shared_slot_positions = [i for i, c in enumerate(slots) if c in shared]
        target_matches = 0
        zero_matches = 0
        shared_values: set[int] = set()
        cancelling_patterns: set[tuple[int, ...]] = set()
        for assignment in itertools.product((-1, 1), repeat=6):
            coeffs = [0, 0, 0, 0]
            for value, corner in zip(assignment, slots):
                coeffs[corner] += value
            coeffs_t = tuple(coeffs)
            if coeffs_t in orbit:
                target_matches += 1
            if coeffs_t == (0, 0, 0, 0):
                zero_matches += 1
            shared_values.update(coeffs[c] for c in shared)
            if all(coeffs[c] == 0 for c in shared):
                cancelling_patterns.add(tuple(assignment[i] for i in shared_slot_positions))
        searches.append(
            TriangulationSearch(
                diagonal=diagonal,
                triangles=(
                    tuple(_CORNER_LABELS[c] for c in tri_a),
                    tuple(_CORNER_LABELS[c] for c in tri_b),
                ),
                assignments=2**6,
                target_matches=target_matches,
                shared_coefficient_values=tuple(sorted(shared_values)),
                zero_vector_matches=zero_matches,
                cancelling_shared_patterns=len(cancelling_patterns),
            )
        )
    claim = all(s.target_matches == 0 for s in searches)
    return ImpossibilityReport(
        claim_holds=claim,
        target=_TARGET_PATTERN,
        target_orbit=tuple(orbit),
        searches=tuple(searches),
    )


def _apply_perm(pattern, perm) -> list[int]:
    out = [0] * len(pattern)
    for src, dst in enumerate(perm):
        out[dst] = pattern[src]
    return out
