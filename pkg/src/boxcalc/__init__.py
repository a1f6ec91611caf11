"""Integration by signed vertex sums of antiderivatives.

The integral of f over an axis-parallel box equals the alternating sum of
an antiderivative over the box's 2**n vertices; affine changes of variables
carry the identity to parallelotopes, and a mirror extension handles
triangles with a symmetric integrand.  The package pairs the vertex-sum
machinery with independent oracles (exact rational polynomial calculus,
tensor-product Gauss-Legendre quadrature, seeded Monte Carlo) and a CLI.
"""

from .antiderivative import (
    Antiderivative,
    CheckReport,
    ScalarField,
    as_field,
    builtin_field,
    builtin_names,
    check_antiderivative,
    field_from_callable,
    field_from_expression,
    field_from_polynomial,
    gauge_add,
    mixed_partial,
    numeric_antiderivative,
)
from .errors import (
    BoxcalcError,
    BudgetExceededError,
    DomainError,
    GaugeDependenceError,
    InternalCheckError,
)
from .expression import EvalError, ParseError, evaluate, evaluate_batch, parse, to_text
from .ftc import (
    CompositionalityReport,
    ImpossibilityReport,
    IntegralResult,
    SymmetryError,
    SymmetryReport,
    TriangulationSearch,
    check_segment_symmetry,
    compositionality_check,
    integrate_box,
    integrate_box_from_f,
    integrate_parallelotope,
    integrate_triangle_symmetric,
    mirror_extend,
    pullback_field,
    triangle_impossibility_check,
    with_oracle,
)
from .geometry import (
    Hypercuboid,
    Parallelotope,
    VertexLabel,
    checked_determinant,
    count_zeros,
    graph_distance,
    make_hypercuboid,
    make_parallelotope,
    parallelotope_vertices,
    subdivide_grid,
    vertex_sign,
    vertices_lex,
)
from .oracle import (
    MonteCarloEstimate,
    QuadratureConfig,
    gauss_legendre_box,
    legendre_rule,
    monte_carlo_affine,
)
from .polycalc import (
    NonPolynomialError,
    Polynomial,
    monomial_product_integral,
    poly_antiderivative,
    poly_box_integral,
    poly_eval,
    poly_from_expr,
    poly_mixed_partial,
    poly_vertex_sum,
    vertex_sum_integral,
)

__version__ = "0.1.0"

__all__ = [
    "Antiderivative",
    "BoxcalcError",
    "BudgetExceededError",
    "CheckReport",
    "CompositionalityReport",
    "DomainError",
    "EvalError",
    "GaugeDependenceError",
    "Hypercuboid",
    "ImpossibilityReport",
    "IntegralResult",
    "InternalCheckError",
    "MonteCarloEstimate",
    "NonPolynomialError",
    "Parallelotope",
    "ParseError",
    "Polynomial",
    "QuadratureConfig",
    "ScalarField",
    "SymmetryError",
    "SymmetryReport",
    "TriangulationSearch",
    "VertexLabel",
    "as_field",
    "builtin_field",
    "builtin_names",
    "check_antiderivative",
    "check_segment_symmetry",
    "checked_determinant",
    "compositionality_check",
    "count_zeros",
    "evaluate",
    "evaluate_batch",
    "field_from_callable",
    "field_from_expression",
    "field_from_polynomial",
    "gauge_add",
    "gauss_legendre_box",
    "graph_distance",
    "integrate_box",
    "integrate_box_from_f",
    "integrate_parallelotope",
    "integrate_triangle_symmetric",
    "legendre_rule",
    "make_hypercuboid",
    "make_parallelotope",
    "mirror_extend",
    "mixed_partial",
    "monomial_product_integral",
    "monte_carlo_affine",
    "numeric_antiderivative",
    "parallelotope_vertices",
    "parse",
    "poly_antiderivative",
    "poly_box_integral",
    "poly_eval",
    "poly_from_expr",
    "poly_mixed_partial",
    "poly_vertex_sum",
    "pullback_field",
    "subdivide_grid",
    "to_text",
    "triangle_impossibility_check",
    "vertex_sign",
    "vertex_sum_integral",
    "vertices_lex",
    "with_oracle",
]
