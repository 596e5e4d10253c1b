"""Exact-arithmetic linearization of truncated Poisson structures, Lie
algebra actions, and Lie algebroids around a fixed point."""

from .polyalg import (
    Jet,
    CoordChange,
    PoissonJet,
    PolyOneForm,
    ParseError,
    poisson_bracket,
    jacobiator,
    pushforward,
    compose_change,
    invert_change,
    koszul_bracket,
    differential,
    sharp,
    format_polynomial,
    parse_polynomial,
    monomials,
)
from .liealg import (
    LieAlgebra,
    LeviSplit,
    LeviSplitError,
    SolverFailure,
    isotropy_from_linear_part,
    killing_form,
    is_semisimple,
    is_compact_type,
    radical,
    center,
    derived_subalgebra,
    verify_levi_split,
    levi_lift,
)
from .cohomology import (
    GModule,
    Cochain,
    ObstructionClass,
    InputNotCocycle,
    ce_differential,
    is_cocycle,
    solve_coboundary,
    cohomology_dimension,
    coadjoint_rep,
    induced_polynomial_module,
)
from .normalform import (
    ActionJet,
    IterationStep,
    IterationTrace,
    LeviNormalForm,
    PreconditionNotNormalized,
    SplitNotCertified,
    hermitian_inner,
    hermitian_norm,
    convergence_report,
    poisson_remainder,
    action_remainder,
    conjugate_action,
    linearize_poisson,
    linearize_action,
    levi_decompose,
)
from .algebroid import (
    AlgebroidJet,
    AlgebroidChange,
    LinearAlgebroid,
    action_algebroid,
    algebroid_to_poisson,
    poisson_to_algebroid,
    fiberwise_linearity_check,
    apply_algebroid_change,
    linearize_algebroid,
    levi_algebroid,
)
from .cli import ProblemSpec, parse_problem, print_problem

__all__ = [
    "Jet",
    "CoordChange",
    "PoissonJet",
    "PolyOneForm",
    "ParseError",
    "poisson_bracket",
    "jacobiator",
    "pushforward",
    "compose_change",
    "invert_change",
    "koszul_bracket",
    "differential",
    "sharp",
    "format_polynomial",
    "parse_polynomial",
    "monomials",
    "LieAlgebra",
    "LeviSplit",
    "LeviSplitError",
    "SolverFailure",
    "isotropy_from_linear_part",
    "killing_form",
    "is_semisimple",
    "is_compact_type",
    "radical",
    "center",
    "derived_subalgebra",
    "verify_levi_split",
    "levi_lift",
    "GModule",
    "Cochain",
    "ObstructionClass",
    "InputNotCocycle",
    "ce_differential",
    "is_cocycle",
    "solve_coboundary",
    "cohomology_dimension",
    "coadjoint_rep",
    "induced_polynomial_module",
    "ActionJet",
    "IterationStep",
    "IterationTrace",
    "LeviNormalForm",
    "PreconditionNotNormalized",
    "SplitNotCertified",
    "hermitian_inner",
    "hermitian_norm",
    "convergence_report",
    "poisson_remainder",
    "action_remainder",
    "conjugate_action",
    "linearize_poisson",
    "linearize_action",
    "levi_decompose",
    "AlgebroidJet",
    "AlgebroidChange",
    "LinearAlgebroid",
    "action_algebroid",
    "algebroid_to_poisson",
    "poisson_to_algebroid",
    "fiberwise_linearity_check",
    "apply_algebroid_change",
    "linearize_algebroid",
    "levi_algebroid",
    "ProblemSpec",
    "parse_problem",
    "print_problem",
]

__version__ = "0.1.0"
