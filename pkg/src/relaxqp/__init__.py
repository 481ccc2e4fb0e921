"""Dense primal-dual interior-point QP solver with smooth, relaxed gradients.

Typical use::

    solved, relaxed, grads = differentiate(problem, grad_x, kappa=1e-2)

``solved`` is the tight solution to report; ``grads`` are evaluated at the
central-path point ``relaxed`` and stay smooth across active constraints.
"""
from .diff import (
    compute_elastic_qp_grads,
    compute_grads,
    compute_qp_grads,
    differentiate,
    fd_gradients,
    solve_and_relax,
)
from .errors import (
    DimensionMismatch,
    DivisionNearZero,
    KappaBelowCurrent,
    NotPositiveDefinite,
    QpError,
    RelaxationFailed,
    ValidationFailed,
)
from .pdip import initialize_elastic, initialize_qp, linesearch, solve, solve_qp, solve_qp_elastic
from .problem import (
    ElasticIterate,
    ElasticProblem,
    PrimalDualIterate,
    QpGradients,
    QpProblem,
    SolveResult,
    SolverSettings,
    Status,
    validate,
)
from .relax import relax, relax_qp, relax_qp_elastic

__version__ = "0.1.0"
