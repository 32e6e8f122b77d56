"""Cheney-Sharma operators on [0, 1] and on the two-dimensional simplex."""

from .abel import (WeightTable, abel_factor, bivariate_weights, log_abel_factor,
                   univariate_weights)
from .core import (CORPUS, FunctionDescriptor, LipschitzSpec, MultiIndex, OperatorParams,
                   SimplexPoint, componentwise_leq, eval_function, simplex_lattice)
from .operators import (difference_expansion, eval_G, eval_G_many, eval_G_marginal, eval_Q,
                        eval_Q_many)
from .properties import (VerificationReport, convergence_table, estimate_lipschitz_constant,
                         verify_lipschitz_preservation, verify_modulus_axioms, verify_partition)

__all__ = [
    "CORPUS", "FunctionDescriptor", "LipschitzSpec", "MultiIndex", "OperatorParams",
    "SimplexPoint", "VerificationReport", "WeightTable", "abel_factor", "bivariate_weights",
    "componentwise_leq", "convergence_table", "difference_expansion", "estimate_lipschitz_constant",
    "eval_G", "eval_G_many", "eval_G_marginal", "eval_Q", "eval_Q_many", "eval_function",
    "log_abel_factor", "simplex_lattice", "univariate_weights", "verify_lipschitz_preservation",
    "verify_modulus_axioms", "verify_partition",
]
