"""Best uniform approximation of discrete multivariate data with optimality certificates."""

__version__ = "0.1.0"

from .approx import (ApproximationError, Dataset, ExtremalSets, FitResult,
                     evaluate_model, extract_extremal_sets, fit_minimax,
                     uniform_error)
from .optimality import (OptimalityCertificate, SeparationWitness, Verdict,
                         caratheodory_reduce, check_isolability,
                         descent_direction, verify_optimality)
from .poly_basis import (CustomBasis, MonomialBasis, enumerate_monomials, lift,
                         shift_coordinates, verify_shift_lemma)
from .reduction import (SignedPointSet, cut_condition_check, reduce_step,
                        verify_necessary_condition)

__all__ = [
    "ApproximationError", "Dataset", "ExtremalSets", "FitResult", "evaluate_model",
    "extract_extremal_sets", "fit_minimax", "uniform_error",
    "OptimalityCertificate", "SeparationWitness", "Verdict", "caratheodory_reduce",
    "check_isolability", "descent_direction", "verify_optimality",
    "CustomBasis", "MonomialBasis", "enumerate_monomials", "lift",
    "shift_coordinates", "verify_shift_lemma",
    "SignedPointSet", "cut_condition_check", "reduce_step", "verify_necessary_condition",
]
