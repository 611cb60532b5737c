"""Minimum-phase spectral factorization of rank-deficient spectral densities.

A low-rank density ``Phi`` with leading full-rank block ``Phi11`` is factored
through the deterministic relation ``H = Phi21 Phi11^{-1}``: a square
minimum-phase factor ``G1`` of ``Phi11`` and a coprime factorization of
``H G1`` with inner denominator give ``W = [G1 Q1; H G1 Q1]``.
"""
from .config import Tolerances, get_tolerances, tolerances  # noqa: F401
from .errors import *  # noqa: F401,F403
from .factorization import (CoprimeFactors,  # noqa: F401 EquivalenceReport, FactorizationResult,
                            PartitionedSpectralDensity, compute_H, coprime_inner_factorization,
                            factor_from_relation, grid_residual, inner_residual, outer_inner,
                            scalar_spectral_factor, special_case_factor, spectral_factor,
                            spectral_factor_from_stable_factor, square_minimum_phase_factor,
                            unitary_equivalence_check)
from .ident import (ArmaFit,  # noqa: F401 TimeSeries, estimate_arma_pem, estimate_H_ls,
                    identify_innovation_model, simulate_lowrank_process)
from .kernels import BACKEND  # noqa: F401
from .polynomial import Polynomial, RationalFunction  # noqa: F401
from .rational import RationalMatrix  # noqa: F401
from .realization import StateSpaceRealization, minimal_realization, transfer_of  # noqa: F401
from .sylvester import solve_lyapunov, solve_stein, uniqueness_check  # noqa: F401
from .wiener import FeedbackRepresentation, causal_part, wiener_filter  # noqa: F401

__version__ = "0.1.0"
