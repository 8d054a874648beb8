"""Numerical verification of explicit bounds for oscillatory integrals with polynomial phase."""

from .bounds import (BoundInputs, ConstantsConfig, consequence_bound, consequence_lambda,
                     g_paren_chain, theorem1_bound, theorem2_bound, theorem3_bound,
                     theorem4_bound, theorem4_cases)
from .chain import DerivativeChain, PolyMatrix, build_chain, gradient_seed, next_matrix
from .coarea import LevelProfile, MonotonePieces, level_profile, monotone_split, oscillatory_from_profile
from .errors import (BoundInputError, ChainTooLarge, DegenerateProfileError, DimensionError,
                     EmptyDomainError, FitUndefinedError, OscBoundError, PolynomialSyntaxError,
                     StageError, UnsupportedGeometryError)
from .measure import (MeasureEstimate, SurfaceSystem, dyadic_shell_measures, sublevel_measure,
                      sublevel_measures, surface_measure)
from .oracle import DecayFit, OracleResult, decay_fit, oscillatory_integral
from .poly import BoxDomain, Polynomial, format_polynomial, parse_polynomial
from .report import ProblemDocument, dumps_report, emit_plot_data, parse_document, run_verify
from .spectral import ChainExtrema, chain_extrema, singular_values, smallest_r_product, spectral_summary

__version__ = "0.1.0"
