"""Volterra-type operators on Fock-Sobolev spaces: norms, matrices, spectra, Carleson tests."""

from .carleson import CarlesonQuery, Classification, berezin_Mg, carleson_scan, classify, tilde_mu
from .errors import (ConfigError, ConvergenceFailure, FockError, ModeMismatch, NotCompact,
                     PreconditionError, ScenarioError, SymbolOverflow, TailNotConverged,
                     TruncationInsufficient, WitnessDisagreement)
from .operators import (OperatorKind, OperatorMatrix, apply, growth_probe, matrix,
                        schatten_diagnostic, singular_values, degree_verdict)
from .quadrature import QuadratureGrid
from .spectral import (ResolventSpec, companion_spectrum, lemma4_check, multiplier_spectrum,
                       resolvent_apply, spectrum_scan)
from .symbols import FunctionSymbol, Polynomial, evaluate, parse_symbol
from .weight import (MembershipVerdict, SpaceParams, kernel, kernel_norm_sq, littlewood_paley,
                     membership, monomial_norm, norm, regularity_report)

__version__ = "0.1.0"
