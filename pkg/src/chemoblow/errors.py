"""Exception types raised across the package.

Every error derives from ChemoblowError so callers can catch the package's
failures with a single except clause; the CLI maps them onto exit codes.
"""


class ChemoblowError(Exception):
    """Base class for all package errors."""


class ConfigError(ChemoblowError):
    """Malformed, unknown, or missing configuration keys."""


# -- model parameters ---------------------------------------------------------

class DimensionOutOfRange(ChemoblowError):
    """Spatial dimension n outside the set admitted by the requested mode."""


class SubcriticalExponent(ChemoblowError):
    """Production exponent sigma <= 4/n where the blow-up machinery needs strictly more."""


class MassBoundsInverted(ChemoblowError):
    """Mass window violated: requires 0 < M_lo < M_hi."""


class NonpositiveParameter(ChemoblowError):
    """A parameter that must be strictly positive is not."""


class LowerBoundViolated(ChemoblowError):
    """User production closure fell below its declared k*u^sigma lower bound."""


class NegativeDensity(ChemoblowError):
    """Density argument below zero where nonnegativity is required."""


# -- radial solver -------------------------------------------------------------

class TooFewNodes(ChemoblowError):
    """Grid resolution below the supported minimum."""


class MeanMismatch(ChemoblowError):
    """Supplied mean of w disagrees with the quadrature mean of the field."""


class StabilityViolated(ChemoblowError):
    """Time step exceeds the advective stability bound."""


class NegativeDensityProduced(ChemoblowError):
    """A step produced negative densities beyond the clipping tolerance."""


# -- mass system ---------------------------------------------------------------

class MonotonicityLost(ChemoblowError):
    """Cumulated density lost its monotonicity beyond tolerance."""


class UndefinedDerivative(ChemoblowError):
    """A residual evaluation received a non-finite derivative."""


class NegativePhi(ChemoblowError):
    """First argument of the production operator must be nonnegative."""


# -- subsolution construction ---------------------------------------------------

class HorizonExceeded(ChemoblowError):
    """Time argument at or beyond the growth function's blow-up horizon."""


class SelectionInfeasible(ChemoblowError):
    """Re-verification of the selected subsolution constants failed."""


class InfeasibleInitialData(ChemoblowError):
    """Initial-data constraints cannot be met; try enlarging M_hi."""


# -- verification ----------------------------------------------------------------

class LatticeTooCoarse(ChemoblowError):
    """Certification lattice below the supported minimum resolution."""


class HypothesisWindowEmpty(ChemoblowError):
    """No recorded time satisfies the comparison hypotheses."""
