"""Exception hierarchy shared by every module of the package."""


class MeasfolError(Exception):
    """Base class; the CLI maps every subclass to exit code 2."""


# -- complexes ---------------------------------------------------------------

class ComplexError(MeasfolError, ValueError):
    pass


class NonClosed(ComplexError):
    pass


class NonOrientable(ComplexError):
    pass


class Disconnected(ComplexError):
    pass


class NonManifoldVertex(ComplexError):
    pass


class IndexOutOfRange(MeasfolError, IndexError):
    pass


class DegenerateMetric(MeasfolError, ValueError):
    pass


# -- measures ----------------------------------------------------------------

class UnknownSimplex(MeasfolError, KeyError):
    pass


class LeafViolation(MeasfolError, ValueError):
    pass


# -- cochains ----------------------------------------------------------------

class DegreeOverflow(MeasfolError, ValueError):
    pass


class DegreeUnderflow(MeasfolError, ValueError):
    pass


class DegreeMismatch(MeasfolError, ValueError):
    pass


# -- fields ------------------------------------------------------------------

class MissingAngles(MeasfolError, ValueError):
    pass


class NonIntegralWinding(MeasfolError, ArithmeticError):
    pass


class ZeroOnSkeleton(MeasfolError, ValueError):
    pass


class DegenerateZero(MeasfolError, ValueError):
    pass


class IncompatibleCorners(MeasfolError, ValueError):
    pass


class LeafMismatch(MeasfolError, ValueError):
    pass


# -- cancellation ------------------------------------------------------------

class TypeOverlap(MeasfolError, ValueError):
    pass


class PreconditionViolated(MeasfolError, ValueError):
    pass


class ExhaustionGap(MeasfolError, ValueError):
    pass


# -- hodge -------------------------------------------------------------------

class SpectralAmbiguity(MeasfolError, ArithmeticError):
    pass


# -- approximation -----------------------------------------------------------

class BudgetExceeded(MeasfolError, RuntimeError):
    pass


class SamplingInconclusive(MeasfolError, RuntimeError):
    pass


class NonSimplicial(MeasfolError, ValueError):
    pass


# -- cli ---------------------------------------------------------------------

class BadParameters(MeasfolError, ValueError):
    pass
