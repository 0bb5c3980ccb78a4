"""Exception hierarchy shared by all qlog modules."""


class QlogError(Exception):
    """Base class for all qlog errors."""


class PrecisionExhausted(QlogError):
    """A floating sample (or working precision) cannot certify the next step."""


class NearResonance(QlogError):
    """Evaluation point too close to a root of unity for the requested tolerance."""


class WindowTooSmall(QlogError):
    """Spectral scan window produced too few recurrent approximants."""


class Unresolved(QlogError):
    """Point lies inside the resolution band of an untested excluded region."""


class NotSummable(QlogError):
    """Coefficient rule fails the summability requirement."""


class NotConverged(QlogError):
    """Iterative construction did not converge within the allowed number of terms."""


class NoConvergence(QlogError):
    """Extrapolation residuals fail to decrease."""


class Divergent(QlogError):
    """Requested derivative order violates the convergence condition."""


class RayHitsSingularity(QlogError):
    """Laplace ray passes through (or too close to) a declared singular point."""


class DampingInsufficient(QlogError):
    """Laplace damping does not dominate the integrand's certified growth."""


class DegenerateFit(QlogError):
    """Regression input does not determine the requested fit."""


class SingularSystem(QlogError):
    """Linear system effectively singular.

    Carries ``effective_rank`` when it could be estimated.
    """

    def __init__(self, msg, effective_rank=None):
        super().__init__(msg)
        self.effective_rank = effective_rank


class PoleProximity(QlogError):
    """Evaluation point too close to a pole of the summed kernel."""


class PoleCluster(QlogError):
    """Neighboring poles too close for the requested residue estimate."""


class DiskExceeded(QlogError):
    """A shifted argument leaves the certified disk of a power series."""


class OutsideStrip(QlogError):
    """Point lies outside the analyticity strip of the Borel transform."""


class TailNotCertified(QlogError):
    """Truncation tail cannot be certified at the requested point/tolerance.

    ``largest_certified`` carries the least demanding input that still
    certified, when the caller was scanning a schedule.
    """

    def __init__(self, msg, largest_certified=None):
        super().__init__(msg)
        self.largest_certified = largest_certified
