"""Exception hierarchy shared by every module of the package."""


class RacketChaosError(Exception):
    """Base class; ``kind`` is the short machine-readable error name."""

    kind = "RacketChaosError"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"kind": self.kind, "message": str(self)}
        out.update({k: _plain(v) for k, v in self.details.items()})
        return out


def _plain(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)


def _make(name, doc):
    return type(name, (RacketChaosError,), {"kind": name, "__doc__": doc})


HypothesisViolated = _make("HypothesisViolated", "max 2f' < g or min 2f' > -g.")
DomainError = _make("DomainError", "State or gap below the domain floor of the map.")
ConvergenceError = _make("ConvergenceError", "Root or quadrature budget exhausted.")
NoImpact = _make("NoImpact", "Free flight never meets the racket in the search horizon.")
GrazingImpact = _make("GrazingImpact", "Tangential hit; relative speed too small to trust.")
TwistFailure = _make("TwistFailure", "Mixed derivative not bounded below on any tried window.")
ParamTooSmall = _make("ParamTooSmall", "Integer parameter violates the lower bound on m.")
GlueOrderViolated = _make("GlueOrderViolated", "Ordering needed to splice two sequences fails.")
NoGlueIndex = _make("NoGlueIndex", "No admissible splice index found.")
TruncationUnsafe = _make("TruncationUnsafe", "Envelope extremum attained on the search boundary.")
NoConvergence = _make("NoConvergence", "Stationary flow did not reach the residual tolerance.")
SandwichBreach = _make("SandwichBreach", "Band projection was active too often.")
OrbitMismatch = _make("OrbitMismatch", "Lifted configuration is not an orbit of the map.")
Unclassifiable = _make("Unclassifiable", "Block displacement lies in neither symbol band.")
ConfigError = _make("ConfigError", "Invalid experiment configuration.")
