class HybridSchedError(Exception):
    """
    Base class for every error raised by hybrid_sched.

    `exit_code` is the process exit status the command line maps the error to.
    """

    exit_code: int = 2
    kind: str = "error"


class InvalidInputError(HybridSchedError, ValueError):
    exit_code = 2
    kind = "invalid-input"


class ConfigurationError(InvalidInputError):
    kind = "configuration"


class LpError(HybridSchedError):
    exit_code = 3
    kind = "lp"


class LpInfeasibleError(LpError):
    kind = "lp-infeasible"


class LpUnboundedError(LpError):
    kind = "lp-unbounded"


class LpRequiresFiniteTimesError(LpError, ValueError):
    kind = "lp-infinite-time"


class SchedulingError(HybridSchedError):
    exit_code = 3
    kind = "scheduling"


class CapacityExceededError(HybridSchedError):
    exit_code = 4
    kind = "caps"


class CertificateError(HybridSchedError):
    exit_code = 1
    kind = "certificate"
