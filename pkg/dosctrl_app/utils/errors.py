"""
Exception hierarchy for the toolkit.

Every failure raised by the library derives from DosCtrlError so callers
(CLI, management commands) can map it to exit code 1 in one place.
"""


class DosCtrlError(Exception):
    """Base class for all toolkit errors"""


class DimensionError(DosCtrlError):
    """Matrix or vector shapes do not fit together"""


class DomainError(DosCtrlError):
    """Argument outside the domain of the operation"""


class CertificationError(DosCtrlError):
    """A Lyapunov certificate cannot be built (e.g. Φ not Hurwitz)"""


class InfeasibleError(DosCtrlError):
    """A stability condition or parameter bound cannot be met"""


class ConfigError(DosCtrlError):
    """Malformed scenario, trace file or simulation configuration"""


class EmptySequenceError(DosCtrlError):
    """An operation needs at least one successful transmission"""


class InputContractError(DosCtrlError):
    """A caller broke the input contract of a controller step"""
