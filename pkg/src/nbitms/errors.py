"""Exception hierarchy shared across the engine."""


class NbitmsError(Exception):
    """Base class for all engine errors."""


class ConfigError(NbitmsError):
    """Invalid engine, fleet, or registry configuration.

    ``problems`` aggregates every issue found in one validation pass.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class NotFoundError(NbitmsError):
    """A referenced entity (alarm, object, device, transaction) does not exist."""


class InvalidStateError(NbitmsError):
    """Operation not allowed in the entity's current lifecycle state."""


class ContractViolationError(NbitmsError):
    """Caller broke an internal API precondition (e.g. mismatched object ids)."""


class MacroError(NbitmsError):
    """Malformed command template (unbalanced macro delimiters)."""


class PluginLaunchError(NbitmsError):
    """The plugin executable could not be started at all."""


class BerEncodeError(NbitmsError):
    """A value cannot be represented in its BER tag."""


class BerDecodeError(NbitmsError):
    """Malformed BER input; carries the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class SnmpTimeoutError(NbitmsError):
    """No response after all retry attempts."""


class SnmpProtocolError(NbitmsError):
    """Agent answered with a non-zero error-status."""

    def __init__(self, error_status, error_index, message=""):
        detail = message or f"error_status={error_status} error_index={error_index}"
        super().__init__(detail)
        self.error_status = error_status
        self.error_index = error_index


class PlanError(NbitmsError):
    """Transaction planning failed (unreadable device or invalid directives).

    ``problems`` lists every offending directive in one pass.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class DomainError(NbitmsError):
    """Evaluator input outside its mathematical domain."""


class LoadStateError(NbitmsError):
    """Persisted state file is unreadable or corrupt."""
