"""Exceptions raised by the peer network and the framework functions."""


class FrameworkError(Exception):
    """Base class for orchestration failures."""
    code = "framework-error"


class TopologyError(FrameworkError):
    """Topology document is inconsistent."""
    code = "topology-error"


class AgencyViolation(FrameworkError):
    """A peer tried to act for an account it does not hold."""
    code = "agency-violation"


class StepFailed(FrameworkError):
    """
    One step of a multi-transaction framework function failed.

    ``step`` is 1-based; ``code`` is the failing receipt's status (or the
    lookup error's code) so callers can tell why without parsing text.
    """

    def __init__(self, function, step, code, detail=""):
        super().__init__(f"{function} step {step} failed: {code} {detail}".rstrip())
        self.function = function
        self.step = step
        self.code = code


class TransactionFailed(FrameworkError):
    """A transaction was mined but its receipt carries an error."""

    def __init__(self, receipt):
        super().__init__(f"transaction {receipt.tx_id.hex()[:12]} failed: {receipt.status}")
        self.receipt = receipt
        self.code = receipt.status


class PendingTimeout(FrameworkError):
    """The awaited event did not show up within the allowed rounds."""
    code = "pending-timeout"
