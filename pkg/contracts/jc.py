"""Judge Contract: per-subject misbehavior history and penalty decisions."""
from dataclasses import dataclass

from loguru import logger

from contracts.judging import JUDGING_METHODS, AcceptAllJudging, capped_penalty
from runtime.contract import Contract, abi
from runtime.errors import ContractError, MalformedArguments, PermissionDenied
from runtime.types import Address

DEFAULT_PENALTY_UNIT_SECONDS = 60
MAX_PENALTY_SECONDS = 2**31 - 1


class AccOnly(ContractError):
    """misbehaviorJudge was not reached through a message from an ACC."""
    code = "acc-only"


@dataclass(frozen=True)
class JudgeRecord:
    """One judged misbehavior of a subject."""
    object: Address
    misbehavior: str
    time: int
    penalty: int
    capped: bool = False

    def as_values(self):
        """ABI-friendly tuple."""
        return (self.object, self.misbehavior, self.time, self.penalty, self.capped)


class JudgeContract(Contract):
    """
    Judges misbehavior reports and returns a penalty in seconds.

    The penalty grows with the subject's history across every object:
    ``base ** (l // interval) * penalty_unit_seconds`` where ``l`` counts the
    subject's records including the one just appended.
    """
    kind = "JC"
    init_types = (int, int, int, str)

    def __init__(self, address, creator):
        super().__init__(address, creator)
        self.base = 1
        self.interval = 1
        self.penalty_unit_seconds = DEFAULT_PENALTY_UNIT_SECONDS
        self.method = AcceptAllJudging.name
        self.records = {}

    @classmethod
    def deploy(cls, address, creator, init_args):
        # the penalty unit and the judging method may be left out
        if len(init_args) == 2:
            init_args = (*init_args, DEFAULT_PENALTY_UNIT_SECONDS)
        if len(init_args) == 3:
            init_args = (*init_args, AcceptAllJudging.name)
        return super().deploy(address, creator, init_args)

    def setup(self, base, interval, penalty_unit_seconds, method):
        # pylint: disable=W0221
        if base < 1 or interval < 1 or penalty_unit_seconds < 1:
            raise MalformedArguments("base, interval and penalty unit must be positive")
        if method not in JUDGING_METHODS:
            raise MalformedArguments(f"unknown judging method {method!r}")
        self.method = method
        self.base = base
        self.interval = interval
        self.penalty_unit_seconds = penalty_unit_seconds

    @abi("misbehaviorJudge", Address, Address, str, int)
    def misbehavior_judge(self, ctx, subject, obj, misbehavior, time):
        """
        Record a reported misbehavior and decide its penalty.

        Only reachable through a message sent by an ACC.

        Returns:
            int: Penalty in seconds
        """
        # pylint: disable=R0913
        if not ctx.via_message or ctx.world.kind_of(ctx.caller) != "ACC":
            raise AccOnly("misbehaviorJudge only accepts reports from an ACC")

        history = self.records.get(subject, [])
        if not JUDGING_METHODS[self.method].accepts(history, misbehavior):
            return 0

        count = len(history) + 1
        penalty, capped = capped_penalty(self.base, self.interval, count,
                                         self.penalty_unit_seconds, MAX_PENALTY_SECONDS)
        record = JudgeRecord(obj, misbehavior, time, penalty, capped)
        self.records.setdefault(subject, []).append(record)
        logger.debug("judged {} misbehavior #{}: {}s", subject, count, penalty)
        return penalty

    @abi("getRecords", Address, mutating=False)
    def get_records(self, ctx, subject):
        """Misbehavior records of a subject, oldest first."""
        return (tuple(record.as_values() for record in self.records.get(subject, ())),)

    @abi("deleteJC")
    def delete_jc(self, ctx):
        """Selfdestruct, creator only."""
        if ctx.caller != self.creator:
            raise PermissionDenied("only the creator can delete the JC")
        ctx.selfdestruct()

    def canonical(self):
        return {
            "base": self.base,
            "interval": self.interval,
            "penaltyUnitSeconds": self.penalty_unit_seconds,
            "method": self.method,
            "records": {subject: [record.as_values() for record in history]
                        for subject, history in self.records.items()},
        }
