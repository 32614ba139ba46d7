"""Access Control Contract for one subject-object pair."""
from dataclasses import dataclass, field

from loguru import logger

from runtime.contract import NONE_TYPE, Contract, abi
from runtime.errors import ContractError, MalformedArguments, PermissionDenied
from runtime.types import Address
from runtime.utils import MAX_STORED_INT

ALLOW = "allow"
DENY = "deny"
PERMISSIONS = (ALLOW, DENY)

RETURN_RESULT = "returnResult"


class DuplicatePolicy(ContractError):
    """A policy for this (resource, action) already exists."""
    code = "duplicate-policy"


class NoSuchPolicy(ContractError):
    """No policy for this (resource, action)."""
    code = "no-such-policy"


class NotAJudge(ContractError):
    """setJC was given an address that hosts no live JC."""
    code = "not-a-jc"


class UnauthorizedCaller(ContractError):
    """accessControl called by someone other than the subject or object."""
    code = "unauthorized-caller"


class JudgeUnset(ContractError):
    """accessControl needs a JC and none was set."""
    code = "judge-unset"


@dataclass
class Policy:
    """One row of the policy list, keyed by (resource, action)."""
    # pylint: disable=R0902
    resource: str
    action: str
    permission: str
    min_interval: int
    threshold: int
    to_lr: int = 0
    no_fr: int = 0

    def as_values(self):
        """ABI-friendly tuple, in the order getPolicy returns it."""
        return (self.resource, self.action, self.permission, self.to_lr,
                self.min_interval, self.no_fr, self.threshold)

    @classmethod
    def from_values(cls, values):
        """Rebuild a snapshot from getPolicy's return values."""
        resource, action, permission, to_lr, min_interval, no_fr, threshold = values
        return cls(resource, action, permission, min_interval, threshold, to_lr, no_fr)


@dataclass(frozen=True)
class MisbehaviorEntry:
    """One row of a resource's misbehavior list."""
    misbehavior: str
    time: int
    penalty: int

    def as_values(self):
        """ABI-friendly tuple."""
        return (self.misbehavior, self.time, self.penalty)


@dataclass
class ResourceState:
    """Blocking state and misbehavior ledger of one resource."""
    resource: str
    time_of_unblock: int = 0
    misbehaviors: list = field(default_factory=list)


def describe_frequent_request(resource, action, no_fr):
    """Misbehavior details handed to the judge."""
    return f"frequent-request resource={resource} action={action} noFR={no_fr}"


def _check_policy_fields(permission, min_interval, threshold):
    if permission is not None and permission not in PERMISSIONS:
        raise MalformedArguments(f"permission must be one of {PERMISSIONS}, got {permission!r}")
    if min_interval is not None and min_interval < 0:
        raise MalformedArguments("minInterval must be non-negative")
    if threshold is not None and threshold < 1:
        raise MalformedArguments("threshold must be positive")


class AccessControlContract(Contract):
    """
    Static (policy) and dynamic (behavior) validation of access requests.

    Exactly one subject-object pair per contract. Only the creator may change
    policies, bind the judge or destroy the contract.
    """
    kind = "ACC"
    init_types = (Address, Address)

    def __init__(self, address, creator):
        super().__init__(address, creator)
        self.subject = None
        self.object = None
        self.jc_address = None
        self.policies = {}
        self.resources = {}

    def setup(self, subject, obj):
        # pylint: disable=W0221
        self.subject = subject
        self.object = obj

    def _require_creator(self, ctx, what):
        if ctx.caller != self.creator:
            raise PermissionDenied(f"only the creator can {what}")

    def _policy(self, resource, action):
        policy = self.policies.get((resource, action))
        if policy is None:
            raise NoSuchPolicy(f"no policy for ({resource}, {action})")
        return policy

    # ==================== POLICY MANAGEMENT ====================
    @abi("policyAdd", str, str, str, int, int)
    def policy_add(self, ctx, resource, action, permission, min_interval, threshold):
        """Add a policy with fresh request history."""
        # pylint: disable=R0913
        self._require_creator(ctx, "add a policy")
        if (resource, action) in self.policies:
            raise DuplicatePolicy(f"policy for ({resource}, {action}) already exists")
        _check_policy_fields(permission, min_interval, threshold)
        self.policies[(resource, action)] = Policy(resource, action, permission,
                                                   min_interval, threshold)
        self.resources.setdefault(resource, ResourceState(resource))

    @abi("policyUpdate", str, str, (str, NONE_TYPE), (int, NONE_TYPE), (int, NONE_TYPE))
    def policy_update(self, ctx, resource, action, permission, min_interval, threshold):
        """Replace the given fields; None leaves a field as it is."""
        # pylint: disable=R0913
        self._require_creator(ctx, "update a policy")
        policy = self._policy(resource, action)
        _check_policy_fields(permission, min_interval, threshold)
        if permission is not None:
            policy.permission = permission
        if min_interval is not None:
            policy.min_interval = min_interval
        if threshold is not None:
            policy.threshold = threshold

    @abi("policyDelete", str, str)
    def policy_delete(self, ctx, resource, action):
        """Remove a policy; the resource's misbehavior list is kept."""
        self._require_creator(ctx, "delete a policy")
        self._policy(resource, action)
        del self.policies[(resource, action)]

    @abi("setJC", Address)
    def set_jc(self, ctx, jc_address):
        """Bind the judge this ACC reports misbehavior to."""
        self._require_creator(ctx, "set the JC")
        if not ctx.world.is_alive(jc_address) or ctx.world.kind_of(jc_address) != "JC":
            raise NotAJudge(f"{jc_address} hosts no live JC")
        self.jc_address = jc_address

    @abi("deleteACC")
    def delete_acc(self, ctx):
        """Selfdestruct, creator only."""
        self._require_creator(ctx, "delete the ACC")
        ctx.selfdestruct()

    # ==================== ACCESS CONTROL ====================
    @abi("accessControl", str, str, int)
    def access_control(self, ctx, resource, action, time):
        """
        Decide an access request of the subject.

        The request may come from the subject itself or be forwarded by the
        object. A request for an unknown (resource, action) is denied with
        penalty 0 and still reported through the event.

        Returns:
            tuple: (result, penalty)
        """
        if ctx.caller not in (self.subject, self.object):
            raise UnauthorizedCaller(f"{ctx.caller} is neither subject nor object")
        if self.jc_address is None:
            raise JudgeUnset("setJC must run before accessControl")
        time = ctx.world.effective_time(ctx, time)

        policy_check = False
        behavior_check = True
        penalty = 0

        policy = self.policies.get((resource, action))
        if policy is not None:
            state = self.resources[resource]
            if state.time_of_unblock <= time:
                # the previous block window is over, start counting afresh
                if state.time_of_unblock > 0:
                    policy.no_fr = 0
                    policy.to_lr = 0
                    state.time_of_unblock = 0

                policy_check = policy.permission == ALLOW

                if time - policy.to_lr <= policy.min_interval:
                    policy.no_fr += 1
                    if policy.no_fr >= policy.threshold:
                        misbehavior = describe_frequent_request(resource, action, policy.no_fr)
                        behavior_check = False
                        penalty = ctx.send_message(self.jc_address, "misbehaviorJudge",
                                                   self.subject, self.object,
                                                   misbehavior, time)[0]
                        if time + penalty > MAX_STORED_INT:
                            raise MalformedArguments(f"unblock time {time + penalty} is out of range")
                        state.time_of_unblock = time + penalty
                        state.misbehaviors.append(MisbehaviorEntry(misbehavior, time, penalty))
                        logger.debug("{} blocked on {} until {}", self.subject, resource,
                                     state.time_of_unblock)
                else:
                    policy.no_fr = 0
            # updated even while blocked
            policy.to_lr = time

        result = policy_check and behavior_check
        ctx.emit(RETURN_RESULT, result, penalty)
        return result, penalty

    # ==================== INSPECTION ====================
    @abi("getPolicy", str, str, mutating=False)
    def get_policy(self, ctx, resource, action):
        """Snapshot of one policy row."""
        return self._policy(resource, action).as_values()

    @abi("getMisbehaviors", str, mutating=False)
    def get_misbehaviors(self, ctx, resource):
        """Misbehavior list of a resource, oldest first."""
        state = self.resources.get(resource)
        if state is None:
            return ((),)
        return (tuple(entry.as_values() for entry in state.misbehaviors),)

    @abi("getTimeOfUnblock", str, mutating=False)
    def get_time_of_unblock(self, ctx, resource):
        """Instant until which the resource is blocked, 0 when unblocked."""
        state = self.resources.get(resource)
        return state.time_of_unblock if state is not None else 0

    def canonical(self):
        return {
            "subject": self.subject,
            "object": self.object,
            "jc": self.jc_address,
            "policies": {key: list(policy.as_values()) for key, policy in self.policies.items()},
            "resources": {
                name: [state.time_of_unblock,
                       [entry.as_values() for entry in state.misbehaviors]]
                for name, state in self.resources.items()
            },
        }
