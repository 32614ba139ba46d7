"""Contract kinds known to the runtime, by kind tag."""
from contracts.acc import AccessControlContract
from contracts.jc import JudgeContract
from contracts.rc import RegisterContract

CONTRACT_KINDS = {
    AccessControlContract.kind: AccessControlContract,
    JudgeContract.kind: JudgeContract,
    RegisterContract.kind: RegisterContract,
}
