"""Small helpers shared by the test modules."""
import itertools
from functools import lru_cache
from pathlib import Path

from cli.runner import run_scenario
from runtime.types import Transaction
from runtime.world import World

_nonces = itertools.count()

POLICY = ("temperature", "read", "allow", 100, 2)


def make_world(seed=0, labels=("subject", "object", "stranger"), **kwargs):
    """World with one account per label; returns (world, accounts)."""
    world = World(seed, **kwargs)
    return world, [world.create_account(label) for label in labels]


def send(world, sender, target, abi_name, *args, time=0, height=1, timestamp=0):
    """Apply one transaction and return its receipt."""
    # pylint: disable=R0913
    tx = Transaction.create(sender, target, abi_name, args, time, next(_nonces))
    return world.apply_transaction(tx, height, timestamp)


def deploy(world, sender, kind, *args):
    """Deploy a contract and return its address."""
    receipt = send(world, sender, None, kind, *args)
    assert receipt.ok, receipt
    return receipt.return_values[0]


def access_pair(world, subject, obj, policies=(POLICY,), judge=(2, 3, 60)):
    """
    An ACC for (subject, obj) bound to a fresh JC, with policies added.

    Returns:
        tuple: (acc address, jc address)
    """
    jc = deploy(world, obj, "JC", *judge)
    acc = deploy(world, obj, "ACC", subject, obj)
    assert send(world, obj, acc, "setJC", jc).ok
    for policy in policies:
        assert send(world, obj, acc, "policyAdd", *policy).ok
    return acc, jc


def request(world, sender, acc, time, resource="temperature", action="read"):
    """accessControl at ``time``; returns the receipt."""
    return send(world, sender, acc, "accessControl", resource, action, time, time=time)


SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@lru_cache(maxsize=None)
def bundled_run(name):
    """Run a bundled scenario once per test session (no files written)."""
    report = run_scenario(SCENARIO_DIR / name)
    assert report.ok, report.failure
    return report
