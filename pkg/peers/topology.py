"""Peers, their roles, and the topology document that lists them."""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from peers.errors import TopologyError

TOPOLOGY_SCHEMA_VERSION = 1


class Role(str, Enum):
    """Kinds of peer in the IoT system."""
    SERVER = "server"
    STORAGE = "storage"
    USER_DEVICE = "userDevice"
    GATEWAY = "gateway"
    IOT_DEVICE = "iotDevice"


class PeerSpec(BaseModel):
    """One peer as written in the topology document."""
    id: str
    role: Role
    agent: str | None = None
    account_seed: str | None = Field(default=None, alias="accountSeed")

    model_config = {"populate_by_name": True, "extra": "forbid"}

    @property
    def label(self):
        """Label the peer's account is derived from."""
        return self.account_seed or self.id


class TopologySpec(BaseModel):
    """Validated topology document."""
    schema_version: int = Field(default=TOPOLOGY_SCHEMA_VERSION, alias="schemaVersion")
    peers: list[PeerSpec]
    miners: list[str]
    registrar: str | None = None

    model_config = {"populate_by_name": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _check_consistency(self):
        # pylint: disable=R0912
        if self.schema_version != TOPOLOGY_SCHEMA_VERSION:
            raise ValueError(f"unsupported topology schemaVersion {self.schema_version}")
        by_id = {}
        for peer in self.peers:
            if peer.id in by_id:
                raise ValueError(f"duplicate peer id {peer.id!r}")
            by_id[peer.id] = peer
        labels = [peer.label for peer in self.peers]
        if len(set(labels)) != len(labels):
            raise ValueError("account seeds must be unique")
        for peer in self.peers:
            if peer.role is Role.IOT_DEVICE:
                agent = by_id.get(peer.agent or "")
                if agent is None or agent.role is not Role.GATEWAY:
                    raise ValueError(f"iot device {peer.id!r} needs a gateway agent")
            elif peer.agent is not None:
                raise ValueError(f"only iot devices have an agent ({peer.id!r})")
        if not self.miners:
            raise ValueError("at least one miner is required")
        for miner in self.miners:
            if miner not in by_id or by_id[miner].role is Role.IOT_DEVICE:
                raise ValueError(f"miner {miner!r} must be a non-iot peer")
        registrar = self.registrar or self.peers[0].id
        if registrar not in by_id or by_id[registrar].role is Role.IOT_DEVICE:
            raise ValueError(f"registrar {registrar!r} must be a non-iot peer")
        return self

    @property
    def registrar_id(self):
        """Peer that deploys the register contract."""
        return self.registrar or self.peers[0].id

    def account_labels(self):
        """Account labels in peer order, as fed to genesis."""
        return tuple(peer.label for peer in self.peers)


def load_topology(path):
    """
    Read and validate a YAML topology document.

    Raises:
        TopologyError: unreadable or inconsistent document
    """
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        return TopologySpec.model_validate(raw)
    except (OSError, yaml.YAMLError, ValidationError) as exc:
        raise TopologyError(f"bad topology {path}: {exc}") from exc


@dataclass
class Peer:
    """
    A participant with its account.

    Gateways list the device accounts they sign for in ``gateway_of``;
    IoT devices name their gateway in ``agent``.
    """
    id: str
    account: bytes
    role: Role
    gateway_of: list = field(default_factory=list)
    agent: bytes | None = None
    inbox: list = field(default_factory=list)
    delivered: set = field(default_factory=set, repr=False)

    @property
    def runs_client(self):
        """IoT devices have no ledger client of their own."""
        return self.role is not Role.IOT_DEVICE

    def notify(self, item):
        """
        Local, off-chain notification (gateway to device).

        Items carrying a ``tx_id`` are delivered once per transaction, whichever
        path reports them first.

        Returns:
            bool: False when the item was already delivered
        """
        key = getattr(item, "tx_id", None)
        if key is not None:
            if key in self.delivered:
                return False
            self.delivered.add(key)
        self.inbox.append(item)
        return True


class Topology:
    """Peers of one run, indexed by id and by account."""

    def __init__(self, spec, accounts):
        """
        Bind a topology document to concrete accounts.

        Args:
            spec: Validated TopologySpec
            accounts: Addresses in the same order as spec.account_labels()
        """
        self.spec = spec
        self.peers = {}
        for peer_spec, account in zip(spec.peers, accounts):
            self.peers[peer_spec.id] = Peer(peer_spec.id, account, peer_spec.role)
        for peer_spec in spec.peers:
            if peer_spec.agent is not None:
                device = self.peers[peer_spec.id]
                gateway = self.peers[peer_spec.agent]
                device.agent = gateway.account
                gateway.gateway_of.append(device.account)
        self._by_account = {peer.account: peer for peer in self.peers.values()}

    def peer(self, peer_id):
        """Peer by id."""
        try:
            return self.peers[peer_id]
        except KeyError as exc:
            raise TopologyError(f"unknown peer {peer_id!r}") from exc

    def by_account(self, account):
        """Peer holding an account, or None."""
        return self._by_account.get(account)

    def agent_of(self, peer):
        """The gateway peer signing for an IoT device."""
        return self._by_account[peer.agent]
