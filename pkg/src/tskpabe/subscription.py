"""Subscription lifecycle: pseudo-identities, key issuance, revocation.

Each purchase derives a fresh nonzero pseudo-identity from the user id,
the start day and a nonce, then issues a private key whose time cover is
the minimal cover of the purchased window.  Early cancellation puts the
pseudo-identity on a digest-chained ledger; an on-board agent queries the
ledger once per simulated day and caches the verdict until the next day.

Cryptographic expiry comes from the key's time cover; the ledger only
handles cancellation before expiry.  Expired entries are pruned: the chain
is compacted and re-linked behind a pruning record that retains the prior
head digest, so full-chain verification keeps passing.
"""

import hashlib
import json
from dataclasses import dataclass, field
from random import Random

from . import lsss
from .groups import BilinearSuite, Scalar
from .scheme import MasterKey, PrivateKey, PublicParams, TimedKpAbe
from .timetree import (
    GREGORIAN,
    CalendarSystem,
    Day,
    TimeWindow,
    format_day,
    parse_day,
    set_cover,
)
from .wire import pack_bytes, pack_str


@dataclass(frozen=True)
class PseudoIdentity:
    scalar: Scalar
    display: str

    @classmethod
    def from_scalar(cls, scalar: Scalar) -> "PseudoIdentity":
        return cls(scalar, f"pid:{scalar.value:x}")


def derive_pseudo_id(
    suite: BilinearSuite, user: str, start: Day, nonce: bytes = b""
) -> PseudoIdentity:
    """Nonzero scalar from the canonical (user, start day, nonce) encoding."""
    material = pack_str(user) + pack_str(format_day(start)) + pack_bytes(nonce)
    return PseudoIdentity.from_scalar(suite.hash_to_scalar(material))


@dataclass(frozen=True)
class SubscriptionRecord:
    user: str
    window: TimeWindow
    policy: str
    attributes: tuple[str, ...]
    pseudo_identity: PseudoIdentity
    key: PrivateKey


class SecureChannelStub:
    """Stand-in for the authenticated delivery channel: it records that
    both ends identified each other and the payload arrived intact."""

    def __init__(self):
        self.deliveries: list[dict] = []

    def deliver(self, recipient: str, payload) -> dict:
        receipt = {
            "recipient": recipient,
            "mutually_authenticated": True,
            "integrity_protected": True,
            "payload_kind": type(payload).__name__,
        }
        self.deliveries.append(receipt)
        return receipt


class SubscriptionService:
    """Provider-side state: scheme handles, a clock, and a channel."""

    def __init__(
        self,
        scheme: TimedKpAbe,
        pk: PublicParams,
        mk: MasterKey,
        clock: Day,
        *,
        rng: Random,
        calendar: CalendarSystem = GREGORIAN,
        channel: SecureChannelStub | None = None,
    ):
        self.scheme = scheme
        self.pk = pk
        self.mk = mk
        self.clock = clock
        self.rng = rng
        self.calendar = calendar
        self.channel = channel or SecureChannelStub()

    def subscribe(
        self, user: str, window: TimeWindow, policy: str, nonce: bytes = b""
    ) -> SubscriptionRecord:
        window.validate(self.calendar)
        if self.calendar.to_ordinal(window.end) < self.calendar.to_ordinal(self.clock):
            raise ValueError(
                f"window {window} lies entirely before the provider clock "
                f"{format_day(self.clock)}"
            )
        pid = derive_pseudo_id(self.scheme.suite, user, window.start, nonce)
        access = lsss.compile_policy(policy, self.scheme.suite.p)
        cover = set_cover(window, self.calendar)
        key = self.scheme.keygen(
            self.pk, self.mk, pid.scalar, cover, access, rng=self.rng
        )
        record = SubscriptionRecord(
            user=user,
            window=window,
            policy=policy,
            attributes=tuple(sorted(set(access.row_attributes))),
            pseudo_identity=pid,
            key=key,
        )
        self.channel.deliver(user, record)
        return record


# ----------------------------------------------------------------------
# Revocation ledger: single-writer, digest-chained, verifiable pruning.
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerEntry:
    pid: str  # pseudo-identity display form
    expected_expiry: Day
    tx_timestamp: str  # "day/seq" of the recording transaction


@dataclass(frozen=True)
class Block:
    index: int
    kind: str  # "entries" | "prune"
    prev: str  # hex digest of the previous block, "" for the head
    payload: dict
    digest: str

    @staticmethod
    def compute_digest(index: int, kind: str, prev: str, payload: dict) -> str:
        body = json.dumps(
            {"index": index, "kind": kind, "prev": prev, "payload": payload},
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8")
        return hashlib.sha256(body).hexdigest()

    @classmethod
    def make(cls, index: int, kind: str, prev: str, payload: dict) -> "Block":
        return cls(index, kind, prev, payload, cls.compute_digest(index, kind, prev, payload))


def _entry_payload(entry: LedgerEntry) -> dict:
    return {
        "pid": entry.pid,
        "expected_expiry": format_day(entry.expected_expiry),
        "tx_timestamp": entry.tx_timestamp,
    }


def _entry_from_payload(payload: dict) -> LedgerEntry:
    return LedgerEntry(
        pid=payload["pid"],
        expected_expiry=parse_day(payload["expected_expiry"]),
        tx_timestamp=payload["tx_timestamp"],
    )


@dataclass
class RevocationLedger:
    """Append-only block log with digest chaining and compacting prune."""

    calendar: CalendarSystem = GREGORIAN
    blocks: list[Block] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    _tx_seq: int = 0

    def _append(self, kind: str, payload: dict) -> Block:
        prev = self.blocks[-1].digest if self.blocks else ""
        block = Block.make(len(self.blocks), kind, prev, payload)
        self.blocks.append(block)
        return block

    def entries(self) -> list[LedgerEntry]:
        out = []
        for block in self.blocks:
            if block.kind == "entries":
                out.extend(_entry_from_payload(p) for p in block.payload["entries"])
        return out

    def lookup(self, pid: str) -> LedgerEntry | None:
        for entry in self.entries():
            if entry.pid == pid:
                return entry
        return None

    def revoke(self, pid: str, expected_expiry: Day, now: Day) -> LedgerEntry:
        """Record a cancellation.  Re-revoking an already listed identity
        is a no-op and only emits a warning."""
        self.calendar.validate_day(expected_expiry)
        self.calendar.validate_day(now)
        existing = self.lookup(pid)
        if existing is not None:
            self.warnings.append(f"duplicate revocation ignored for {pid}")
            return existing
        self._tx_seq += 1
        entry = LedgerEntry(pid, expected_expiry, f"{format_day(now)}/{self._tx_seq}")
        self._append("entries", {"entries": [_entry_payload(entry)]})
        return entry

    def prune(self, clock: Day) -> int:
        """Drop entries whose expiry lies strictly before the clock.

        The surviving entries are re-blocked behind a pruning record that
        carries the prior head digest, keeping the chain verifiable while
        the expired records physically disappear.
        """
        self.calendar.validate_day(clock)
        clock_ord = self.calendar.to_ordinal(clock)
        survivors, removed = [], 0
        for entry in self.entries():
            if self.calendar.to_ordinal(entry.expected_expiry) < clock_ord:
                removed += 1
            else:
                survivors.append(entry)
        if removed == 0:
            return 0
        prior_head = self.blocks[-1].digest if self.blocks else ""
        self.blocks = []
        self._append(
            "prune",
            {
                "pruned_at": format_day(clock),
                "removed": removed,
                "prior_head": prior_head,
            },
        )
        if survivors:
            self._append(
                "entries", {"entries": [_entry_payload(e) for e in survivors]}
            )
        return removed

    def verify(self) -> bool:
        """Recompute every digest and check the chain links end-to-end."""
        prev = ""
        for index, block in enumerate(self.blocks):
            if block.index != index or block.prev != prev:
                return False
            if Block.compute_digest(block.index, block.kind, block.prev, block.payload) != block.digest:
                return False
            prev = block.digest
        return True

    # -- persistence: one canonical JSON block per line -----------------

    def to_text(self) -> str:
        lines = [
            json.dumps(
                {
                    "index": b.index,
                    "kind": b.kind,
                    "prev": b.prev,
                    "payload": b.payload,
                    "digest": b.digest,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
            for b in self.blocks
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(
        cls, text: str, calendar: CalendarSystem = GREGORIAN
    ) -> "RevocationLedger":
        ledger = cls(calendar=calendar)
        for line in text.splitlines():
            if not line.strip():
                continue
            raw = json.loads(line)
            ledger.blocks.append(
                Block(raw["index"], raw["kind"], raw["prev"], raw["payload"], raw["digest"])
            )
        ledger._tx_seq = sum(
            len(b.payload["entries"]) for b in ledger.blocks if b.kind == "entries"
        )
        return ledger

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path, calendar: CalendarSystem = GREGORIAN) -> "RevocationLedger":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), calendar)


class InfotainmentAgent:
    """On-board revocation checker.  One ledger query per simulated day;
    the verdict is cached until the day changes."""

    ACTIVE = "active"
    REVOKED = "revoked"

    def __init__(self, ledger: RevocationLedger):
        self.ledger = ledger
        self._cache: dict[str, tuple[Day, str]] = {}

    def daily_check(self, pid: str, clock: Day) -> str:
        cached = self._cache.get(pid)
        if cached is not None and cached[0] == clock:
            return cached[1]
        status = self.REVOKED if self.ledger.lookup(pid) is not None else self.ACTIVE
        self._cache[pid] = (clock, status)
        return status
