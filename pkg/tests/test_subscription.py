from random import Random

import pytest

from tskpabe.groups import TransparentSuite
from tskpabe.scheme import Mode, TimedKpAbe, component_counts
from tskpabe.subscription import (
    InfotainmentAgent,
    RevocationLedger,
    SecureChannelStub,
    SubscriptionService,
    derive_pseudo_id,
)
from tskpabe.timetree import GREGORIAN, TimeCover, TimeNode, TimeWindow

P = 2**31 - 1


@pytest.fixture
def provider():
    scheme = TimedKpAbe(TransparentSuite(P), Mode.REPAIRED)
    rng = Random(77)
    pk, mk = scheme.setup(["gold", "family", "platinum"], depth=4, rng=rng)
    return SubscriptionService(scheme, pk, mk, clock=(2022, 6, 1), rng=rng)


def test_pseudo_id_deterministic_and_nonzero():
    suite = TransparentSuite(P)
    a = derive_pseudo_id(suite, "alice", (2022, 7, 1), b"n1")
    b = derive_pseudo_id(suite, "alice", (2022, 7, 1), b"n1")
    assert a == b
    assert a.scalar.value != 0
    assert a.display.startswith("pid:")


def test_pseudo_id_varies_with_start_and_nonce():
    # A large modulus keeps accidental collisions out of a 10k sample.
    suite = TransparentSuite(2**61 - 1)
    cal = GREGORIAN
    base = cal.to_ordinal((2000, 1, 1))
    pids = {
        derive_pseudo_id(suite, "alice", cal.from_ordinal(base + i)).scalar.value
        for i in range(10_000)
    }
    assert len(pids) == 10_000
    assert derive_pseudo_id(suite, "alice", (2022, 7, 1), b"a") != derive_pseudo_id(
        suite, "alice", (2022, 7, 1), b"b"
    )


def test_subscribe_issues_key_over_window_cover(provider):
    record = provider.subscribe(
        "alice", TimeWindow.parse("2022-07-01..2022-09-02"), "gold AND family"
    )
    assert record.key.cover.texts() == ["2022-07", "2022-08", "2022-09-01", "2022-09-02"]
    assert len(record.key.d_time) == 4
    assert record.key.pid == record.pseudo_identity.scalar
    assert record.attributes == ("family", "gold")
    assert provider.channel.deliveries[-1]["mutually_authenticated"]


def test_subscribe_one_day_window(provider):
    record = provider.subscribe("bob", TimeWindow.parse("2022-08-05..2022-08-05"), "gold")
    assert len(record.key.d_time) == 1
    assert component_counts(record.key) == (2 * 1 + 1 + 1, 1)


def test_subscribed_key_decrypts_matching_month(provider):
    record = provider.subscribe(
        "alice", TimeWindow.parse("2022-07-01..2022-09-02"), "gold AND family"
    )
    scheme, pk = provider.scheme, provider.pk
    message = scheme.suite.random_target(provider.rng)
    ct = scheme.encrypt(
        pk,
        message,
        TimeCover.from_nodes([TimeNode.parse("2022-08")]),
        ["gold", "family"],
        rng=provider.rng,
    )
    assert scheme.decrypt(pk, ct, record.key) == message


def test_subscribe_rejects_past_window(provider):
    with pytest.raises(ValueError, match="before the provider clock"):
        provider.subscribe("alice", TimeWindow.parse("2022-01-01..2022-02-01"), "gold")


def test_revoke_then_daily_check_denies(provider):
    record = provider.subscribe(
        "alice", TimeWindow.parse("2022-07-01..2022-09-02"), "gold AND family"
    )
    ledger = RevocationLedger()
    agent = InfotainmentAgent(ledger)
    pid = record.pseudo_identity.display
    assert agent.daily_check(pid, (2022, 7, 9)) == InfotainmentAgent.ACTIVE
    ledger.revoke(pid, (2022, 9, 2), now=(2022, 7, 10))
    assert agent.daily_check(pid, (2022, 7, 10)) == InfotainmentAgent.REVOKED


def test_agent_caches_verdict_within_a_day():
    ledger = RevocationLedger()
    agent = InfotainmentAgent(ledger)
    assert agent.daily_check("pid:1", (2022, 7, 10)) == InfotainmentAgent.ACTIVE
    ledger.revoke("pid:1", (2022, 9, 2), now=(2022, 7, 10))
    # Same day: cached verdict survives the mid-day revocation.
    assert agent.daily_check("pid:1", (2022, 7, 10)) == InfotainmentAgent.ACTIVE
    assert agent.daily_check("pid:1", (2022, 7, 11)) == InfotainmentAgent.REVOKED


def test_reissue_restores_service(provider):
    ledger = RevocationLedger()
    agent = InfotainmentAgent(ledger)
    first = provider.subscribe(
        "alice", TimeWindow.parse("2022-07-01..2022-09-02"), "gold", nonce=b"1"
    )
    ledger.revoke(first.pseudo_identity.display, (2022, 9, 2), now=(2022, 7, 10))
    assert (
        agent.daily_check(first.pseudo_identity.display, (2022, 7, 11))
        == InfotainmentAgent.REVOKED
    )
    second = provider.subscribe(
        "alice", TimeWindow.parse("2022-07-15..2022-10-15"), "gold", nonce=b"2"
    )
    assert second.pseudo_identity != first.pseudo_identity
    assert (
        agent.daily_check(second.pseudo_identity.display, (2022, 7, 16))
        == InfotainmentAgent.ACTIVE
    )


def test_revoke_idempotent():
    ledger = RevocationLedger()
    ledger.revoke("pid:7", (2022, 9, 2), now=(2022, 7, 10))
    ledger.revoke("pid:7", (2022, 9, 2), now=(2022, 7, 12))
    assert len(ledger.entries()) == 1
    assert any("duplicate" in w for w in ledger.warnings)


def test_prune_strictly_after_expiry():
    ledger = RevocationLedger()
    ledger.revoke("pid:7", (2022, 9, 2), now=(2022, 7, 10))
    assert ledger.prune((2022, 9, 2)) == 0  # expiry day itself is retained
    assert ledger.lookup("pid:7") is not None
    assert ledger.prune((2022, 9, 3)) == 1
    assert ledger.lookup("pid:7") is None
    assert ledger.verify()
    assert ledger.blocks[0].kind == "prune"
    assert ledger.blocks[0].payload["removed"] == 1


def test_prune_empty_ledger():
    ledger = RevocationLedger()
    assert ledger.prune((2022, 9, 3)) == 0
    assert ledger.verify()


def test_prune_keeps_unexpired_entries():
    ledger = RevocationLedger()
    ledger.revoke("pid:1", (2022, 9, 2), now=(2022, 7, 10))
    ledger.revoke("pid:2", (2022, 12, 31), now=(2022, 7, 11))
    prior_head = ledger.blocks[-1].digest
    assert ledger.prune((2022, 10, 1)) == 1
    assert ledger.lookup("pid:2") is not None
    assert ledger.verify()
    assert ledger.blocks[0].payload["prior_head"] == prior_head


def test_mutating_an_entry_breaks_verification():
    ledger = RevocationLedger()
    ledger.revoke("pid:7", (2022, 9, 2), now=(2022, 7, 10))
    ledger.revoke("pid:8", (2022, 9, 9), now=(2022, 7, 11))
    assert ledger.verify()
    ledger.blocks[0].payload["entries"][0]["pid"] = "pid:9"
    assert not ledger.verify()


def test_ledger_text_roundtrip(tmp_path):
    ledger = RevocationLedger()
    ledger.revoke("pid:7", (2022, 9, 2), now=(2022, 7, 10))
    ledger.prune((2022, 10, 1))
    ledger.revoke("pid:8", (2022, 11, 2), now=(2022, 10, 2))
    path = tmp_path / "ledger.jsonl"
    ledger.save(path)
    loaded = RevocationLedger.load(path)
    assert loaded.verify()
    assert [b.digest for b in loaded.blocks] == [b.digest for b in ledger.blocks]
    assert loaded.lookup("pid:8") is not None


def test_revocation_is_ledger_layer_not_algebraic(provider):
    """A revoked but unexpired key still satisfies the scheme's algebra;
    denial of service comes from the agent, not the decryption equation."""
    record = provider.subscribe(
        "alice", TimeWindow.parse("2022-07-01..2022-09-02"), "gold AND family"
    )
    ledger = RevocationLedger()
    ledger.revoke(record.pseudo_identity.display, (2022, 9, 2), now=(2022, 7, 10))
    agent = InfotainmentAgent(ledger)
    assert (
        agent.daily_check(record.pseudo_identity.display, (2022, 7, 11))
        == InfotainmentAgent.REVOKED
    )
    scheme, pk = provider.scheme, provider.pk
    message = scheme.suite.random_target(provider.rng)
    ct = scheme.encrypt(
        pk,
        message,
        TimeCover.from_nodes([TimeNode.parse("2022-08")]),
        ["gold", "family"],
        rng=provider.rng,
    )
    assert scheme.decrypt(pk, ct, record.key) == message


def test_secure_channel_stub_records_flags():
    channel = SecureChannelStub()
    receipt = channel.deliver("alice", {"kind": "key"})
    assert receipt["mutually_authenticated"] and receipt["integrity_protected"]
    assert channel.deliveries == [receipt]
