from random import Random

import pytest

from support import (
    ScriptedRng,
    random_formula,
    random_window,
    recompute_step_d_logs,
    satisfying_set,
)
from tskpabe.groups import (
    BilinearSuite,
    OpCounters,
    SourceElement,
    SuiteMismatchError,
    TargetElement,
    TransparentSuite,
    UnsupportedSuiteError,
)
from tskpabe.lsss import compile_policy, reconstruct_coeffs
from tskpabe.scheme import (
    Mode,
    ModeMismatchError,
    PrivateKey,
    TimedKpAbe,
    component_counts,
    ct_from_bytes,
    ct_to_bytes,
    mk_from_bytes,
    mk_to_bytes,
    pk_from_bytes,
    pk_to_bytes,
    predicted_counts,
    predicted_pairings,
    sk_from_bytes,
    sk_to_bytes,
)
from tskpabe.timetree import TimeCover, TimeNode, TimeWindow, set_cover

P = 2**31 - 1

SUBSCRIPTION_WINDOW = TimeWindow.parse("2022-07-01..2022-09-02")


def make_scheme(mode=Mode.REPAIRED, p=P):
    return TimedKpAbe(TransparentSuite(p), mode)


def make_instance(scheme, policy="gold AND family", attrs=("gold", "family"), seed=1):
    rng = Random(seed)
    pk, mk = scheme.setup(["gold", "family", "platinum"], depth=4, rng=rng)
    access = compile_policy(policy, scheme.suite.p)
    cover = set_cover(SUBSCRIPTION_WINDOW)
    pid = scheme.suite.hash_to_scalar(b"alice")
    sk = scheme.keygen(pk, mk, pid, cover, access, rng=rng)
    message = scheme.suite.random_target(rng)
    ct_cover = TimeCover.from_nodes([TimeNode.parse("2022-08")])
    ct = scheme.encrypt(pk, message, ct_cover, attrs, rng=rng)
    return pk, mk, sk, ct, message


# ----------------------------------------------------------------------
# Setup.
# ----------------------------------------------------------------------


def test_setup_component_counts():
    scheme = make_scheme()
    pk, _ = scheme.setup(3, depth=4, rng=Random(0))
    assert component_counts(pk) == (14, 1)
    pk, _ = scheme.setup(1, depth=2, rng=Random(0))
    assert component_counts(pk) == (10, 1)


def test_setup_scripted_alpha_exposes_powers():
    scheme = make_scheme(p=101)
    pk, mk = scheme.setup(2, depth=4, rng=ScriptedRng([5]))
    assert mk.alpha.value == 5
    assert pk.g_alpha.log == 5
    assert pk.g_alpha_sq.log == 25
    assert pk.g_inv_alpha.log == 81  # 5 * 81 = 405 = 4 * 101 + 1


def test_setup_resamples_zero_alpha():
    scheme = make_scheme(p=101)
    pk, mk = scheme.setup(1, depth=2, rng=ScriptedRng([0, 0, 7]))
    assert mk.alpha.value == 7


def test_setup_inverse_alpha_consistency():
    scheme = make_scheme()
    pk, _ = scheme.setup(2, depth=4, rng=Random(3))
    suite = scheme.suite
    assert suite.pair(pk.g_alpha, pk.g_inv_alpha) == suite.pair(pk.g, pk.g)


def test_setup_rejects_bad_parameters():
    scheme = make_scheme()
    with pytest.raises(ValueError):
        scheme.setup(0, rng=Random(0))
    with pytest.raises(ValueError):
        scheme.setup(3, depth=1, rng=Random(0))
    with pytest.raises(ValueError):
        scheme.setup(["a", "a"], rng=Random(0))


# ----------------------------------------------------------------------
# KeyGen.
# ----------------------------------------------------------------------


def test_keygen_time_components_follow_cover():
    scheme = make_scheme()
    _, _, sk, _, _ = make_instance(scheme)
    assert len(sk.d_time) == 4  # the four node subscription cover
    assert component_counts(sk) == (2 * 2 + 4 + 1, 1)


def test_keygen_single_leaf_single_node_counts():
    scheme = make_scheme()
    rng = Random(2)
    pk, mk = scheme.setup(2, depth=4, rng=rng)
    access = compile_policy("attr1", scheme.suite.p)
    cover = TimeCover.from_nodes([TimeNode.parse("2022-08-05")])
    sk = scheme.keygen(pk, mk, scheme.suite.scalar(9), cover, access, rng=rng)
    assert component_counts(sk) == (4, 1)


def test_keygen_d0_matches_transparent_oracle():
    scheme = make_scheme(p=101)
    rng = Random(4)
    pk, mk = scheme.setup(2, depth=4, rng=rng)
    access = compile_policy("attr1 AND attr2", 101)
    cover = TimeCover.from_nodes([TimeNode.parse("2022-08-05")])
    sk = scheme.keygen(pk, mk, scheme.suite.scalar(3), cover, access, rng=rng)
    alpha = mk.alpha.value
    w = sk.d0_prime.log * alpha % 101
    assert sk.d0.log == alpha * w % 101


def test_keygen_rejects_zero_identity():
    scheme = make_scheme()
    rng = Random(5)
    pk, mk = scheme.setup(2, depth=4, rng=rng)
    access = compile_policy("attr1", scheme.suite.p)
    cover = TimeCover.from_nodes([TimeNode.parse("2022-08-05")])
    with pytest.raises(ValueError, match="nonzero"):
        scheme.keygen(pk, mk, scheme.suite.scalar(0), cover, access, rng=rng)


def test_keygen_rejects_unknown_attribute_and_deep_node():
    scheme = make_scheme()
    rng = Random(6)
    pk, mk = scheme.setup(["gold"], depth=2, rng=rng)
    cover = TimeCover.from_nodes([TimeNode.parse("2022")])
    with pytest.raises(KeyError):
        scheme.keygen(
            pk, mk, scheme.suite.scalar(1), cover, compile_policy("silver", scheme.suite.p), rng=rng
        )
    deep = TimeCover.from_nodes([TimeNode.parse("2022-08")])
    with pytest.raises(ValueError, match="too deep"):
        scheme.keygen(
            pk, mk, scheme.suite.scalar(1), deep, compile_policy("gold", scheme.suite.p), rng=rng
        )


# ----------------------------------------------------------------------
# Encrypt.
# ----------------------------------------------------------------------


def test_encrypt_component_counts():
    scheme = make_scheme()
    rng = Random(7)
    pk, _ = scheme.setup(2, depth=4, rng=rng)
    message = scheme.suite.random_target(rng)
    one = scheme.encrypt(
        pk, message, TimeCover.from_nodes([TimeNode.parse("2022-08")]), ["attr1"], rng=rng
    )
    assert component_counts(one) == (3, 1)


def test_encrypt_worst_case_cover_counts():
    scheme = make_scheme()
    rng = Random(8)
    pk, _ = scheme.setup(2, depth=4, rng=rng)
    cover = set_cover(TimeWindow.parse("2022-01-02..2023-12-30"))
    assert len(cover) == 82
    message = scheme.suite.random_target(rng)
    ct = scheme.encrypt(pk, message, cover, ["attr1"], rng=rng)
    assert component_counts(ct) == (165, 1)


def test_encrypt_identity_message_exposes_blinding():
    scheme = make_scheme(p=101)
    rng = Random(9)
    pk, mk = scheme.setup(2, depth=4, rng=rng)
    ct = scheme.encrypt(
        pk,
        scheme.suite.identity_target(),
        TimeCover.from_nodes([TimeNode.parse("2022-08")]),
        ["attr1"],
        rng=rng,
    )
    alpha = mk.alpha.value
    x = ct.c0_prime.log * pow(alpha * alpha, -1, 101) % 101
    assert ct.c0.log == alpha * x % 101


def test_encrypt_rejects_empty_cover_and_unknown_attribute():
    scheme = make_scheme()
    rng = Random(10)
    pk, _ = scheme.setup(["gold"], depth=4, rng=rng)
    message = scheme.suite.random_target(rng)
    with pytest.raises(ValueError, match="empty"):
        scheme.encrypt(pk, message, TimeCover(()), ["gold"], rng=rng)
    with pytest.raises(KeyError):
        scheme.encrypt(
            pk, message, TimeCover.from_nodes([TimeNode.parse("2022-08")]), ["silver"], rng=rng
        )


# ----------------------------------------------------------------------
# Decrypt.
# ----------------------------------------------------------------------


def test_repaired_roundtrip_month_inside_subscription():
    scheme = make_scheme()
    pk, _, sk, ct, message = make_instance(scheme)
    assert scheme.decrypt(pk, ct, sk) == message


def test_decrypt_denies_day_outside_subscription():
    scheme = make_scheme()
    rng = Random(11)
    pk, mk = scheme.setup(["gold", "family"], depth=4, rng=rng)
    access = compile_policy("gold AND family", scheme.suite.p)
    sk = scheme.keygen(
        pk, mk, scheme.suite.scalar(5), set_cover(SUBSCRIPTION_WINDOW), access, rng=rng
    )
    message = scheme.suite.random_target(rng)
    ct = scheme.encrypt(
        pk,
        message,
        TimeCover.from_nodes([TimeNode.parse("2022-09-05")]),
        ["gold", "family"],
        rng=rng,
    )
    assert scheme.decrypt(pk, ct, sk) is None


def test_decrypt_denies_unsatisfied_policy():
    scheme = make_scheme()
    rng = Random(12)
    pk, mk = scheme.setup(["silver", "platinum"], depth=4, rng=rng)
    access = compile_policy("platinum", scheme.suite.p)
    cover = TimeCover.from_nodes([TimeNode.parse("2022-08")])
    sk = scheme.keygen(pk, mk, scheme.suite.scalar(5), cover, access, rng=rng)
    message = scheme.suite.random_target(rng)
    ct = scheme.encrypt(pk, message, cover, ["silver"], rng=rng)
    assert scheme.decrypt(pk, ct, sk) is None


def test_decrypt_pairing_counts():
    scheme = make_scheme()
    pk, _, sk, ct, _ = make_instance(scheme)
    before = scheme.suite.counters.snapshot()
    assert scheme.decrypt(pk, ct, sk) is not None
    assert scheme.suite.counters.since(before).pairings == 7  # two rows used

    rng = Random(13)
    pk, mk = scheme.setup(["a", "b"], depth=4, rng=rng)
    access = compile_policy("a OR b", scheme.suite.p)
    cover = TimeCover.from_nodes([TimeNode.parse("2022-08")])
    sk = scheme.keygen(pk, mk, scheme.suite.scalar(5), cover, access, rng=rng)
    ct = scheme.encrypt(pk, scheme.suite.random_target(rng), cover, ["a"], rng=rng)
    before = scheme.suite.counters.snapshot()
    assert scheme.decrypt(pk, ct, sk) is not None
    assert scheme.suite.counters.since(before).pairings == predicted_pairings(1) == 5


def test_pairing_counter_matches_instrumented_call_log():
    scheme = make_scheme()
    pk, _, sk, ct, _ = make_instance(scheme)
    calls = []
    original = scheme.suite.pair

    def logging_pair(a, b):
        calls.append((a.log, b.log))
        return original(a, b)

    scheme.suite.pair = logging_pair
    try:
        before = scheme.suite.counters.snapshot()
        assert scheme.decrypt(pk, ct, sk) is not None
        delta = scheme.suite.counters.since(before)
    finally:
        del scheme.suite.pair
    assert delta.pairings == len(calls) == 7


def test_denial_runs_no_group_operations():
    scheme = make_scheme()
    rng = Random(14)
    pk, mk = scheme.setup(["a", "b"], depth=4, rng=rng)
    access = compile_policy("a AND b", scheme.suite.p)
    cover = TimeCover.from_nodes([TimeNode.parse("2022-08")])
    sk = scheme.keygen(pk, mk, scheme.suite.scalar(5), cover, access, rng=rng)
    ct_bad_attrs = scheme.encrypt(pk, scheme.suite.random_target(rng), cover, ["a"], rng=rng)
    ct_bad_time = scheme.encrypt(
        pk,
        scheme.suite.random_target(rng),
        TimeCover.from_nodes([TimeNode.parse("2022-09")]),
        ["a", "b"],
        rng=rng,
    )
    for ct in (ct_bad_attrs, ct_bad_time):
        before = scheme.suite.counters.snapshot()
        assert scheme.decrypt(pk, ct, sk) is None
        assert scheme.suite.counters.since(before) == OpCounters()


def test_paper_mode_misses_by_the_audited_residual():
    scheme = make_scheme(Mode.PAPER)
    pk, _, sk, ct, message = make_instance(scheme)
    value = scheme.decrypt(pk, ct, sk)
    assert value is not None and value != message
    report = scheme.audit(pk, ct, sk)
    assert value * report.step("d").residual == message


def test_time_monotonicity_shrinking_cover_never_helps():
    scheme = make_scheme()
    rng = Random(15)
    universe = ["a", "b", "c", "d"]
    for trial in range(40):
        pk, mk = scheme.setup(universe, depth=4, rng=rng)
        formula = random_formula(rng, universe, max_leaves=4)
        access = compile_policy(formula, scheme.suite.p)
        cover = set_cover(random_window(rng, (2022, 1, 1), (2022, 12, 31)))
        sk = scheme.keygen(pk, mk, scheme.suite.scalar(rng.randrange(1, P)), cover, access, rng=rng)
        if trial % 2 == 0:
            ct_cover = TimeCover((rng.choice(cover.nodes),))
        else:
            ct_cover = set_cover(random_window(rng, (2023, 1, 1), (2023, 12, 31)))
        attrs = sorted(satisfying_set(formula, rng))
        ct = scheme.encrypt(pk, scheme.suite.random_target(rng), ct_cover, attrs, rng=rng)
        outcome = scheme.decrypt(pk, ct, sk)
        for drop in range(len(cover)):
            nodes = tuple(n for i, n in enumerate(cover.nodes) if i != drop)
            if not nodes:
                continue
            shrunk = PrivateKey(
                mode=sk.mode,
                pid=sk.pid,
                access=sk.access,
                cover=TimeCover(nodes),
                d0=sk.d0,
                d0_prime=sk.d0_prime,
                d_time=tuple(e for i, e in enumerate(sk.d_time) if i != drop),
                rows=sk.rows,
            )
            shrunk_outcome = scheme.decrypt(pk, ct, shrunk)
            if outcome is None:
                assert shrunk_outcome is None


def test_mode_mismatch_rejected():
    repaired = make_scheme(Mode.REPAIRED)
    paper = make_scheme(Mode.PAPER)
    pk_r, mk_r, sk_r, ct_r, _ = make_instance(repaired)
    pk_p, _, _, ct_p, _ = make_instance(paper)
    with pytest.raises(ModeMismatchError):
        repaired.decrypt(pk_r, ct_p, sk_r)
    with pytest.raises(ModeMismatchError):
        repaired.decrypt(pk_p, ct_r, sk_r)


def test_suite_mismatch_rejected():
    small = TimedKpAbe(TransparentSuite(101))
    big = make_scheme()
    pk_s, _, sk_s, ct_s, _ = make_instance(small)
    pk_b, _, sk_b, ct_b, _ = make_instance(big)
    with pytest.raises(SuiteMismatchError):
        big.decrypt(pk_s, ct_b, sk_b)
    with pytest.raises(SuiteMismatchError):
        big.decrypt(pk_b, ct_b, sk_s)


# ----------------------------------------------------------------------
# Audit.
# ----------------------------------------------------------------------


def test_audit_repaired_all_steps_close():
    scheme = make_scheme()
    pk, _, sk, ct, _ = make_instance(scheme)
    report = scheme.audit(pk, ct, sk)
    assert [s.step for s in report.steps] == ["a", "b", "c", "d"]
    assert report.all_closed
    for step in report.steps:
        assert step.residual.is_identity()


def test_audit_paper_isolates_attribute_product():
    scheme = make_scheme(Mode.PAPER)
    pk, _, sk, ct, _ = make_instance(scheme)
    report = scheme.audit(pk, ct, sk)
    assert report.step("a").closed
    assert report.step("b").closed
    assert report.step("c").closed
    step_d = report.step("d")
    assert not step_d.closed

    lhs_log, rhs_log = recompute_step_d_logs(pk, ct, sk, report.node)
    assert step_d.lhs.log == lhs_log
    assert step_d.rhs.log == rhs_log
    assert step_d.residual.log == (lhs_log - rhs_log) % scheme.suite.p


def test_audit_paper_residual_closed_form():
    # residual exponent = beta * (A - beta) * sum(eta_i lambda_i omega_i)
    # with A the exponent of c1_tau.
    scheme = make_scheme(Mode.PAPER)
    pk, _, sk, ct, _ = make_instance(scheme)
    report = scheme.audit(pk, ct, sk)
    p = scheme.suite.p
    beta = pk.g_beta.log
    assert beta != 0
    inv_beta = pow(beta, -1, p)
    omegas = reconstruct_coeffs(sk.access, ct.attributes)
    _, c1_tau = ct.c_time[ct.cover.nodes.index(report.node)]
    acc = 0
    for i in sorted(omegas):
        d_i, _ = sk.rows[i]
        lam = d_i.log * inv_beta % p
        eta = pk.h_beta_for(sk.access.row_attributes[i]).log * inv_beta % p
        acc += eta * lam * omegas[i]
    expected = beta * (c1_tau.log - beta) % p * acc % p
    assert report.step("d").residual.log == expected


def test_audit_requires_decryptable_instance():
    scheme = make_scheme()
    rng = Random(16)
    pk, mk = scheme.setup(["a", "b"], depth=4, rng=rng)
    access = compile_policy("a AND b", scheme.suite.p)
    cover = TimeCover.from_nodes([TimeNode.parse("2022-08")])
    sk = scheme.keygen(pk, mk, scheme.suite.scalar(5), cover, access, rng=rng)
    ct = scheme.encrypt(pk, scheme.suite.random_target(rng), cover, ["a"], rng=rng)
    with pytest.raises(ValueError, match="not decryptable"):
        scheme.audit(pk, ct, sk)


class OpaqueSuite(BilinearSuite):
    """Behaves like the transparent suite but is not one; audit must refuse."""

    suite_id = 99

    def generator(self):
        return SourceElement(self, 1)

    def identity_source(self):
        return SourceElement(self, 0)

    def identity_target(self):
        return TargetElement(self, 0)

    def random_source(self, rng):
        return SourceElement(self, rng.randrange(self.p))

    def random_target(self, rng):
        return TargetElement(self, rng.randrange(self.p))

    def pair(self, a, b):
        self.counters.pairings += 1
        return TargetElement(self, a.log * b.log)


def test_audit_rejects_non_transparent_suite():
    scheme = TimedKpAbe(OpaqueSuite(101))
    pk, _, sk, ct, _ = make_instance(scheme)
    with pytest.raises(UnsupportedSuiteError):
        scheme.audit(pk, ct, sk)


# ----------------------------------------------------------------------
# Measurement and serialization.
# ----------------------------------------------------------------------


def test_predicted_count_formulas():
    assert predicted_counts("pk", universe_size=5, depth=4) == (16, 1)
    assert predicted_counts("sk", rows=3, cover_size=4) == (11, 1)
    assert predicted_counts("ct", cover_size=60 + 22) == (165, 1)
    assert predicted_pairings(2) == 7


def test_serialization_roundtrips():
    scheme = make_scheme()
    pk, mk, sk, ct, _ = make_instance(scheme)
    assert pk_from_bytes(pk_to_bytes(pk)) == pk
    assert sk_from_bytes(sk_to_bytes(sk)) == sk
    assert ct_from_bytes(ct_to_bytes(ct)) == ct
    assert pk_to_bytes(pk_from_bytes(pk_to_bytes(pk))) == pk_to_bytes(pk)

    mk_bytes = mk_to_bytes(mk, scheme.suite, scheme.mode)
    loaded, mode, suite = mk_from_bytes(mk_bytes)
    assert loaded == mk and mode is scheme.mode and suite == scheme.suite


def test_deserialized_objects_interoperate():
    scheme = make_scheme()
    pk, _, sk, ct, message = make_instance(scheme)
    pk2 = pk_from_bytes(pk_to_bytes(pk))
    sk2 = sk_from_bytes(sk_to_bytes(sk))
    ct2 = ct_from_bytes(ct_to_bytes(ct))
    fresh = TimedKpAbe(pk2.suite, pk2.mode)
    assert fresh.decrypt(pk2, ct2, sk2) == message


def test_serialized_modes_stay_incompatible():
    repaired = make_scheme(Mode.REPAIRED)
    paper = make_scheme(Mode.PAPER)
    pk_r, _, sk_r, _, _ = make_instance(repaired)
    _, _, _, ct_p, _ = make_instance(paper)
    ct_loaded = ct_from_bytes(ct_to_bytes(ct_p))
    assert ct_loaded.mode is Mode.PAPER
    with pytest.raises(ModeMismatchError):
        repaired.decrypt(pk_r, ct_loaded, sk_r)


def test_truncated_serialization_rejected():
    scheme = make_scheme()
    pk, _, _, _, _ = make_instance(scheme)
    data = pk_to_bytes(pk)
    with pytest.raises(ValueError):
        pk_from_bytes(data[:-1])
    with pytest.raises(ValueError):
        pk_from_bytes(data + b"\x00")
