"""Time-sensitive key-policy ABE: setup, key issue, encrypt, decrypt, audit.

Keys carry a monotone policy (as an LSSS) plus a set-cover of the holder's
entitled days; ciphertexts carry attribute labels plus a set-cover of the
content's decryptable days.  Decryption needs the attribute set to satisfy
the key policy and at least one time node present verbatim on both sides.

Two construction variants are supported and recorded inside every key and
ciphertext:

* ``paper``: row keys keep an attribute-dependent factor,
  d_i' = (g * h^beta)^(lambda_i * id), and the decryption helper is
  k_y = (g^beta * h_y^beta)^(-1).  The attribute product in the decryption
  equation then does not cancel, so decrypt returns the message multiplied
  by a nonzero residual.  ``audit`` isolates and reports that residual.
* ``repaired``: the minimal change that closes the equation,
  d_i' = g^(lambda_i * id) and k = g^(-beta).  Decrypt returns the message
  exactly.

Caveat, true in both modes: the ciphertext has no component that depends
on the attribute set, so attribute enforcement is a procedural check, not
a cryptographic one.  Time enforcement and the message blinding are the
algebraic parts.

The decryption conditions are checked before any pairing is evaluated, and
a successful decryption performs exactly 2*|I| + 3 pairings, where I is
the set of key rows labeled by ciphertext attributes.
"""

from dataclasses import dataclass
from enum import Enum
from random import Random

from . import lsss
from .groups import (
    BilinearSuite,
    Scalar,
    SourceElement,
    SuiteMismatchError,
    TargetElement,
    TransparentSuite,
    UnsupportedSuiteError,
)
from .lsss import AccessStructure
from .timetree import TimeCover, TimeNode
from .wire import Reader, WireError, pack_bytes, pack_str, pack_u8, pack_u16

_MAGIC = b"TSKA"
_FORMAT_VERSION = 1
_KIND_PK, _KIND_SK, _KIND_CT = 1, 2, 3

DEFAULT_DEPTH = 4


class Mode(str, Enum):
    PAPER = "paper"
    REPAIRED = "repaired"


class ModeMismatchError(ValueError):
    """Keys and ciphertexts from different modes are incompatible."""


@dataclass(frozen=True)
class PublicParams:
    suite: BilinearSuite
    mode: Mode
    universe: tuple[str, ...]
    depth: int
    g: SourceElement
    g_alpha: SourceElement
    g_alpha_sq: SourceElement
    g_inv_alpha: SourceElement
    g_beta: SourceElement
    g_beta_sq: SourceElement
    e_gg_alpha: TargetElement
    h_beta: tuple[SourceElement, ...]
    v: tuple[SourceElement, ...]

    def h_beta_for(self, attribute: str) -> SourceElement:
        try:
            return self.h_beta[self.universe.index(attribute)]
        except ValueError:
            raise KeyError(f"attribute {attribute!r} not in the universe") from None

    def source_elements(self) -> list[SourceElement]:
        return [
            self.g,
            self.g_alpha,
            self.g_alpha_sq,
            self.g_inv_alpha,
            self.g_beta,
            self.g_beta_sq,
            *self.h_beta,
            *self.v,
        ]


@dataclass(frozen=True)
class MasterKey:
    alpha: Scalar
    beta: Scalar


@dataclass(frozen=True)
class PrivateKey:
    mode: Mode
    pid: Scalar
    access: AccessStructure
    cover: TimeCover
    d0: TargetElement
    d0_prime: SourceElement
    d_time: tuple[SourceElement, ...]  # aligned with cover.nodes
    rows: tuple[tuple[SourceElement, SourceElement], ...]  # (d_i, d_i')

    def source_elements(self) -> list[SourceElement]:
        out = [self.d0_prime, *self.d_time]
        for d_i, d_i_prime in self.rows:
            out += [d_i, d_i_prime]
        return out


@dataclass(frozen=True)
class Ciphertext:
    mode: Mode
    attributes: tuple[str, ...]
    cover: TimeCover
    c0: TargetElement
    c0_prime: SourceElement
    c_time: tuple[tuple[SourceElement, SourceElement], ...]  # (c0_tau, c1_tau)

    def source_elements(self) -> list[SourceElement]:
        out = [self.c0_prime]
        for c0_tau, c1_tau in self.c_time:
            out += [c0_tau, c1_tau]
        return out


@dataclass(frozen=True)
class AuditStep:
    step: str
    name: str
    lhs: TargetElement
    rhs: TargetElement
    residual: TargetElement
    closed: bool


@dataclass(frozen=True)
class AuditReport:
    mode: Mode
    node: TimeNode
    steps: tuple[AuditStep, ...]

    @property
    def all_closed(self) -> bool:
        return all(step.closed for step in self.steps)

    def step(self, label: str) -> AuditStep:
        for s in self.steps:
            if s.step == label:
                return s
        raise KeyError(label)


def component_counts(obj) -> tuple[int, int]:
    """(source, target) component counts, taken from the actual value."""
    if isinstance(obj, (PublicParams, PrivateKey, Ciphertext)):
        return (len(obj.source_elements()), 1)
    raise TypeError(f"cannot count components of {type(obj).__name__}")


def predicted_counts(kind: str, **params) -> tuple[int, int]:
    """Published size formulas: pk = U + T + 7, sk = 2l + |T| + 1,
    ct = 2|Tc| + 1 source elements, each plus one target element."""
    if kind == "pk":
        return (params["universe_size"] + params["depth"] + 7, 1)
    if kind == "sk":
        return (2 * params["rows"] + params["cover_size"] + 1, 1)
    if kind == "ct":
        return (2 * params["cover_size"] + 1, 1)
    raise ValueError(f"unknown kind {kind!r}")


def predicted_pairings(used_rows: int) -> int:
    return 2 * used_rows + 3


def _normalize_universe(universe) -> tuple[str, ...]:
    if isinstance(universe, int):
        if universe < 1:
            raise ValueError("universe size must be >= 1")
        return tuple(f"attr{i}" for i in range(1, universe + 1))
    labels = tuple(universe)
    if not labels:
        raise ValueError("universe must not be empty")
    if len(set(labels)) != len(labels):
        raise ValueError("universe labels must be distinct")
    return labels


class TimedKpAbe:
    """The four algorithms over an injected suite and mode."""

    def __init__(self, suite: BilinearSuite, mode: Mode = Mode.REPAIRED):
        self.suite = suite
        self.mode = Mode(mode)

    # ------------------------------------------------------------------

    def setup(
        self, universe, depth: int = DEFAULT_DEPTH, *, rng: Random
    ) -> tuple[PublicParams, MasterKey]:
        """Draw order: alpha (resampled while zero), beta, the per-attribute
        h elements, then the per-level v elements."""
        labels = _normalize_universe(universe)
        if depth < 2:
            raise ValueError("tree depth must be >= 2")
        suite = self.suite
        g = suite.generator()
        alpha = suite.random_nonzero_scalar(rng)
        beta = suite.random_scalar(rng)
        h = [suite.random_source(rng) for _ in labels]
        v = [suite.random_source(rng) for _ in range(depth + 1)]
        pk = PublicParams(
            suite=suite,
            mode=self.mode,
            universe=labels,
            depth=depth,
            g=g,
            g_alpha=g**alpha,
            g_alpha_sq=g ** (alpha * alpha),
            g_inv_alpha=g ** alpha.inverse(),
            g_beta=g**beta,
            g_beta_sq=g ** (beta * beta),
            e_gg_alpha=suite.pair(g, g) ** alpha,
            h_beta=tuple(h_i**beta for h_i in h),
            v=tuple(v),
        )
        return pk, MasterKey(alpha, beta)

    # ------------------------------------------------------------------

    def _time_base(self, pk: PublicParams, node: TimeNode) -> SourceElement:
        """v_0 * prod_j v_j^(label_j) over the node's label path."""
        acc = pk.v[0]
        for level, label in enumerate(node.components, start=1):
            acc = acc * pk.v[level] ** label
        return acc

    def _check_cover_depth(self, pk: PublicParams, cover: TimeCover) -> None:
        for node in cover:
            if node.depth >= pk.depth:
                raise ValueError(
                    f"time node {node} too deep for tree depth {pk.depth}"
                )

    def keygen(
        self,
        pk: PublicParams,
        mk: MasterKey,
        pid: Scalar,
        cover: TimeCover,
        access: AccessStructure,
        *,
        rng: Random,
    ) -> PrivateKey:
        if int(pid) == 0:
            raise ValueError("pseudo-identity must be nonzero")
        self._check_pk(pk)
        self._check_cover_depth(pk, cover)
        for attribute in access.row_attributes:
            pk.h_beta_for(attribute)  # unknown labels fail here
        suite = self.suite
        g = pk.g
        # Masking vector (w, y2, ..., yn); w is the shared exponent.
        w = suite.random_scalar(rng)
        share_set = lsss.share(access, int(w), rng=rng)
        lam = [suite.scalar(s) for s in share_set.shares]
        rows = []
        for i, attribute in enumerate(access.row_attributes):
            d_i = g ** (mk.beta * lam[i])
            if self.mode is Mode.PAPER:
                d_i_prime = (g * pk.h_beta_for(attribute)) ** (lam[i] * pid)
            else:
                d_i_prime = g ** (lam[i] * pid)
            rows.append((d_i, d_i_prime))
        return PrivateKey(
            mode=self.mode,
            pid=pid,
            access=access,
            cover=cover,
            d0=pk.e_gg_alpha**w,
            d0_prime=g ** (w * mk.alpha.inverse()),
            d_time=tuple(self._time_base(pk, node) ** w for node in cover),
            rows=tuple(rows),
        )

    # ------------------------------------------------------------------

    def encrypt(
        self,
        pk: PublicParams,
        message: TargetElement,
        cover: TimeCover,
        attributes,
        *,
        rng: Random,
    ) -> Ciphertext:
        self._check_pk(pk)
        attrs = tuple(sorted(set(attributes)))
        for attribute in attrs:
            pk.h_beta_for(attribute)
        if len(cover) == 0:
            raise ValueError("ciphertext cover must not be empty")
        self._check_cover_depth(pk, cover)
        suite = self.suite
        g = pk.g
        x = suite.random_scalar(rng)
        c_time = []
        for node in cover:
            v_tau = suite.random_scalar(rng)
            c0_tau = g**v_tau
            c1_tau = pk.g_alpha**x * pk.g_beta_sq * self._time_base(pk, node) ** v_tau
            c_time.append((c0_tau, c1_tau))
        return Ciphertext(
            mode=self.mode,
            attributes=attrs,
            cover=cover,
            c0=message * pk.e_gg_alpha**x,
            c0_prime=pk.g_alpha_sq**x,
            c_time=tuple(c_time),
        )

    # ------------------------------------------------------------------

    def _check_pk(self, pk: PublicParams) -> None:
        if pk.suite != self.suite:
            raise SuiteMismatchError("public parameters from a different suite")
        if pk.mode is not self.mode:
            raise ModeMismatchError(
                f"public parameters are {pk.mode.value}, scheme is {self.mode.value}"
            )

    def _check_pair_compat(self, ct: Ciphertext, sk: PrivateKey) -> None:
        if ct.c0_prime.suite != sk.d0_prime.suite:
            raise SuiteMismatchError("key and ciphertext from different suites")
        if ct.mode is not sk.mode:
            raise ModeMismatchError(
                f"ciphertext is {ct.mode.value}, key is {sk.mode.value}"
            )
        if sk.mode is not self.mode:
            raise ModeMismatchError(
                f"key is {sk.mode.value}, scheme is {self.mode.value}"
            )

    @staticmethod
    def _matching_nodes(ct: Ciphertext, sk: PrivateKey) -> list[TimeNode]:
        return sorted(set(sk.cover.nodes) & set(ct.cover.nodes))

    def _helper_k(self, pk: PublicParams, attribute: str) -> SourceElement:
        """Decryption helper, recomputed from public parameters."""
        if self.mode is Mode.PAPER:
            return (pk.g_beta * pk.h_beta_for(attribute)).inverse()
        return pk.g_beta.inverse()

    def decrypt(
        self, pk: PublicParams, ct: Ciphertext, sk: PrivateKey
    ) -> TargetElement | None:
        """Returns the recovered target element, or None when the attribute
        set fails the key policy or no time node matches verbatim."""
        self._check_pk(pk)
        self._check_pair_compat(ct, sk)
        omegas = lsss.reconstruct_coeffs(sk.access, ct.attributes)
        if omegas is None:
            return None
        matches = self._matching_nodes(ct, sk)
        if not matches:
            return None
        node = matches[0]
        suite = self.suite
        d_time = sk.d_time[sk.cover.nodes.index(node)]
        c0_tau, c1_tau = ct.c_time[ct.cover.nodes.index(node)]
        num = ct.c0 * suite.pair(d_time, c0_tau) * suite.pair(ct.c0_prime, sk.d0_prime)
        den = suite.pair(ct.c0_prime, pk.g_inv_alpha)
        inv_pid = sk.pid.inverse()
        for i in sorted(omegas):
            omega = suite.scalar(omegas[i])
            d_i, d_i_prime = sk.rows[i]
            k_i = self._helper_k(pk, sk.access.row_attributes[i])
            den = den * (
                suite.pair(c1_tau, d_i_prime ** (omega * inv_pid))
                * suite.pair(d_i, k_i) ** omega
            )
        return num * den.inverse()

    # ------------------------------------------------------------------

    def audit(self, pk: PublicParams, ct: Ciphertext, sk: PrivateKey) -> AuditReport:
        """Check the decryption equation's derivation step by step.

        Each step compares one side of a claimed identity against the other
        and reports the quotient as a target-group residual.  Requires the
        transparent suite: per-instance exponents are read off the public
        parameters, key and ciphertext to build the comparison values.
        """
        self._check_pk(pk)
        self._check_pair_compat(ct, sk)
        suite = self.suite
        if not isinstance(suite, TransparentSuite):
            raise UnsupportedSuiteError("audit needs the transparent suite")
        omegas = lsss.reconstruct_coeffs(sk.access, ct.attributes)
        matches = self._matching_nodes(ct, sk)
        if omegas is None or not matches:
            raise ValueError("instance is not decryptable, nothing to audit")
        node = matches[0]
        p = suite.p
        g = pk.g
        alpha = pk.g_alpha.log
        beta = pk.g_beta.log
        x = ct.c0_prime.log * pow(alpha * alpha % p, -1, p) % p
        w = sk.d0_prime.log * alpha % p
        d_time = sk.d_time[sk.cover.nodes.index(node)]
        c0_tau, c1_tau = ct.c_time[ct.cover.nodes.index(node)]
        v_tau = c0_tau.log
        e_gg = suite.gt_generator()
        g_w = g**w
        inv_pid = sk.pid.inverse()

        steps = []

        def record(step, name, lhs, rhs):
            residual = lhs * rhs.inverse()
            steps.append(
                AuditStep(step, name, lhs, rhs, residual, residual.is_identity())
            )

        record(
            "a",
            "blinding-factor-recovery",
            suite.pair(ct.c0_prime, pk.g_inv_alpha),
            e_gg ** (alpha * x),
        )
        record(
            "b",
            "masked-secret-pairing",
            suite.pair(ct.c0_prime, sk.d0_prime),
            e_gg ** (alpha * x * w),
        )
        record(
            "c",
            "time-term-cancellation",
            suite.pair(d_time, c0_tau),
            suite.pair(self._time_base(pk, node) ** v_tau, g_w),
        )
        lhs_d = suite.identity_target()
        for i in sorted(omegas):
            omega = suite.scalar(omegas[i])
            d_i, d_i_prime = sk.rows[i]
            k_i = self._helper_k(pk, sk.access.row_attributes[i])
            lhs_d = lhs_d * (
                suite.pair(c1_tau, d_i_prime ** (omega * inv_pid))
                * suite.pair(d_i, k_i) ** omega
            )
        rhs_d = suite.pair(c1_tau, g_w) * suite.pair(g ** (beta * w), g ** (p - beta))
        record("d", "attribute-product-collapse", lhs_d, rhs_d)
        return AuditReport(self.mode, node, tuple(steps))


# ----------------------------------------------------------------------
# Canonical serialization.  Header: magic, version, object kind, mode,
# suite id, modulus; then the component lists in construction order.
# ----------------------------------------------------------------------


def _mode_byte(mode: Mode) -> int:
    return 0 if mode is Mode.PAPER else 1


def _mode_from_byte(b: int) -> Mode:
    if b == 0:
        return Mode.PAPER
    if b == 1:
        return Mode.REPAIRED
    raise WireError(f"unknown mode byte {b}")


def _pack_header(kind: int, mode: Mode, suite: BilinearSuite) -> bytes:
    p_bytes = suite.p.to_bytes((suite.p.bit_length() + 7) // 8, "big")
    return (
        _MAGIC
        + pack_u8(_FORMAT_VERSION)
        + pack_u8(kind)
        + pack_u8(_mode_byte(mode))
        + pack_u8(suite.suite_id)
        + pack_bytes(p_bytes)
    )


def _read_header(reader: Reader, expected_kind: int) -> tuple[Mode, TransparentSuite]:
    reader.expect(_MAGIC)
    version = reader.u8()
    if version != _FORMAT_VERSION:
        raise WireError(f"unsupported format version {version}")
    kind = reader.u8()
    if kind != expected_kind:
        raise WireError(f"expected object kind {expected_kind}, got {kind}")
    mode = _mode_from_byte(reader.u8())
    suite_id = reader.u8()
    if suite_id != TransparentSuite.suite_id:
        raise WireError(f"unknown suite id {suite_id}")
    p = int.from_bytes(reader.bytes_(), "big")
    return mode, TransparentSuite(p)


def _pack_element(el) -> bytes:
    width = el.suite.scalar_width
    return el.log.to_bytes(width, "big")


def _read_source(reader: Reader, suite: TransparentSuite) -> SourceElement:
    return suite.source_from_log(int.from_bytes(reader.raw(suite.scalar_width), "big"))


def _read_target(reader: Reader, suite: TransparentSuite) -> TargetElement:
    return suite.target_from_log(int.from_bytes(reader.raw(suite.scalar_width), "big"))


def _pack_scalar(s: Scalar, suite: BilinearSuite) -> bytes:
    return s.value.to_bytes(suite.scalar_width, "big")


def _read_scalar(reader: Reader, suite: TransparentSuite) -> Scalar:
    return suite.scalar(int.from_bytes(reader.raw(suite.scalar_width), "big"))


def _pack_cover(cover: TimeCover) -> bytes:
    out = pack_u16(len(cover))
    for node in cover.nodes:
        out += pack_str(node.text())
    return out


def _read_cover(reader: Reader) -> TimeCover:
    count = reader.u16()
    nodes = [TimeNode.parse(reader.str_()) for _ in range(count)]
    return TimeCover.from_nodes(nodes)


def _pack_access(access: AccessStructure, suite: BilinearSuite) -> bytes:
    out = pack_u16(access.rows) + pack_u16(access.columns)
    for row in access.matrix:
        for value in row:
            out += value.to_bytes(suite.scalar_width, "big")
    for attribute in access.row_attributes:
        out += pack_str(attribute)
    return out


def _read_access(reader: Reader, suite: TransparentSuite) -> AccessStructure:
    rows = reader.u16()
    cols = reader.u16()
    width = suite.scalar_width
    matrix = tuple(
        tuple(int.from_bytes(reader.raw(width), "big") for _ in range(cols))
        for _ in range(rows)
    )
    attributes = tuple(reader.str_() for _ in range(rows))
    return AccessStructure(matrix, attributes, suite.p)


def pk_to_bytes(pk: PublicParams) -> bytes:
    out = _pack_header(_KIND_PK, pk.mode, pk.suite)
    out += pack_u16(len(pk.universe)) + pack_u8(pk.depth)
    for label in pk.universe:
        out += pack_str(label)
    for el in pk.source_elements():
        out += _pack_element(el)
    out += _pack_element(pk.e_gg_alpha)
    return out


def pk_from_bytes(data: bytes) -> PublicParams:
    reader = Reader(data)
    mode, suite = _read_header(reader, _KIND_PK)
    size = reader.u16()
    depth = reader.u8()
    universe = tuple(reader.str_() for _ in range(size))
    g = _read_source(reader, suite)
    g_alpha = _read_source(reader, suite)
    g_alpha_sq = _read_source(reader, suite)
    g_inv_alpha = _read_source(reader, suite)
    g_beta = _read_source(reader, suite)
    g_beta_sq = _read_source(reader, suite)
    h_beta = tuple(_read_source(reader, suite) for _ in range(size))
    v = tuple(_read_source(reader, suite) for _ in range(depth + 1))
    e_gg_alpha = _read_target(reader, suite)
    reader.require_exhausted()
    return PublicParams(
        suite=suite,
        mode=mode,
        universe=universe,
        depth=depth,
        g=g,
        g_alpha=g_alpha,
        g_alpha_sq=g_alpha_sq,
        g_inv_alpha=g_inv_alpha,
        g_beta=g_beta,
        g_beta_sq=g_beta_sq,
        e_gg_alpha=e_gg_alpha,
        h_beta=h_beta,
        v=v,
    )


def mk_to_bytes(mk: MasterKey, suite: BilinearSuite, mode: Mode) -> bytes:
    return (
        _pack_header(_KIND_SK, mode, suite)
        + pack_u8(0)  # master-key marker inside the key kind
        + _pack_scalar(mk.alpha, suite)
        + _pack_scalar(mk.beta, suite)
    )


def mk_from_bytes(data: bytes) -> tuple[MasterKey, Mode, TransparentSuite]:
    reader = Reader(data)
    mode, suite = _read_header(reader, _KIND_SK)
    marker = reader.u8()
    if marker != 0:
        raise WireError("not a master key")
    alpha = _read_scalar(reader, suite)
    beta = _read_scalar(reader, suite)
    reader.require_exhausted()
    return MasterKey(alpha, beta), mode, suite


def sk_to_bytes(sk: PrivateKey) -> bytes:
    suite = sk.d0_prime.suite
    out = _pack_header(_KIND_SK, sk.mode, suite)
    out += pack_u8(1)  # private-key marker
    out += _pack_scalar(sk.pid, suite)
    out += _pack_access(sk.access, suite)
    out += _pack_cover(sk.cover)
    out += _pack_element(sk.d0)
    out += _pack_element(sk.d0_prime)
    for el in sk.d_time:
        out += _pack_element(el)
    for d_i, d_i_prime in sk.rows:
        out += _pack_element(d_i) + _pack_element(d_i_prime)
    return out


def sk_from_bytes(data: bytes) -> PrivateKey:
    reader = Reader(data)
    mode, suite = _read_header(reader, _KIND_SK)
    if reader.u8() != 1:
        raise WireError("not a private key")
    pid = _read_scalar(reader, suite)
    access = _read_access(reader, suite)
    cover = _read_cover(reader)
    d0 = _read_target(reader, suite)
    d0_prime = _read_source(reader, suite)
    d_time = tuple(_read_source(reader, suite) for _ in range(len(cover)))
    rows = tuple(
        (_read_source(reader, suite), _read_source(reader, suite))
        for _ in range(access.rows)
    )
    reader.require_exhausted()
    return PrivateKey(
        mode=mode,
        pid=pid,
        access=access,
        cover=cover,
        d0=d0,
        d0_prime=d0_prime,
        d_time=d_time,
        rows=rows,
    )


def ct_to_bytes(ct: Ciphertext) -> bytes:
    suite = ct.c0_prime.suite
    out = _pack_header(_KIND_CT, ct.mode, suite)
    out += pack_u16(len(ct.attributes))
    for attribute in ct.attributes:
        out += pack_str(attribute)
    out += _pack_cover(ct.cover)
    out += _pack_element(ct.c0)
    out += _pack_element(ct.c0_prime)
    for c0_tau, c1_tau in ct.c_time:
        out += _pack_element(c0_tau) + _pack_element(c1_tau)
    return out


def ct_from_bytes(data: bytes) -> Ciphertext:
    reader = Reader(data)
    mode, suite = _read_header(reader, _KIND_CT)
    n_attrs = reader.u16()
    attributes = tuple(reader.str_() for _ in range(n_attrs))
    cover = _read_cover(reader)
    c0 = _read_target(reader, suite)
    c0_prime = _read_source(reader, suite)
    c_time = tuple(
        (_read_source(reader, suite), _read_source(reader, suite))
        for _ in range(len(cover))
    )
    reader.require_exhausted()
    return Ciphertext(
        mode=mode,
        attributes=attributes,
        cover=cover,
        c0=c0,
        c0_prime=c0_prime,
        c_time=c_time,
    )
