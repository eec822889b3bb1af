"""Symmetric bilinear-group algebra with a transparent test instantiation.

The abstract contract is a Type-1 pairing: one source group of prime order
p with generator g, a target group, and a symmetric bilinear map
pair(g^x, g^y) = e(g, g)^(x*y).

The only built-in instantiation is the *transparent* suite: every element
literally stores its discrete log (to base g in the source group, to base
e(g, g) in the target group), so pairings, exponentiations and products
reduce to exact arithmetic mod p.  This makes group equations checkable as
integer identities, which is what the algebra auditor and the test suite
rely on.  It is deliberately non-hiding and provides no security at all.

Every suite carries operation counters so callers can account for the
exact number of pairings and exponentiations a computation performed.
"""

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from random import Random

_HASH_LABEL = b"hash-to-scalar.v1"

# Witnesses making Miller-Rabin deterministic for n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class SuiteMismatchError(ValueError):
    """Elements or scalars from different suites were mixed."""


class UnsupportedSuiteError(TypeError):
    """The requested operation needs the transparent instantiation."""


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for small in _MR_BASES:
        if n == small:
            return True
        if n % small == 0:
            return False
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for base in _MR_BASES:
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass
class OpCounters:
    """Monotone operation tallies for one measurement scope."""

    pairings: int = 0
    source_exponentiations: int = 0
    target_exponentiations: int = 0
    multiplications: int = 0

    def reset(self) -> None:
        self.pairings = 0
        self.source_exponentiations = 0
        self.target_exponentiations = 0
        self.multiplications = 0

    def snapshot(self) -> "OpCounters":
        return OpCounters(
            self.pairings,
            self.source_exponentiations,
            self.target_exponentiations,
            self.multiplications,
        )

    def since(self, earlier: "OpCounters") -> "OpCounters":
        return OpCounters(
            self.pairings - earlier.pairings,
            self.source_exponentiations - earlier.source_exponentiations,
            self.target_exponentiations - earlier.target_exponentiations,
            self.multiplications - earlier.multiplications,
        )


@dataclass(frozen=True)
class Scalar:
    """Residue mod the group order p.  Arithmetic is exact mod p."""

    value: int
    modulus: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.modulus != self.modulus:
                raise SuiteMismatchError("scalars from different moduli")
            return other
        if isinstance(other, int):
            return Scalar(other, self.modulus)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.value + other.value, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.value - other.value, self.modulus)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(other.value - self.value, self.modulus)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.value * other.value, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(-self.value, self.modulus)

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise ZeroDivisionError("zero scalar has no inverse")
        return Scalar(pow(self.value, -1, self.modulus), self.modulus)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0


class _Element:
    """Group element of the transparent suite: a bare discrete log."""

    __slots__ = ("suite", "log")

    _exp_counter = ""  # overridden per group

    def __init__(self, suite: "BilinearSuite", log: int):
        self.suite = suite
        self.log = log % suite.p

    def _check(self, other) -> None:
        if type(other) is not type(self):
            raise SuiteMismatchError(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )
        if other.suite != self.suite:
            raise SuiteMismatchError("elements from different suites")

    def __mul__(self, other):
        self._check(other)
        self.suite.counters.multiplications += 1
        return type(self)(self.suite, self.log + other.log)

    def __pow__(self, exponent):
        if isinstance(exponent, Scalar):
            if exponent.modulus != self.suite.p:
                raise SuiteMismatchError("scalar from a different modulus")
            e = exponent.value
        elif isinstance(exponent, int):
            e = exponent % self.suite.p
        else:
            return NotImplemented
        counters = self.suite.counters
        setattr(counters, self._exp_counter, getattr(counters, self._exp_counter) + 1)
        return type(self)(self.suite, self.log * e)

    def inverse(self):
        return self ** (self.suite.p - 1)

    def is_identity(self) -> bool:
        return self.log == 0

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.suite == self.suite
            and other.log == self.log
        )

    def __hash__(self):
        return hash((type(self).__name__, self.suite.p, self.log))

    def __repr__(self):
        return f"{type(self).__name__}(log={self.log}, p={self.suite.p})"


class SourceElement(_Element):
    _exp_counter = "source_exponentiations"


class TargetElement(_Element):
    _exp_counter = "target_exponentiations"


class BilinearSuite(ABC):
    """Shared scalar/hashing machinery over a prime-order pairing group."""

    suite_id: int

    def __init__(self, p: int):
        if not is_probable_prime(p):
            raise ValueError(f"group order must be prime, got {p}")
        self.p = p
        self.counters = OpCounters()

    # Suites compare by kind and order so independently deserialized
    # objects interoperate.
    def __eq__(self, other):
        return type(other) is type(self) and other.p == self.p

    def __hash__(self):
        return hash((type(self).__name__, self.p))

    def scalar(self, value: int) -> Scalar:
        return Scalar(value, self.p)

    def random_scalar(self, rng: Random) -> Scalar:
        return Scalar(rng.randrange(self.p), self.p)

    def random_nonzero_scalar(self, rng: Random) -> Scalar:
        while True:
            s = self.random_scalar(rng)
            if s:
                return s

    def hash_to_scalar(self, data: bytes) -> Scalar:
        """Deterministic hash into [1, p).  Zero is resampled away because
        derived identities end up as exponent divisors."""
        counter = 0
        while True:
            digest = hashlib.sha256(
                _HASH_LABEL + counter.to_bytes(4, "big") + data
            ).digest()
            value = int.from_bytes(digest, "big") % self.p
            if value:
                return Scalar(value, self.p)
            counter += 1

    @abstractmethod
    def generator(self) -> SourceElement: ...

    @abstractmethod
    def identity_source(self) -> SourceElement: ...

    @abstractmethod
    def identity_target(self) -> TargetElement: ...

    @abstractmethod
    def random_source(self, rng: Random) -> SourceElement: ...

    @abstractmethod
    def pair(self, a: SourceElement, b: SourceElement) -> TargetElement: ...

    # ------------------------------------------------------------------
    # Canonical element encoding: version byte, suite id, kind byte,
    # u16 width, then the big-endian fixed-width payload.
    # ------------------------------------------------------------------

    _ENCODING_VERSION = 1
    _KIND_SOURCE = 1
    _KIND_TARGET = 2

    @property
    def scalar_width(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def encode_element(self, element: _Element) -> bytes:
        if element.suite != self:
            raise SuiteMismatchError("element belongs to a different suite")
        kind = (
            self._KIND_SOURCE
            if isinstance(element, SourceElement)
            else self._KIND_TARGET
        )
        width = self.scalar_width
        return bytes(
            [self._ENCODING_VERSION, self.suite_id, kind]
        ) + width.to_bytes(2, "big") + element.log.to_bytes(width, "big")

    def decode_element(self, data: bytes) -> _Element:
        if len(data) < 5:
            raise ValueError("element encoding too short")
        version, suite_id, kind = data[0], data[1], data[2]
        if version != self._ENCODING_VERSION:
            raise ValueError(f"unknown element encoding version {version}")
        if suite_id != self.suite_id:
            raise SuiteMismatchError("element encoded for a different suite kind")
        width = int.from_bytes(data[3:5], "big")
        if width != self.scalar_width or len(data) != 5 + width:
            raise ValueError("element encoding width mismatch")
        log = int.from_bytes(data[5:], "big")
        if log >= self.p:
            raise ValueError("element payload out of range")
        if kind == self._KIND_SOURCE:
            return SourceElement(self, log)
        if kind == self._KIND_TARGET:
            return TargetElement(self, log)
        raise ValueError(f"unknown element kind {kind}")


class TransparentSuite(BilinearSuite):
    """Exponent-tracking oracle suite.  Insecure by design."""

    suite_id = 1

    def generator(self) -> SourceElement:
        return SourceElement(self, 1)

    def identity_source(self) -> SourceElement:
        return SourceElement(self, 0)

    def identity_target(self) -> TargetElement:
        return TargetElement(self, 0)

    def gt_generator(self) -> TargetElement:
        """e(g, g), the target-group base the transparent logs refer to."""
        return TargetElement(self, 1)

    def source_from_log(self, log: int) -> SourceElement:
        return SourceElement(self, log)

    def target_from_log(self, log: int) -> TargetElement:
        return TargetElement(self, log)

    def random_source(self, rng: Random) -> SourceElement:
        return SourceElement(self, rng.randrange(self.p))

    def random_target(self, rng: Random) -> TargetElement:
        return TargetElement(self, rng.randrange(self.p))

    def pair(self, a: SourceElement, b: SourceElement) -> TargetElement:
        if not isinstance(a, SourceElement) or not isinstance(b, SourceElement):
            raise SuiteMismatchError("pairing arguments must be source elements")
        if a.suite != self or b.suite != self:
            raise SuiteMismatchError("pairing arguments from a different suite")
        self.counters.pairings += 1
        return TargetElement(self, a.log * b.log)

    def __repr__(self):
        return f"TransparentSuite(p={self.p})"


# Smallest Mersenne prime that comfortably defeats accidental collisions
# in randomized tests while keeping brute-force oracles instant.
DEFAULT_MODULUS = 2**31 - 1


def pair(a: SourceElement, b: SourceElement) -> TargetElement:
    """Module-level convenience for suite.pair(a, b)."""
    if a.suite != b.suite:
        raise SuiteMismatchError("pairing arguments from different suites")
    return a.suite.pair(a, b)


def parse_suite(spec: str) -> BilinearSuite:
    """Parse a suite descriptor such as ``transparent:101``."""
    kind, _, rest = spec.partition(":")
    if kind != "transparent":
        raise ValueError(f"unknown suite kind {kind!r}")
    if not rest:
        return TransparentSuite(DEFAULT_MODULUS)
    try:
        p = int(rest)
    except ValueError as exc:
        raise ValueError(f"bad suite modulus {rest!r}") from exc
    return TransparentSuite(p)
