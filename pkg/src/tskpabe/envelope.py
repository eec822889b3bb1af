"""Hybrid content packaging and the signed resource directory.

A package wraps a random target-group element under the attribute scheme,
derives a 256-bit content key from it, and encapsulates the media bytes
chunk by chunk so receivers can verify the portions they already hold.
Each chunk is independently authenticated; the manifest pins the plaintext
digest, the per-chunk digests, and the wrapped key.

The data-encapsulation mechanism is a pluggable contract.  The built-in
one is a keyed blake2b stream with an appended keyed tag: deterministic
given the nonce, authenticated, and entirely unremarkable.  Swap in a real
AEAD for anything beyond simulation.

The directory mirrors the roadside workflow: a sorted list of resource
names with file hashes, timestamps and descriptions, signed by its issuer
so receivers can validate downloads fetched from untrusted peers.
"""

import hashlib
import hmac
from dataclasses import dataclass
from random import Random
from typing import Mapping

from .scheme import Ciphertext, PrivateKey, PublicParams, TimedKpAbe, ct_from_bytes, ct_to_bytes
from .timetree import TimeCover
from .wire import Reader, pack_bytes, pack_str, pack_u32, pack_u64

DEFAULT_CHUNK_SIZE = 1 << 20  # 1 MiB

_KDF_LABEL = b"content-key.v1"
_PACKAGE_MAGIC = b"TKPK"
_DIRECTORY_MAGIC = b"TKDR"
_NONCE_BYTES = 16


class AccessDeniedError(Exception):
    """The wrapped key refused to open for this private key."""


class IntegrityError(Exception):
    """Stored bytes disagree with their pinned digest."""

    def __init__(self, message: str, part: str | None = None):
        super().__init__(message)
        self.part = part


class UnknownIssuerError(Exception):
    """Directory signed by an issuer we have no key for."""


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def derive_content_key(message) -> bytes:
    """256-bit symmetric key from the canonical encoding of a wrapped
    target-group element.  Same element, same key."""
    return hashlib.sha256(_KDF_LABEL + message.suite.encode_element(message)).digest()


class StreamDem:
    """Keyed blake2b stream permutation with an appended keyed digest."""

    TAG_BYTES = 32
    _BLOCK = 64

    def _keystream(self, key: bytes, nonce: bytes, length: int) -> bytes:
        blocks = []
        for counter in range((length + self._BLOCK - 1) // self._BLOCK):
            blocks.append(
                hashlib.blake2b(
                    nonce + counter.to_bytes(8, "big"), key=key, digest_size=self._BLOCK
                ).digest()
            )
        return b"".join(blocks)[:length]

    def _tag(self, key: bytes, nonce: bytes, body: bytes) -> bytes:
        return hashlib.blake2b(
            nonce + body, key=key, digest_size=self.TAG_BYTES
        ).digest()

    def seal(self, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
        stream = self._keystream(key, nonce, len(plaintext))
        body = bytes(a ^ b for a, b in zip(plaintext, stream))
        return body + self._tag(key, nonce, body)

    def open(self, key: bytes, nonce: bytes, data: bytes) -> bytes:
        if len(data) < self.TAG_BYTES:
            raise IntegrityError("sealed chunk shorter than its tag")
        body, tag = data[: -self.TAG_BYTES], data[-self.TAG_BYTES :]
        if not hmac.compare_digest(tag, self._tag(key, nonce, body)):
            raise IntegrityError("chunk authentication failed")
        stream = self._keystream(key, nonce, len(body))
        return bytes(a ^ b for a, b in zip(body, stream))


_DEFAULT_DEM = StreamDem()


def _chunk_nonce(package_nonce: bytes, index: int) -> bytes:
    return package_nonce + index.to_bytes(4, "big")


def _split(content: bytes, chunk_size: int) -> list[bytes]:
    if not content:
        return [b""]
    return [content[i : i + chunk_size] for i in range(0, len(content), chunk_size)]


@dataclass(frozen=True)
class ContentPackage:
    """Manifest plus the sealed chunks of one named content."""

    name: str
    content_size: int
    chunk_size: int
    nonce: bytes
    plaintext_digest: bytes
    chunk_digests: tuple[bytes, ...]
    wrapped_key: Ciphertext
    chunks: tuple[bytes, ...]

    @property
    def cover(self) -> TimeCover:
        return self.wrapped_key.cover

    @property
    def attributes(self) -> tuple[str, ...]:
        return self.wrapped_key.attributes


def seal(
    scheme: TimedKpAbe,
    pk: PublicParams,
    name: str,
    content: bytes,
    cover: TimeCover,
    attributes,
    *,
    rng: Random,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    dem: StreamDem = _DEFAULT_DEM,
) -> ContentPackage:
    if chunk_size < 1:
        raise ValueError("chunk size must be >= 1")
    message = pk.suite.random_target(rng)
    wrapped = scheme.encrypt(pk, message, cover, attributes, rng=rng)
    key = derive_content_key(message)
    nonce = rng.randbytes(_NONCE_BYTES)
    sealed = tuple(
        dem.seal(key, _chunk_nonce(nonce, i), chunk)
        for i, chunk in enumerate(_split(content, chunk_size))
    )
    return ContentPackage(
        name=name,
        content_size=len(content),
        chunk_size=chunk_size,
        nonce=nonce,
        plaintext_digest=sha256(content),
        chunk_digests=tuple(sha256(c) for c in sealed),
        wrapped_key=wrapped,
        chunks=sealed,
    )


def open_package(
    scheme: TimedKpAbe,
    pk: PublicParams,
    package: ContentPackage,
    sk: PrivateKey,
    *,
    dem: StreamDem = _DEFAULT_DEM,
) -> bytes:
    """Verify, unwrap and decrypt.  Chunk digests are checked first, the
    way a receiver validates portions before spending time on decryption."""
    if len(package.chunks) != len(package.chunk_digests):
        raise IntegrityError("chunk count disagrees with manifest", part="manifest")
    for index, (chunk, digest) in enumerate(
        zip(package.chunks, package.chunk_digests)
    ):
        if sha256(chunk) != digest:
            raise IntegrityError(f"digest mismatch in chunk {index}", part=f"chunk {index}")
    message = scheme.decrypt(pk, package.wrapped_key, sk)
    if message is None:
        raise AccessDeniedError(f"key cannot unwrap content {package.name!r}")
    key = derive_content_key(message)
    parts = []
    for index, chunk in enumerate(package.chunks):
        try:
            parts.append(dem.open(key, _chunk_nonce(package.nonce, index), chunk))
        except IntegrityError as exc:
            raise IntegrityError(
                f"authentication failed in chunk {index}", part=f"chunk {index}"
            ) from exc
    content = b"".join(parts)
    if len(content) != package.content_size or sha256(content) != package.plaintext_digest:
        raise IntegrityError("reassembled content digest mismatch", part="content")
    return content


def package_to_bytes(package: ContentPackage) -> bytes:
    out = _PACKAGE_MAGIC
    out += pack_str(package.name)
    out += pack_u64(package.content_size)
    out += pack_u32(package.chunk_size)
    out += pack_bytes(package.nonce)
    out += pack_bytes(package.plaintext_digest)
    out += pack_u32(len(package.chunk_digests))
    for digest in package.chunk_digests:
        out += pack_bytes(digest)
    out += pack_bytes(ct_to_bytes(package.wrapped_key))
    for chunk in package.chunks:
        out += pack_bytes(chunk)
    return out


def package_from_bytes(data: bytes) -> ContentPackage:
    reader = Reader(data)
    reader.expect(_PACKAGE_MAGIC)
    name = reader.str_()
    content_size = reader.u64()
    chunk_size = reader.u32()
    nonce = reader.bytes_()
    plaintext_digest = reader.bytes_()
    count = reader.u32()
    chunk_digests = tuple(reader.bytes_() for _ in range(count))
    wrapped_key = ct_from_bytes(reader.bytes_())
    chunks = tuple(reader.bytes_() for _ in range(count))
    reader.require_exhausted()
    return ContentPackage(
        name=name,
        content_size=content_size,
        chunk_size=chunk_size,
        nonce=nonce,
        plaintext_digest=plaintext_digest,
        chunk_digests=chunk_digests,
        wrapped_key=wrapped_key,
        chunks=chunks,
    )


# ----------------------------------------------------------------------
# Signed resource directory.
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DirectoryEntry:
    name: str
    file_hash: bytes
    updated_at: int  # epoch seconds
    description: str = ""
    category: str = ""

    def encode(self) -> bytes:
        return (
            pack_str(self.name)
            + pack_bytes(self.file_hash)
            + pack_u64(self.updated_at)
            + pack_str(self.description)
            + pack_str(self.category)
        )


class KeyedDigestSigner:
    """Signature test double: a keyed digest shared with verifiers."""

    def __init__(self, issuer: str, secret: bytes):
        self.issuer = issuer
        self._secret = secret

    def sign(self, data: bytes) -> bytes:
        return hmac.new(self._secret, data, hashlib.sha256).digest()


def _canonical_entries(entries) -> tuple[DirectoryEntry, ...]:
    ordered = tuple(sorted(entries, key=lambda e: e.name))
    names = [e.name for e in ordered]
    if len(set(names)) != len(names):
        raise ValueError("duplicate resource names in directory")
    return ordered


def _directory_body(issuer: str, entries: tuple[DirectoryEntry, ...]) -> bytes:
    body = pack_str(issuer) + pack_u32(len(entries))
    for entry in entries:
        body += entry.encode()
    return body


@dataclass(frozen=True)
class SignedDirectory:
    issuer: str
    entries: tuple[DirectoryEntry, ...]
    signature: bytes

    def find(self, name: str) -> DirectoryEntry | None:
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None


def build_directory(entries, signer: KeyedDigestSigner) -> SignedDirectory:
    ordered = _canonical_entries(entries)
    signature = signer.sign(_directory_body(signer.issuer, ordered))
    return SignedDirectory(signer.issuer, ordered, signature)


def verify_directory(
    directory: SignedDirectory, trusted: Mapping[str, bytes]
) -> bool:
    """True iff the signature matches under the issuer's trusted secret.
    An issuer we hold no key for is reported distinctly."""
    if directory.issuer not in trusted:
        raise UnknownIssuerError(f"no trusted key for issuer {directory.issuer!r}")
    expected = hmac.new(
        trusted[directory.issuer],
        _directory_body(directory.issuer, directory.entries),
        hashlib.sha256,
    ).digest()
    return hmac.compare_digest(directory.signature, expected)


def directory_to_bytes(directory: SignedDirectory) -> bytes:
    return (
        _DIRECTORY_MAGIC
        + _directory_body(directory.issuer, directory.entries)
        + pack_bytes(directory.signature)
    )


def directory_from_bytes(data: bytes) -> SignedDirectory:
    reader = Reader(data)
    reader.expect(_DIRECTORY_MAGIC)
    issuer = reader.str_()
    count = reader.u32()
    entries = tuple(
        DirectoryEntry(
            name=reader.str_(),
            file_hash=reader.bytes_(),
            updated_at=reader.u64(),
            description=reader.str_(),
            category=reader.str_(),
        )
        for _ in range(count)
    )
    signature = reader.bytes_()
    reader.require_exhausted()
    return SignedDirectory(issuer, entries, signature)
