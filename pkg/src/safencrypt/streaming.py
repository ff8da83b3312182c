"""Chunked encryption and decryption of byte streams.

Output is byte-identical to one-shot :func:`safencrypt.cipher_engine.encrypt`
for the same key and IV, whatever the chunk size.  There is no in-band header:
the IV (and salt, for password-derived keys) travel out of band.

GCM decryption writes nothing to the sink until the tag has been verified; the
plaintext is staged in a spooled temporary file meanwhile.  Passing
``release_unverified=True`` streams plaintext early instead and only reports a
bad tag at the end.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from typing import BinaryIO, Optional

from cryptography.exceptions import InvalidTag

from . import cipher_engine
from .cipher_engine import InvalidPaddingError, check_ciphertext_length, check_iv, resolve_constraints
from .config_registry import AlgorithmId, AlgorithmLike, ModeConstraints, Registry, default_registry
from .error_mapping import IvInjectionError, Phase, SafError, wrap_backend
from .key_material import KeyLike, SymmetricKey, random_bytes, validate_key_length

DEFAULT_CHUNK_BYTES = 4096
SPOOL_BYTES = 1 << 20

ENCRYPT = "encrypt"
DECRYPT = "decrypt"


class StreamIOError(OSError):
    """I/O failure on the source or sink, with the stream offset where it happened."""

    def __init__(self, action: str, position: int, cause: OSError):
        super().__init__(cause.errno, f"{action} failed at byte {position}: {cause}")
        self.position = position


@dataclass(frozen=True)
class StreamJob:
    algorithm: AlgorithmId
    key: SymmetricKey
    direction: str
    iv: Optional[bytes] = None
    chunk_bytes: int = DEFAULT_CHUNK_BYTES
    constraints: Optional[ModeConstraints] = None

    def __post_init__(self):
        if self.direction not in (ENCRYPT, DECRYPT):
            raise ValueError(f"direction must be {ENCRYPT!r} or {DECRYPT!r}")
        if self.chunk_bytes < 16:
            raise ValueError("chunk_bytes must be at least 16")

    @classmethod
    def encrypting(
        cls,
        alg: AlgorithmLike,
        key: KeyLike,
        reg: Optional[Registry] = None,
        *,
        chunk_bytes: int = DEFAULT_CHUNK_BYTES,
        constraints: Optional[ModeConstraints] = None,
    ) -> "StreamJob":
        reg = reg or default_registry()
        alg, cons = resolve_constraints(alg, reg, constraints)
        key = validate_key_length(key, alg, reg)
        return cls(alg, key, ENCRYPT, None, chunk_bytes, cons)

    @classmethod
    def decrypting(
        cls,
        alg: AlgorithmLike,
        key: KeyLike,
        iv: bytes,
        reg: Optional[Registry] = None,
        *,
        chunk_bytes: int = DEFAULT_CHUNK_BYTES,
        constraints: Optional[ModeConstraints] = None,
    ) -> "StreamJob":
        reg = reg or default_registry()
        alg, cons = resolve_constraints(alg, reg, constraints)
        key = validate_key_length(key, alg, reg)
        iv = check_iv(alg, iv, cons, reg)
        return cls(alg, key, DECRYPT, iv, chunk_bytes, cons)

    def __repr__(self) -> str:
        return f"StreamJob({self.direction}, {self.algorithm}, key={self.key!r}, chunk_bytes={self.chunk_bytes})"


@dataclass(frozen=True)
class StreamResult:
    algorithm: AlgorithmId
    iv: bytes
    plaintext_bytes: int
    ciphertext_bytes: int


def _read(source: BinaryIO, n: int, position: int) -> bytes:
    try:
        return source.read(n)
    except OSError as exc:
        raise StreamIOError("read", position, exc) from exc


def _write(sink: BinaryIO, data: bytes, position: int) -> None:
    if not data:
        return
    try:
        sink.write(data)
    except OSError as exc:
        raise StreamIOError("write", position, exc) from exc


def _prepare(job: StreamJob, direction: str, reg: Optional[Registry]):
    reg = reg or default_registry()
    if job.direction != direction:
        raise ValueError(f"job was prepared for {job.direction}, not {direction}")
    alg, cons = resolve_constraints(job.algorithm, reg, job.constraints)
    key = validate_key_length(job.key, alg, reg)
    return reg, alg, cons, key.data


def encrypt_stream(
    job: StreamJob, source: BinaryIO, sink: BinaryIO, reg: Optional[Registry] = None
) -> StreamResult:
    """Encrypt ``source`` into ``sink`` under a freshly generated IV."""
    reg, alg, cons, key = _prepare(job, ENCRYPT, reg)
    if job.iv is not None:
        raise IvInjectionError(catalog=reg.error_catalog)
    iv = random_bytes(cons.iv_bytes, reg)
    return _encrypt_stream(alg, cons, key, iv, job.chunk_bytes, source, sink)


def _encrypt_stream(
    alg: AlgorithmId,
    cons: ModeConstraints,
    key: bytes,
    iv: bytes,
    chunk_bytes: int,
    source: BinaryIO,
    sink: BinaryIO,
) -> StreamResult:
    # Internal: known-IV path shared with the equivalence tests.
    try:
        ctx = cipher_engine.encryptor(alg, key, iv)
    except Exception as exc:
        raise wrap_backend(exc, Phase.ENCRYPT) from None
    read = written = 0
    while True:
        chunk = _read(source, chunk_bytes, read)
        if not chunk:
            break
        read += len(chunk)
        out = ctx.update(chunk)
        _write(sink, out, written)
        written += len(out)
    if alg.mode == "GCM":
        tail = ctx.finalize()
        tail += ctx.tag[: cons.tag_bytes]
    else:
        tail = ctx.update(cipher_engine.pkcs7_trailer(read)) + ctx.finalize()
    _write(sink, tail, written)
    written += len(tail)
    return StreamResult(alg, iv, read, written)


def _truncate(sink: BinaryIO, start: Optional[int]) -> None:
    if start is None:
        return
    try:
        sink.seek(start)
        sink.truncate()
    except (OSError, ValueError):
        pass


def _sink_start(sink: BinaryIO) -> Optional[int]:
    try:
        return sink.tell() if sink.seekable() else None
    except (OSError, AttributeError, ValueError):
        return None


def decrypt_stream(
    job: StreamJob,
    source: BinaryIO,
    sink: BinaryIO,
    reg: Optional[Registry] = None,
    *,
    release_unverified: bool = False,
) -> int:
    """Decrypt ``source`` into ``sink``; returns the number of plaintext bytes.

    On any authentication or padding failure the sink is truncated back to
    where it started (when it is seekable) and SAF_010 is raised.
    """
    reg, alg, cons, key = _prepare(job, DECRYPT, reg)
    if job.iv is None:
        raise ValueError("decryption job needs the IV used for encryption")
    iv = check_iv(alg, job.iv, cons, reg)
    start = _sink_start(sink)
    try:
        if alg.mode == "GCM":
            if release_unverified:
                return _decrypt_gcm(alg, cons, key, iv, job.chunk_bytes, source, sink, reg)
            with tempfile.SpooledTemporaryFile(max_size=max(SPOOL_BYTES, job.chunk_bytes)) as staging:
                n = _decrypt_gcm(alg, cons, key, iv, job.chunk_bytes, source, staging, reg)
                staging.seek(0)
                copied = 0
                while True:
                    block = staging.read(job.chunk_bytes)
                    if not block:
                        break
                    _write(sink, block, copied)
                    copied += len(block)
                return n
        return _decrypt_cbc(alg, cons, key, iv, job.chunk_bytes, source, sink, reg)
    except SafError as exc:
        if exc.code == "SAF_010" or exc.code == "SAF_005":
            _truncate(sink, start)
        raise


def _decrypt_gcm(alg, cons, key, iv, chunk_bytes, source, sink, reg) -> int:
    tag_len = cons.tag_bytes
    ctx = cipher_engine.gcm_stream_decryptor(alg, key, iv, tag_len)
    held = b""  # last tag_len bytes seen so far
    read = written = 0
    while True:
        chunk = _read(source, chunk_bytes, read)
        if not chunk:
            break
        read += len(chunk)
        held += chunk
        if len(held) > tag_len:
            body, held = held[:-tag_len], held[-tag_len:]
            out = ctx.update(body)
            _write(sink, out, written)
            written += len(out)
    check_ciphertext_length(alg, read, cons, reg)
    try:
        out = ctx.finalize_with_tag(held)
    except (InvalidTag, ValueError) as exc:
        raise wrap_backend(exc, Phase.DECRYPT, catalog=reg.error_catalog) from None
    _write(sink, out, written)
    return written + len(out)


def _decrypt_cbc(alg, cons, key, iv, chunk_bytes, source, sink, reg) -> int:
    block = cipher_engine.BLOCK_BYTES
    ctx = cipher_engine.cbc_decryptor(alg, key, iv)
    held = b""  # last decrypted block, kept back for unpadding
    read = written = 0
    while True:
        chunk = _read(source, chunk_bytes, read)
        if not chunk:
            break
        read += len(chunk)
        held += ctx.update(chunk)
        if len(held) > block:
            cut = len(held) - block
            _write(sink, held[:cut], written)
            written += cut
            held = held[cut:]
    check_ciphertext_length(alg, read, cons, reg)
    try:
        held += ctx.finalize()
        out = cipher_engine.unpad_pkcs7(held)
    except (InvalidPaddingError, ValueError) as exc:
        raise wrap_backend(exc, Phase.DECRYPT, catalog=reg.error_catalog) from None
    _write(sink, out, written)
    return written + len(out)
