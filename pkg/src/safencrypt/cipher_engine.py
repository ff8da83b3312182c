"""AES-CBC and AES-GCM encryption under registry constraints.

The block cipher and GCM arithmetic come from ``cryptography``; padding, IV
generation, length checks and failure translation live here.  Encryption
always draws its own IV.  GCM tags are appended to the ciphertext and use the
configured tag length.
"""

from __future__ import annotations

import hmac
from dataclasses import dataclass
from typing import Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .config_registry import (
    BLOCK_BYTES,
    AlgorithmId,
    AlgorithmLike,
    ModeConstraints,
    Registry,
    validate_whitelisted,
)
from .error_mapping import (
    CiphertextLengthError,
    IvLengthError,
    Phase,
    SafError,
    wrap_backend,
)
from .key_material import KeyLike, SymmetricKey, random_bytes, validate_key_length

PADDING_FAILURE_MESSAGE = (
    "Given final block not properly padded. Such issues can arise if a bad key is used during decryption."
)


class InvalidPaddingError(ValueError):
    """Malformed PKCS#7 trailer (backend-level; surfaced to callers as SAF_010)."""


@dataclass(frozen=True)
class SymmetricCipherResult:
    """Everything needed to decrypt: algorithm, key, IV and ciphertext (tag appended for GCM)."""

    algorithm: AlgorithmId
    key: SymmetricKey
    iv: bytes
    ciphertext: bytes
    pbe: Optional[object] = None  # PbeDerivation when the key came from a password

    @property
    def salt(self) -> Optional[bytes]:
        return self.pbe.salt if self.pbe is not None else None

    def __repr__(self) -> str:
        return (
            f"SymmetricCipherResult(algorithm={self.algorithm}, key={self.key!r}, "
            f"iv=<{len(self.iv)} bytes>, ciphertext=<{len(self.ciphertext)} bytes>)"
        )


def pkcs7_trailer(length: int, block: int = BLOCK_BYTES) -> bytes:
    """Padding bytes appended to a message of ``length`` bytes."""
    n = block - length % block
    return bytes([n]) * n


def pad_pkcs7(data: bytes, block: int = BLOCK_BYTES) -> bytes:
    return bytes(data) + pkcs7_trailer(len(data), block)


def unpad_pkcs7(data: bytes, block: int = BLOCK_BYTES) -> bytes:
    if not data or len(data) % block:
        raise InvalidPaddingError(f"Input length must be a positive multiple of {block}")
    n = data[-1]
    valid = 1 <= n <= block
    if not (valid and hmac.compare_digest(data[-n:], bytes([n]) * n)):
        raise InvalidPaddingError(PADDING_FAILURE_MESSAGE)
    return bytes(data[:-n])


def resolve_constraints(
    alg: AlgorithmLike, reg: Registry, constraints: Optional[ModeConstraints] = None
) -> tuple:
    alg = validate_whitelisted(alg, reg)
    return alg, constraints if constraints is not None else reg.constraints[alg.mode_key]


def generate_iv(alg: AlgorithmLike, reg: Registry, constraints: Optional[ModeConstraints] = None) -> bytes:
    _, cons = resolve_constraints(alg, reg, constraints)
    return random_bytes(cons.iv_bytes, reg)


def check_iv(alg: AlgorithmId, iv: bytes, cons: ModeConstraints, reg: Registry) -> bytes:
    if len(iv) != cons.iv_bytes:
        raise IvLengthError(
            iv_length=len(iv), algorithm=str(alg), expected_length=cons.iv_bytes, catalog=reg.error_catalog
        )
    return bytes(iv)


def check_ciphertext_length(alg: AlgorithmId, length: int, cons: ModeConstraints, reg: Registry) -> None:
    if alg.mode == "GCM":
        if length < cons.tag_bytes:
            requirement = f"it should be at least [{cons.tag_bytes}] bytes long"
        else:
            return
    elif length == 0 or length % BLOCK_BYTES:
        requirement = f"it should be a positive multiple of [{BLOCK_BYTES}] bytes"
    else:
        return
    raise CiphertextLengthError(
        length=length, algorithm=str(alg), requirement=requirement, catalog=reg.error_catalog
    )


# -- low-level contexts (shared with streaming) ------------------------------


def _cipher(alg: AlgorithmId, key: bytes, mode) -> Cipher:
    return Cipher(algorithms.AES(key), mode)


def encryptor(alg: AlgorithmId, key: bytes, iv: bytes):
    mode = modes.GCM(iv) if alg.mode == "GCM" else modes.CBC(iv)
    return _cipher(alg, key, mode).encryptor()


def cbc_decryptor(alg: AlgorithmId, key: bytes, iv: bytes):
    return _cipher(alg, key, modes.CBC(iv)).decryptor()


def gcm_decryptor(alg: AlgorithmId, key: bytes, iv: bytes, tag: bytes):
    return _cipher(alg, key, modes.GCM(iv, tag, min_tag_length=len(tag))).decryptor()


def gcm_stream_decryptor(alg: AlgorithmId, key: bytes, iv: bytes, tag_bytes: int):
    """GCM decryptor whose tag is supplied later via ``finalize_with_tag``."""
    return _cipher(alg, key, modes.GCM(iv, min_tag_length=tag_bytes)).decryptor()


def _seal(alg: AlgorithmId, key: bytes, iv: bytes, plaintext: bytes, cons: ModeConstraints) -> bytes:
    """Encrypt with a given IV.  Internal: used by :func:`encrypt` and known-answer tests."""
    try:
        ctx = encryptor(alg, key, iv)
        if alg.mode == "GCM":
            body = ctx.update(plaintext) + ctx.finalize()
            return body + ctx.tag[: cons.tag_bytes]
        return ctx.update(pad_pkcs7(plaintext)) + ctx.finalize()
    except SafError:
        raise
    except Exception as exc:  # backend failure, mapped
        raise wrap_backend(exc, Phase.ENCRYPT) from None


def encrypt(
    alg: AlgorithmLike,
    key: KeyLike,
    plaintext: bytes,
    reg: Registry,
    *,
    constraints: Optional[ModeConstraints] = None,
) -> SymmetricCipherResult:
    alg, cons = resolve_constraints(alg, reg, constraints)
    key = validate_key_length(key, alg, reg)
    iv = random_bytes(cons.iv_bytes, reg)
    ct = _seal(alg, key.data, iv, bytes(plaintext), cons)
    return SymmetricCipherResult(alg, key, iv, ct)


def decrypt(
    alg: AlgorithmLike,
    key: KeyLike,
    iv: bytes,
    ciphertext: bytes,
    reg: Registry,
    *,
    constraints: Optional[ModeConstraints] = None,
) -> bytes:
    alg, cons = resolve_constraints(alg, reg, constraints)
    key = validate_key_length(key, alg, reg)
    iv = check_iv(alg, iv, cons, reg)
    ciphertext = bytes(ciphertext)
    check_ciphertext_length(alg, len(ciphertext), cons, reg)
    return _open(alg, key.data, iv, ciphertext, cons, reg)


def _open(alg: AlgorithmId, key: bytes, iv: bytes, ciphertext: bytes, cons: ModeConstraints, reg: Registry) -> bytes:
    try:
        if alg.mode == "GCM":
            cut = len(ciphertext) - cons.tag_bytes
            ctx = gcm_decryptor(alg, key, iv, ciphertext[cut:])
            # finalize() verifies the tag; nothing is returned before it succeeds
            out = ctx.update(ciphertext[:cut])
            ctx.finalize()
            return out
        ctx = cbc_decryptor(alg, key, iv)
        return unpad_pkcs7(ctx.update(ciphertext) + ctx.finalize())
    except SafError:
        raise
    except (InvalidTag, InvalidPaddingError, ValueError) as exc:
        raise wrap_backend(exc, Phase.DECRYPT, catalog=reg.error_catalog) from None
