"""Random key generation and PBKDF2 password-based key derivation."""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass
from typing import Optional, Union

from .config_registry import AlgorithmId, AlgorithmLike, Registry, as_algorithm, default_registry, validate_whitelisted
from .error_mapping import (
    EmptyPasswordError,
    EntropyUnavailableError,
    InvalidKeyError,
    KdfNotWhitelistedError,
    KeyLengthError,
    SaltLengthError,
)

# PRF name -> hashlib digest name
PRF_DIGESTS = {
    "PBKDF2WithHmacSHA256": "sha256",
    "PBKDF2WithHmacSHA512": "sha512",
}


class SymmetricKey:
    """Secret key bytes.  Never shows its contents in repr/str."""

    __slots__ = ("_data", "bound_algorithm")

    def __init__(self, data: bytes, bound_algorithm: Optional[AlgorithmId] = None):
        if not isinstance(data, (bytes, bytearray, memoryview)):
            raise InvalidKeyError(backend=("TypeError", f"key must be bytes, not {type(data).__name__}"))
        object.__setattr__(self, "_data", bytes(data))
        object.__setattr__(self, "bound_algorithm", bound_algorithm)

    def __setattr__(self, name, value):
        raise AttributeError("SymmetricKey is immutable")

    @property
    def data(self) -> bytes:
        return self._data

    def __bytes__(self) -> bytes:
        return self._data

    def __len__(self) -> int:
        return len(self._data)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SymmetricKey):
            return hmac.compare_digest(self._data, other._data)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("SymmetricKey", hashlib.sha256(self._data).digest()))

    def __repr__(self) -> str:
        alg = f", {self.bound_algorithm}" if self.bound_algorithm else ""
        return f"SymmetricKey(<{len(self._data)} bytes redacted>{alg})"

    __str__ = __repr__

    def __format__(self, spec: str) -> str:
        return repr(self)


KeyLike = Union[SymmetricKey, bytes, bytearray]


def as_key(key: KeyLike) -> SymmetricKey:
    return key if isinstance(key, SymmetricKey) else SymmetricKey(key)


@dataclass(frozen=True)
class PbeDerivation:
    key: SymmetricKey
    salt: bytes
    prf: str
    iterations: int

    def __repr__(self) -> str:
        return f"PbeDerivation(key={self.key!r}, salt=<{len(self.salt)} bytes>, prf={self.prf!r}, iterations={self.iterations})"


def random_bytes(n: int, reg: Optional[Registry] = None) -> bytes:
    try:
        return secrets.token_bytes(n)
    except (OSError, NotImplementedError) as exc:
        raise EntropyUnavailableError(
            reason=type(exc).__name__, catalog=reg.error_catalog if reg else None
        ) from None


def generate_key(alg: AlgorithmLike, reg: Optional[Registry] = None) -> SymmetricKey:
    reg = reg or default_registry()
    alg = validate_whitelisted(alg, reg)
    return SymmetricKey(random_bytes(alg.key_bytes, reg), alg)


def validate_key_length(key: KeyLike, alg: AlgorithmLike, reg: Optional[Registry] = None) -> SymmetricKey:
    key = as_key(key)
    alg = as_algorithm(alg)
    if len(key) != alg.key_bytes:
        raise KeyLengthError(
            key_length=len(key),
            algorithm=str(alg),
            expected_length=alg.key_bytes,
            catalog=reg.error_catalog if reg else None,
        )
    return key


def pbkdf2(prf: str, password: bytes, salt: bytes, iterations: int, length: int) -> bytes:
    return hashlib.pbkdf2_hmac(PRF_DIGESTS[prf], password, salt, iterations, length)


def derive_key(
    password: str,
    alg: AlgorithmLike,
    reg: Optional[Registry] = None,
    salt: Optional[bytes] = None,
    prf: Optional[str] = None,
) -> PbeDerivation:
    """Derive a key for ``alg`` from ``password`` with the configured PBKDF2 settings.

    A fresh salt of ``reg.kdf.salt_bytes`` is drawn when none is given.  The
    output length is the algorithm's key size.
    """
    reg = reg or default_registry()
    alg = validate_whitelisted(alg, reg)
    catalog = reg.error_catalog
    if not password:
        raise EmptyPasswordError(catalog=catalog)
    prf = prf or reg.kdf.default_algorithm
    if prf not in reg.kdf.algorithms or prf not in PRF_DIGESTS:
        raise KdfNotWhitelistedError(prf=prf, catalog=catalog)
    if salt is None:
        salt = random_bytes(reg.kdf.salt_bytes, reg)
    elif len(salt) != reg.kdf.salt_bytes:
        raise SaltLengthError(salt_length=len(salt), expected_length=reg.kdf.salt_bytes, catalog=catalog)
    secret = password.encode("utf-8") if isinstance(password, str) else bytes(password)
    raw = pbkdf2(prf, secret, bytes(salt), reg.kdf.iterations, alg.key_bytes)
    return PbeDerivation(SymmetricKey(raw, alg), bytes(salt), prf, reg.kdf.iterations)
