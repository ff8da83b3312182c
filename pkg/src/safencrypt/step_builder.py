"""Staged encryption/decryption pipelines.

Each stage object exposes only the next legal step, so the chain reads::

    result = (SafEncrypt.symmetric_encryption()
              .generate_key()
              .plaintext(b"Hello World")
              .encrypt())

    plain = (SafEncrypt.symmetric_decryption()
             .key(result.key)
             .iv(result.iv)
             .cipher_text(result.ciphertext)
             .decrypt())

Inputs are validated at the step that receives them.  Stage objects cannot be
built directly and each one can be advanced only once.
"""

from __future__ import annotations

import contextvars
import functools
import logging
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Iterator, List, Optional, Union

from . import cipher_engine, key_material
from .cipher_engine import SymmetricCipherResult
from .config_registry import (
    AlgorithmId,
    AlgorithmLike,
    ModeConstraints,
    Registry,
    default_registry,
    interop_profile,
    validate_whitelisted,
)
from .error_mapping import EmptyPasswordError, PipelineStateError, SafError, SaltLengthError, render_warning
from .key_material import KeyLike, PbeDerivation, SymmetricKey

logger = logging.getLogger(__name__)

_STAGE_TOKEN = object()
_trace: contextvars.ContextVar = contextvars.ContextVar("safencrypt_trace", default=None)


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # "enter", "raise", "warn", "crypto"
    step: str
    detail: Optional[str] = None


@contextmanager
def tracing() -> Iterator[List[TraceEvent]]:
    """Record pipeline steps, raised codes and cryptographic work in this context."""
    events: List[TraceEvent] = []
    token = _trace.set(events)
    try:
        yield events
    finally:
        _trace.reset(token)


def _emit(kind: str, step: str, detail: Optional[str] = None) -> None:
    events = _trace.get()
    if events is not None:
        events.append(TraceEvent(kind, step, detail))


@dataclass(frozen=True)
class _State:
    registry: Registry
    algorithm: AlgorithmId
    constraints: ModeConstraints
    key: Optional[SymmetricKey] = None
    pbe: Optional[PbeDerivation] = None
    plaintext: Optional[bytes] = None
    iv: Optional[bytes] = None
    ciphertext: Optional[bytes] = None


def _step(name: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(self, *args, **kwargs):
            _emit("enter", name)
            if self._used:
                err = PipelineStateError(step=name, catalog=self._state.registry.error_catalog)
                _emit("raise", name, err.code)
                raise err
            try:
                nxt = fn(self, *args, **kwargs)
            except SafError as exc:
                _emit("raise", name, exc.code)
                raise
            self._used = True
            return nxt

        return wrapper

    return deco


class _Stage:
    __slots__ = ("_state", "_used")

    def __init__(self, token: object, state: _State):
        if token is not _STAGE_TOKEN:
            raise TypeError(f"{type(self).__name__} is created by SafEncrypt pipelines only")
        self._state = state
        self._used = False

    @property
    def algorithm(self) -> AlgorithmId:
        return self._state.algorithm

    @property
    def constraints(self) -> ModeConstraints:
        return self._state.constraints

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self._state.algorithm}>"


def _next(cls, state: _State):
    return cls(_STAGE_TOKEN, state)


def _as_bytes(data: Union[bytes, bytearray, memoryview, str]) -> bytes:
    if isinstance(data, str):
        return data.encode("utf-8")
    return bytes(data)


# -- encryption --------------------------------------------------------------


class EncryptionStart(_Stage):
    """Algorithm chosen; bind a key next."""

    __slots__ = ()

    @_step("generate_key")
    def generate_key(self) -> "EncryptionKeyBound":
        st = self._state
        _emit("crypto", "generate_key")
        key = key_material.generate_key(st.algorithm, st.registry)
        return _next(EncryptionKeyBound, replace(st, key=key))

    @_step("key")
    def key(self, key: KeyLike) -> "EncryptionKeyBound":
        st = self._state
        key = key_material.validate_key_length(key, st.algorithm, st.registry)
        return _next(EncryptionKeyBound, replace(st, key=key))

    @_step("password")
    def password(self, password: str, prf: Optional[str] = None) -> "EncryptionKeyBound":
        st = self._state
        if not password:
            raise EmptyPasswordError(catalog=st.registry.error_catalog)
        _emit("crypto", "derive_key")
        pbe = key_material.derive_key(password, st.algorithm, st.registry, prf=prf)
        return _next(EncryptionKeyBound, replace(st, key=pbe.key, pbe=pbe))

    with_generated_key = generate_key
    with_key = key
    with_password = password


class EncryptionKeyBound(_Stage):
    """Key bound; supply the plaintext next."""

    __slots__ = ()

    @_step("plaintext")
    def plaintext(self, data: Union[bytes, str]) -> "EncryptionReady":
        return _next(EncryptionReady, replace(self._state, plaintext=_as_bytes(data)))


class EncryptionReady(_Stage):
    """Everything bound; :meth:`encrypt` finishes the pipeline."""

    __slots__ = ()

    @_step("encrypt")
    def encrypt(self) -> SymmetricCipherResult:
        st = self._state
        _emit("crypto", "encrypt")
        result = cipher_engine.encrypt(
            st.algorithm, st.key, st.plaintext, st.registry, constraints=st.constraints
        )
        return replace(result, pbe=st.pbe)

    finish_encrypt = encrypt


# -- decryption --------------------------------------------------------------


class DecryptionStart(_Stage):
    """Algorithm chosen; bind the key used for encryption next."""

    __slots__ = ()

    @_step("key")
    def key(self, key: KeyLike) -> "DecryptionKeyBound":
        st = self._state
        key = key_material.validate_key_length(key, st.algorithm, st.registry)
        return _next(DecryptionKeyBound, replace(st, key=key))

    @_step("password")
    def password(self, password: str, salt: bytes, prf: Optional[str] = None) -> "DecryptionKeyBound":
        st = self._state
        if not password:
            raise EmptyPasswordError(catalog=st.registry.error_catalog)
        if len(salt) != st.registry.kdf.salt_bytes:
            raise SaltLengthError(
                salt_length=len(salt), expected_length=st.registry.kdf.salt_bytes, catalog=st.registry.error_catalog
            )
        _emit("crypto", "derive_key")
        pbe = key_material.derive_key(password, st.algorithm, st.registry, salt=salt, prf=prf)
        return _next(DecryptionKeyBound, replace(st, key=pbe.key, pbe=pbe))

    with_key = key
    with_password = password


class DecryptionKeyBound(_Stage):
    __slots__ = ()

    @_step("iv")
    def iv(self, iv: bytes) -> "DecryptionIvBound":
        st = self._state
        iv = cipher_engine.check_iv(st.algorithm, _as_bytes(iv), st.constraints, st.registry)
        return _next(DecryptionIvBound, replace(st, iv=iv))


class DecryptionIvBound(_Stage):
    __slots__ = ()

    @_step("cipher_text")
    def cipher_text(self, ciphertext: bytes) -> "DecryptionReady":
        st = self._state
        ciphertext = _as_bytes(ciphertext)
        cipher_engine.check_ciphertext_length(st.algorithm, len(ciphertext), st.constraints, st.registry)
        return _next(DecryptionReady, replace(st, ciphertext=ciphertext))


class DecryptionReady(_Stage):
    __slots__ = ()

    @_step("decrypt")
    def decrypt(self) -> bytes:
        st = self._state
        _emit("crypto", "decrypt")
        return cipher_engine.decrypt(
            st.algorithm, st.key, st.iv, st.ciphertext, st.registry, constraints=st.constraints
        )

    finish_decrypt = decrypt


# -- entry points ------------------------------------------------------------


def _start(
    cls, step: str, alg: Optional[AlgorithmLike], reg: Optional[Registry], cons: Optional[ModeConstraints] = None
):
    _emit("enter", step)
    reg = reg if reg is not None else default_registry()
    try:
        alg = validate_whitelisted(alg if alg is not None else reg.default_algorithm, reg)
    except SafError as exc:
        _emit("raise", step, exc.code)
        raise
    if alg.mode == "CBC":
        msg = render_warning(alg.family, alg.mode, reg.error_catalog)
        _emit("warn", step, msg)
        logger.warning(msg)
    cons = cons if cons is not None else reg.constraints[alg.mode_key]
    return _next(cls, _State(reg, alg, cons))


def symmetric_encryption(alg: Optional[AlgorithmLike] = None, *, registry: Optional[Registry] = None) -> EncryptionStart:
    """Start an encryption pipeline on ``alg`` or the registry default."""
    return _start(EncryptionStart, "symmetric_encryption", alg, registry)


def symmetric_decryption(alg: Optional[AlgorithmLike] = None, *, registry: Optional[Registry] = None) -> DecryptionStart:
    return _start(DecryptionStart, "symmetric_decryption", alg, registry)


def _profile(language: str, step: str, registry: Optional[Registry]):
    _emit("enter", step)
    reg = registry if registry is not None else default_registry()
    try:
        return reg, interop_profile(language, reg)
    except SafError as exc:
        _emit("raise", step, exc.code)
        raise


def symmetric_interop(language: str, *, registry: Optional[Registry] = None) -> EncryptionStart:
    """Encryption pipeline configured from a named interoperability profile."""
    reg, prof = _profile(language, "symmetric_interop", registry)
    return _start(EncryptionStart, "symmetric_interop", prof.default_algorithm, reg, prof.constraints)


def symmetric_interop_decryption(language: str, *, registry: Optional[Registry] = None) -> DecryptionStart:
    reg, prof = _profile(language, "symmetric_interop_decryption", registry)
    return _start(DecryptionStart, "symmetric_interop_decryption", prof.default_algorithm, reg, prof.constraints)


class SafEncrypt:
    """Namespace mirroring the fluent entry points."""

    symmetric_encryption = staticmethod(symmetric_encryption)
    symmetric_decryption = staticmethod(symmetric_decryption)
    symmetric_interop = staticmethod(symmetric_interop)
    symmetric_interop_decryption = staticmethod(symmetric_interop_decryption)

    def __init__(self):
        raise TypeError("SafEncrypt is not instantiable; use its static entry points")
