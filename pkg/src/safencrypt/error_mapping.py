"""Coded diagnostics and translation of backend crypto failures.

Every failure that leaves the library is a :class:`SafError`.  Its string form
is one of two shapes::

    [SAF_003 : Provided Key With Length [23] bytes ...]
    [module.BackendError: backend message] | [SAF_010 : Either the Mode/...]

Message templates come from an error catalog (``data/errors.json`` by default,
overridable through a config directory).  Codes are fixed, templates are not.
"""

from __future__ import annotations

import enum
import json
import string
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import Any, Mapping, Optional, Tuple

CATCH_ALL_CODE = "SAF_099"


class Phase(str, enum.Enum):
    """Operation phase in which an error surfaced."""

    ALGORITHM = "algorithm-selection"
    KEY = "key-binding"
    IV = "iv-binding"
    CIPHERTEXT = "ciphertext-binding"
    ENCRYPT = "encrypt"
    DECRYPT = "decrypt"
    KDF = "key-derivation"
    CONFIG = "config"
    ENCODING = "encoding"


class TemplateArityError(KeyError):
    """A catalog template references a placeholder the caller did not bind."""


@lru_cache(maxsize=None)
def default_catalog() -> Mapping[str, str]:
    text = resources.files("safencrypt").joinpath("data/errors.json").read_text("utf-8")
    return MappingProxyType(json.loads(text))


def template_fields(template: str) -> frozenset:
    return frozenset(
        name for _, name, _, _ in string.Formatter().parse(template) if name is not None
    )


def _render_template(code: str, template: str, params: Mapping[str, Any]) -> str:
    missing = template_fields(template) - params.keys()
    if missing:
        raise TemplateArityError(f"{code}: unbound placeholder(s) {sorted(missing)}")
    return template.format(**params)


_CODE_CLASSES: dict = {}


class SafError(Exception):
    """Base class of every coded diagnostic raised by the library.

    Subclasses pin a ``code`` and the placeholder names their template needs.
    Keyword arguments become template parameters.
    """

    code: str = CATCH_ALL_CODE
    params: Tuple[str, ...] = ("context",)
    default_phase: Phase = Phase.ENCRYPT

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if "code" in cls.__dict__:
            _CODE_CLASSES.setdefault(cls.code, cls)

    def __init__(
        self,
        *,
        backend: Optional[Tuple[str, str]] = None,
        context: Optional[Phase] = None,
        catalog: Optional[Mapping[str, str]] = None,
        **params: Any,
    ):
        self.context = Phase(context) if context is not None else self.default_phase
        self.backend = backend
        self.details = dict(params)
        self.details.setdefault("context", self.context.value)
        catalog = catalog if catalog is not None else default_catalog()
        self.message = _render_template(self.code, catalog[self.code], self.details)
        super().__init__(render(self))

    def __str__(self) -> str:
        return render(self)


def render(e: SafError) -> str:
    own = f"[{e.code} : {e.message}]"
    if e.backend is None:
        return own
    cls_name, msg = e.backend
    return f"[{cls_name}: {msg}] | {own}"


class MalformedAlgorithmId(SafError, ValueError):
    code = "SAF_001"
    params = ("algorithm", "reason")
    default_phase = Phase.ALGORITHM


class NotWhitelistedError(SafError):
    code = "SAF_002"
    params = ("algorithm",)
    default_phase = Phase.ALGORITHM


class KeyLengthError(SafError):
    code = "SAF_003"
    params = ("key_length", "algorithm", "expected_length")
    default_phase = Phase.KEY


class IvLengthError(SafError):
    code = "SAF_004"
    params = ("iv_length", "algorithm", "expected_length")
    default_phase = Phase.IV


class CiphertextLengthError(SafError):
    code = "SAF_005"
    params = ("length", "algorithm", "requirement")
    default_phase = Phase.CIPHERTEXT


class EmptyPasswordError(SafError):
    code = "SAF_006"
    params = ()
    default_phase = Phase.KDF


class SaltLengthError(SafError):
    code = "SAF_007"
    params = ("salt_length", "expected_length")
    default_phase = Phase.KDF


class UnknownProfileError(SafError, LookupError):
    code = "SAF_008"
    params = ("language",)
    default_phase = Phase.CONFIG


class KdfNotWhitelistedError(SafError):
    code = "SAF_009"
    params = ("prf",)
    default_phase = Phase.KDF


class DecryptionError(SafError):
    code = "SAF_010"
    params = ()
    default_phase = Phase.DECRYPT


class EntropyUnavailableError(SafError):
    code = "SAF_012"
    params = ("reason",)


class PipelineStateError(SafError):
    code = "SAF_013"
    params = ("step",)


class InvalidKeyError(SafError):
    code = "SAF_014"
    params = ()
    default_phase = Phase.KEY


class IvInjectionError(SafError):
    code = "SAF_015"
    params = ()
    default_phase = Phase.ENCRYPT


class ConfigParseError(SafError):
    code = "SAF_020"
    params = ("document", "reason")
    default_phase = Phase.CONFIG


class ConfigDriftError(SafError):
    code = "SAF_021"
    params = ("document", "missing_in_config", "missing_in_enum")
    default_phase = Phase.CONFIG


class ConstraintMissingError(SafError):
    code = "SAF_022"
    params = ("mode",)
    default_phase = Phase.CONFIG


class DefaultNotWhitelistedError(SafError):
    code = "SAF_023"
    params = ("algorithm", "document")
    default_phase = Phase.CONFIG


class DecodeError(SafError, ValueError):
    code = "SAF_030"
    params = ("encoding", "offset", "reason")
    default_phase = Phase.ENCODING


class BackendFailure(SafError):
    code = CATCH_ALL_CODE
    params = ("context",)


# Warnings share the catalog but are never raised.
CBC_WARNING_CODE = "SAF_011"


def render_warning(family: str, mode: str, catalog: Optional[Mapping[str, str]] = None) -> str:
    catalog = catalog if catalog is not None else default_catalog()
    msg = _render_template(
        CBC_WARNING_CODE, catalog[CBC_WARNING_CODE], {"family": family, "mode": mode}
    )
    return f"[{CBC_WARNING_CODE} : {msg}]"


def known_codes() -> frozenset:
    """Codes the library itself can emit."""
    return frozenset(_CODE_CLASSES) | {CBC_WARNING_CODE}


def code_params() -> Mapping[str, frozenset]:
    """Placeholder names each code is rendered with (a catalog may use a subset)."""
    out = {code: frozenset(cls.params) | {"context"} for code, cls in _CODE_CLASSES.items()}
    out[CBC_WARNING_CODE] = frozenset({"family", "mode", "context"})
    return out


def error_class(code: str) -> type:
    return _CODE_CLASSES[code]


# (backend class suffix, phase or None for any) -> code.  First match wins.
_PADDING_CLASSES = ("BadPaddingException", "InvalidPaddingError")
_BLOCK_CLASSES = ("IllegalBlockSizeException",)
_TAG_CLASSES = ("InvalidTag", "AEADBadTagException")
_KEY_MESSAGES = (
    "illegal key size",
    "invalid aes key length",
    "key length not 128/192/256",
    "invalid key size",
)


def _short(cls_name: str) -> str:
    return cls_name.rsplit(".", 1)[-1]


def map_backend_error(
    backend_class: str,
    backend_message: str,
    context: Phase,
    *,
    catalog: Optional[Mapping[str, str]] = None,
    **params: Any,
) -> SafError:
    """Translate a backend failure into the matching coded diagnostic.

    Total: anything without a rule becomes the catch-all code with the backend
    class and message preserved.  ``params`` supply placeholders for codes
    that need them (e.g. key lengths for SAF_003).
    """
    context = Phase(context)
    backend = (backend_class, backend_message)
    short = _short(backend_class)
    lowered = backend_message.lower()
    kw = dict(backend=backend, context=context, catalog=catalog)

    if context is Phase.DECRYPT and short in _PADDING_CLASSES + _BLOCK_CLASSES + _TAG_CLASSES:
        return DecryptionError(**kw)
    if any(m in lowered for m in _KEY_MESSAGES) or short == "InvalidKeyException":
        if set(KeyLengthError.params) <= params.keys():
            return KeyLengthError(**kw, **{k: params[k] for k in KeyLengthError.params})
        return InvalidKeyError(**kw)
    return BackendFailure(**kw)


def wrap_backend(exc: BaseException, context: Phase, **kwargs: Any) -> SafError:
    cls = type(exc)
    name = f"{cls.__module__}.{cls.__qualname__}"
    message = str(exc) or _DEFAULT_BACKEND_MESSAGES.get(cls.__qualname__, cls.__qualname__)
    return map_backend_error(name, message, context, **kwargs)


_DEFAULT_BACKEND_MESSAGES = {
    "InvalidTag": "Tag mismatch. Authentication of the cipher text failed.",
}
