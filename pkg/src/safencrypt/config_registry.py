"""Algorithm whitelist, mode constraints, KDF and interop configuration.

The library executes only what the :class:`Registry` allows.  A registry is
built from four JSON documents (symmetric algorithms, PBKDF2, interop profiles,
error catalog) and cross-checked against the compiled-in enumerations
:class:`SymmetricAlgorithm` and :class:`KeyAlgorithm`; any difference between
the two is a load failure.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Optional, Tuple, Union

from .error_mapping import (
    ConfigDriftError,
    ConfigParseError,
    ConstraintMissingError,
    DefaultNotWhitelistedError,
    MalformedAlgorithmId,
    NotWhitelistedError,
    UnknownProfileError,
    code_params,
    known_codes,
    template_fields,
)

CONFIG_ENV_VAR = "SAFENCRYPT_CONFIG_DIR"

SYMMETRIC_FILE = "symmetric.json"
KDF_FILE = "kdf.json"
INTEROP_FILE = "interop.json"
ERRORS_FILE = "errors.json"


class SymmetricAlgorithm(str, enum.Enum):
    # Both PKCS names kept for interoperability; identical for a 16-byte block.
    AES_CBC_128_PKCS7Padding = "AES_CBC_128_PKCS7Padding"
    AES_CBC_192_PKCS7Padding = "AES_CBC_192_PKCS7Padding"
    AES_CBC_256_PKCS7Padding = "AES_CBC_256_PKCS7Padding"
    AES_CBC_128_PKCS5Padding = "AES_CBC_128_PKCS5Padding"
    AES_CBC_192_PKCS5Padding = "AES_CBC_192_PKCS5Padding"
    AES_CBC_256_PKCS5Padding = "AES_CBC_256_PKCS5Padding"
    AES_GCM_128_NoPadding = "AES_GCM_128_NoPadding"
    AES_GCM_192_NoPadding = "AES_GCM_192_NoPadding"
    AES_GCM_256_NoPadding = "AES_GCM_256_NoPadding"
    DEFAULT = "AES_GCM_128_NoPadding"  # alias of AES_GCM_128_NoPadding


class KeyAlgorithm(str, enum.Enum):
    PBKDF2_With_Hmac_SHA256 = "PBKDF2WithHmacSHA256"
    PBKDF2_With_Hmac_SHA512 = "PBKDF2WithHmacSHA512"
    DEFAULT = "PBKDF2WithHmacSHA512"


def supported_algorithms() -> Tuple[str, ...]:
    return tuple(m.value for m in SymmetricAlgorithm)  # aliases are skipped by iteration


def supported_kdf_algorithms() -> Tuple[str, ...]:
    return tuple(m.value for m in KeyAlgorithm)


# -- algorithm identifiers ---------------------------------------------------

FAMILIES = frozenset({"AES"})
# ECB is recognised so that it can be named and then refused by the whitelist.
MODES = frozenset({"CBC", "GCM", "ECB"})
KEY_BITS = (128, 192, 256)
PADDINGS = {"PKCS5Padding": "PKCS5", "PKCS7Padding": "PKCS7", "NoPadding": "NoPadding"}
BLOCK_BYTES = 16


@dataclass(frozen=True, order=True)
class AlgorithmId:
    family: str
    mode: str
    key_bits: int
    padding: str

    def __post_init__(self):
        canonical = self.canonical()
        if self.family not in FAMILIES:
            raise MalformedAlgorithmId(algorithm=canonical, reason=f"unknown family {self.family!r}")
        if self.mode not in MODES:
            raise MalformedAlgorithmId(algorithm=canonical, reason=f"unknown mode {self.mode!r}")
        if self.key_bits not in KEY_BITS:
            raise MalformedAlgorithmId(
                algorithm=canonical, reason=f"key size must be one of {list(KEY_BITS)}"
            )
        if self.padding not in PADDINGS.values():
            raise MalformedAlgorithmId(algorithm=canonical, reason=f"unknown padding {self.padding!r}")
        if self.mode == "GCM" and self.padding != "NoPadding":
            raise MalformedAlgorithmId(algorithm=canonical, reason="GCM requires NoPadding")
        if self.mode == "CBC" and self.padding == "NoPadding":
            raise MalformedAlgorithmId(algorithm=canonical, reason="CBC requires PKCS5 or PKCS7 padding")

    def canonical(self) -> str:
        pad = self.padding if self.padding == "NoPadding" else f"{self.padding}Padding"
        return f"{self.family}_{self.mode}_{self.key_bits}_{pad}"

    __str__ = canonical

    @property
    def key_bytes(self) -> int:
        return self.key_bits // 8

    @property
    def mode_key(self) -> str:
        """Constraint lookup key, e.g. ``AES_GCM``."""
        return f"{self.family}_{self.mode}"

    @property
    def transformation(self) -> str:
        return f"{self.family}/{self.mode}"

    @property
    def is_aead(self) -> bool:
        return self.mode == "GCM"


AlgorithmLike = Union[AlgorithmId, SymmetricAlgorithm, str]


def parse_algorithm_id(text: str) -> AlgorithmId:
    """Parse ``FAMILY_MODE_BITS_PADDING`` into an :class:`AlgorithmId`.

    >>> parse_algorithm_id("AES_CBC_128_PKCS5Padding")
    AlgorithmId(family='AES', mode='CBC', key_bits=128, padding='PKCS5')
    """
    if not isinstance(text, str):
        raise MalformedAlgorithmId(algorithm=repr(text), reason="identifier must be a string")
    parts = text.split("_")
    if len(parts) != 4:
        raise MalformedAlgorithmId(
            algorithm=text, reason=f"expected 4 components FAMILY_MODE_BITS_PADDING, got {len(parts)}"
        )
    family, mode, bits, pad = parts
    if not bits.isdigit() or bits != str(int(bits)):
        raise MalformedAlgorithmId(algorithm=text, reason=f"key size {bits!r} is not a number")
    if pad not in PADDINGS:
        raise MalformedAlgorithmId(algorithm=text, reason=f"unknown padding {pad!r}")
    return AlgorithmId(family, mode, int(bits), PADDINGS[pad])


def as_algorithm(alg: AlgorithmLike) -> AlgorithmId:
    if isinstance(alg, AlgorithmId):
        return alg
    if isinstance(alg, SymmetricAlgorithm):
        return parse_algorithm_id(alg.value)
    return parse_algorithm_id(alg)


# -- configuration types -----------------------------------------------------


@dataclass(frozen=True)
class ModeConstraints:
    iv_bytes: int
    tag_bits: Optional[int] = None

    @property
    def tag_bytes(self) -> int:
        return (self.tag_bits or 0) // 8


@dataclass(frozen=True)
class KdfConfig:
    algorithms: Tuple[str, ...]
    default_algorithm: str
    salt_bytes: int
    iterations: int


@dataclass(frozen=True)
class InteropProfile:
    language: str
    library_provider: str
    default_algorithm: AlgorithmId
    constraints: ModeConstraints


@dataclass(frozen=True)
class Registry:
    whitelist: Tuple[AlgorithmId, ...]
    default_algorithm: AlgorithmId
    constraints: Mapping[str, ModeConstraints]
    kdf: KdfConfig
    interop: Mapping[str, InteropProfile]
    error_catalog: Mapping[str, str]
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_members", frozenset(self.whitelist))

    def __contains__(self, alg: object) -> bool:
        return alg in self._members

    def to_dict(self) -> dict:
        def cons(c: ModeConstraints) -> dict:
            d = {"iv-bytes": c.iv_bytes}
            if c.tag_bits is not None:
                d["tag-bits"] = c.tag_bits
            return d

        return {
            "symmetric-algorithms": [str(a) for a in self.whitelist],
            "default-algorithm": str(self.default_algorithm),
            "constraints": {k: cons(v) for k, v in self.constraints.items()},
            "kdf": {
                "algorithms": list(self.kdf.algorithms),
                "default-algorithm": self.kdf.default_algorithm,
                "salt-bytes": self.kdf.salt_bytes,
                "iterations": self.kdf.iterations,
            },
            "interoperable-languages": {
                name: {
                    "library-Provider": p.library_provider,
                    "symmetric": {"default-algo": str(p.default_algorithm), **cons(p.constraints)},
                }
                for name, p in self.interop.items()
            },
            "error-catalog": dict(self.error_catalog),
        }


# -- validation helpers ------------------------------------------------------


def _require_object(doc: Any, name: str, where: str) -> Mapping:
    if not isinstance(doc, Mapping):
        raise ConfigParseError(document=name, reason=f"{where} must be a JSON object")
    return doc


def _check_keys(obj: Mapping, name: str, where: str, required: set, optional: set = frozenset()):
    missing = required - obj.keys()
    if missing:
        raise ConfigParseError(document=name, reason=f"{where} is missing {sorted(missing)}")
    extra = obj.keys() - required - optional
    if extra:
        raise ConfigParseError(document=name, reason=f"{where} has unknown keys {sorted(extra)}")


def _int(value: Any, name: str, where: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigParseError(document=name, reason=f"{where} must be an integer")
    if value < minimum:
        raise ConfigParseError(document=name, reason=f"{where} must be >= {minimum}")
    return value


def _parse_alg(text: Any, name: str, where: str) -> AlgorithmId:
    try:
        return parse_algorithm_id(text)
    except MalformedAlgorithmId as exc:
        raise ConfigParseError(document=name, reason=f"{where}: {exc.message}") from exc


def _parse_constraints(obj: Any, mode: str, name: str, where: str) -> ModeConstraints:
    obj = _require_object(obj, name, where)
    if mode == "GCM":
        _check_keys(obj, name, where, {"iv-bytes", "tag-bits"})
        iv = _int(obj["iv-bytes"], name, f"{where}.iv-bytes", 1)
        tag = _int(obj["tag-bits"], name, f"{where}.tag-bits", 1)
        if tag % 8 or not 32 <= tag <= 128:
            raise ConfigParseError(
                document=name, reason=f"{where}.tag-bits must be a multiple of 8 in [32, 128]"
            )
        if not 8 <= iv <= 128:
            raise ConfigParseError(document=name, reason=f"{where}.iv-bytes must be in [8, 128]")
        return ModeConstraints(iv, tag)
    _check_keys(obj, name, where, {"iv-bytes"})
    iv = _int(obj["iv-bytes"], name, f"{where}.iv-bytes", 1)
    if mode == "CBC" and iv != BLOCK_BYTES:
        raise ConfigParseError(document=name, reason=f"{where}.iv-bytes must equal the block size 16")
    return ModeConstraints(iv)


def _check_drift(document: str, configured: Iterable[str], supported: Iterable[str]):
    configured, supported = set(configured), set(supported)
    if configured != supported:
        raise ConfigDriftError(
            document=document,
            missing_in_config=sorted(supported - configured),
            missing_in_enum=sorted(configured - supported),
        )


# -- loading -----------------------------------------------------------------


def load_registry(
    symmetric_cfg: Mapping,
    kdf_cfg: Mapping,
    interop_cfg: Mapping,
    error_cfg: Mapping,
    *,
    supported: Optional[Iterable[str]] = None,
    supported_kdf: Optional[Iterable[str]] = None,
) -> Registry:
    """Validate the four configuration documents and build a :class:`Registry`.

    ``supported`` / ``supported_kdf`` default to the compiled-in enumerations;
    they are parameters only so drift can be exercised from both sides.
    """
    supported = tuple(supported_algorithms() if supported is None else supported)
    supported_kdf = tuple(supported_kdf_algorithms() if supported_kdf is None else supported_kdf)

    catalog = _load_catalog(error_cfg)

    # symmetric
    name = SYMMETRIC_FILE
    sym = _require_object(symmetric_cfg, name, "document")
    _check_keys(sym, name, "document", {"symmetric-algorithms", "constraints"}, {"default-algorithm"})
    raw_algs = sym["symmetric-algorithms"]
    if not isinstance(raw_algs, list) or not raw_algs:
        raise ConfigParseError(document=name, reason="symmetric-algorithms must be a non-empty array")
    whitelist = tuple(_parse_alg(a, name, "symmetric-algorithms") for a in raw_algs)
    if len(set(whitelist)) != len(whitelist):
        raise ConfigParseError(document=name, reason="symmetric-algorithms has duplicates")
    _check_drift(name, (str(a) for a in whitelist), supported)

    raw_cons = _require_object(sym["constraints"], name, "constraints")
    constraints = {}
    for key, obj in raw_cons.items():
        parts = key.split("_") if isinstance(key, str) else []
        if len(parts) != 2 or parts[0] not in FAMILIES or parts[1] not in MODES:
            raise ConfigParseError(document=name, reason=f"unknown constraints key {key!r}")
        constraints[key] = _parse_constraints(obj, parts[1], name, f"constraints.{key}")
    for alg in whitelist:
        if alg.mode_key not in constraints:
            raise ConstraintMissingError(mode=alg.mode_key)

    members = frozenset(whitelist)
    default_text = sym.get("default-algorithm", SymmetricAlgorithm.DEFAULT.value)
    default = _parse_alg(default_text, name, "default-algorithm")
    if default not in members:
        raise DefaultNotWhitelistedError(algorithm=str(default), document=name)

    kdf = _load_kdf(kdf_cfg, supported_kdf)
    interop = _load_interop(interop_cfg, members)

    return Registry(
        whitelist=whitelist,
        default_algorithm=default,
        constraints=MappingProxyType(constraints),
        kdf=kdf,
        interop=MappingProxyType(interop),
        error_catalog=catalog,
    )


def _load_kdf(doc: Mapping, supported_kdf: Tuple[str, ...]) -> KdfConfig:
    name = KDF_FILE
    doc = _require_object(doc, name, "document")
    _check_keys(doc, name, "document", {"algorithms", "salt-bytes", "iterations"}, {"default-algorithm"})
    algs = doc["algorithms"]
    if not isinstance(algs, list) or not algs or not all(isinstance(a, str) for a in algs):
        raise ConfigParseError(document=name, reason="algorithms must be a non-empty string array")
    if len(set(algs)) != len(algs):
        raise ConfigParseError(document=name, reason="algorithms has duplicates")
    _check_drift(name, algs, supported_kdf)
    default = doc.get("default-algorithm", KeyAlgorithm.DEFAULT.value)
    if default not in algs:
        raise ConfigParseError(document=name, reason=f"default-algorithm {default!r} is not in algorithms")
    return KdfConfig(
        algorithms=tuple(algs),
        default_algorithm=default,
        salt_bytes=_int(doc["salt-bytes"], name, "salt-bytes", 16),
        iterations=_int(doc["iterations"], name, "iterations", 1),
    )


def _load_interop(doc: Mapping, members: frozenset) -> dict:
    name = INTEROP_FILE
    doc = _require_object(doc, name, "document")
    _check_keys(doc, name, "document", {"interoperable-languages"})
    langs = _require_object(doc["interoperable-languages"], name, "interoperable-languages")
    profiles = {}
    for lang, body in langs.items():
        where = f"interoperable-languages.{lang}"
        body = _require_object(body, name, where)
        _check_keys(body, name, where, {"library-Provider", "symmetric"})
        provider = body["library-Provider"]
        if not isinstance(provider, str):
            raise ConfigParseError(document=name, reason=f"{where}.library-Provider must be a string")
        sym = dict(_require_object(body["symmetric"], name, f"{where}.symmetric"))
        if "default-algo" not in sym:
            raise ConfigParseError(document=name, reason=f"{where}.symmetric is missing ['default-algo']")
        alg = _parse_alg(sym.pop("default-algo"), name, f"{where}.symmetric.default-algo")
        cons = _parse_constraints(sym, alg.mode, name, f"{where}.symmetric")
        if alg not in members:
            raise DefaultNotWhitelistedError(algorithm=str(alg), document=name)
        profiles[lang] = InteropProfile(lang, provider, alg, cons)
    return profiles


def _load_catalog(doc: Mapping) -> Mapping[str, str]:
    name = ERRORS_FILE
    doc = _require_object(doc, name, "document")
    _check_keys(doc, name, "document", set(known_codes()))
    allowed = code_params()
    for code, template in doc.items():
        if not isinstance(template, str):
            raise ConfigParseError(document=name, reason=f"{code} template must be a string")
        try:
            used = template_fields(template)
        except ValueError as exc:
            raise ConfigParseError(document=name, reason=f"{code} template: {exc}") from exc
        unknown = used - allowed[code]
        if unknown:
            raise ConfigParseError(
                document=name, reason=f"{code} template uses unknown placeholders {sorted(unknown)}"
            )
    return MappingProxyType(dict(doc))


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text("utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigParseError(document=path.name, reason=str(exc)) from exc


def shipped_documents() -> dict:
    base = resources.files("safencrypt").joinpath("data")
    return {
        f: json.loads(base.joinpath(f).read_text("utf-8"))
        for f in (SYMMETRIC_FILE, KDF_FILE, INTEROP_FILE, ERRORS_FILE)
    }


def load_documents(config_dir: Optional[Union[str, os.PathLike]] = None) -> dict:
    """Shipped documents, with any file present in ``config_dir`` taking precedence."""
    docs = shipped_documents()
    if config_dir is not None:
        root = Path(config_dir)
        if not root.is_dir():
            raise ConfigParseError(document=str(root), reason="config directory does not exist")
        for fname in docs:
            if (root / fname).is_file():
                docs[fname] = _read_json(root / fname)
    return docs


def load_registry_from_dir(config_dir: Optional[Union[str, os.PathLike]] = None) -> Registry:
    docs = load_documents(config_dir)
    return load_registry(docs[SYMMETRIC_FILE], docs[KDF_FILE], docs[INTEROP_FILE], docs[ERRORS_FILE])


@lru_cache(maxsize=None)
def _cached_registry(config_dir: Optional[str]) -> Registry:
    return load_registry_from_dir(config_dir)


def default_registry() -> Registry:
    """Registry from the shipped documents, or ``$SAFENCRYPT_CONFIG_DIR`` if set."""
    return _cached_registry(os.environ.get(CONFIG_ENV_VAR) or None)


# -- queries -----------------------------------------------------------------


def validate_whitelisted(alg: AlgorithmLike, reg: Registry) -> AlgorithmId:
    try:
        parsed = as_algorithm(alg)
    except MalformedAlgorithmId as exc:
        # a malformed id can never be whitelisted; keep the more precise code
        raise MalformedAlgorithmId(
            algorithm=exc.details["algorithm"], reason=exc.details["reason"], catalog=reg.error_catalog
        ) from None
    if parsed not in reg:
        raise NotWhitelistedError(algorithm=str(parsed), catalog=reg.error_catalog)
    return parsed


def constraints_for(alg: AlgorithmLike, reg: Registry) -> ModeConstraints:
    parsed = validate_whitelisted(alg, reg)
    return reg.constraints[parsed.mode_key]


def interop_profile(language: str, reg: Registry) -> InteropProfile:
    try:
        return reg.interop[language]
    except (KeyError, TypeError):
        raise UnknownProfileError(language=language, catalog=reg.error_catalog) from None

