"""Misuse-resistant symmetric encryption.

Keys, IVs and salts are generated internally, algorithms come from a
whitelisted configuration, and failures are reported as coded diagnostics.
"""

from .cipher_engine import SymmetricCipherResult
from .config_registry import (
    AlgorithmId,
    InteropProfile,
    KdfConfig,
    KeyAlgorithm,
    ModeConstraints,
    Registry,
    SymmetricAlgorithm,
    constraints_for,
    default_registry,
    interop_profile,
    load_registry,
    load_registry_from_dir,
    parse_algorithm_id,
    validate_whitelisted,
)
from .error_mapping import (
    CiphertextLengthError,
    ConfigDriftError,
    ConfigParseError,
    DecryptionError,
    IvLengthError,
    KeyLengthError,
    MalformedAlgorithmId,
    NotWhitelistedError,
    SafError,
    UnknownProfileError,
)
from .key_material import PbeDerivation, SymmetricKey, derive_key, generate_key
from .step_builder import (
    SafEncrypt,
    symmetric_decryption,
    symmetric_encryption,
    symmetric_interop,
    symmetric_interop_decryption,
)
from .streaming import StreamJob, StreamResult, decrypt_stream, encrypt_stream

__version__ = "0.1.0"

__all__ = [
    "AlgorithmId",
    "CiphertextLengthError",
    "ConfigDriftError",
    "ConfigParseError",
    "DecryptionError",
    "InteropProfile",
    "IvLengthError",
    "KdfConfig",
    "KeyAlgorithm",
    "KeyLengthError",
    "MalformedAlgorithmId",
    "ModeConstraints",
    "NotWhitelistedError",
    "PbeDerivation",
    "Registry",
    "SafEncrypt",
    "SafError",
    "StreamJob",
    "StreamResult",
    "SymmetricAlgorithm",
    "SymmetricCipherResult",
    "SymmetricKey",
    "UnknownProfileError",
    "constraints_for",
    "decrypt_stream",
    "default_registry",
    "derive_key",
    "encrypt_stream",
    "generate_key",
    "interop_profile",
    "load_registry",
    "load_registry_from_dir",
    "parse_algorithm_id",
    "symmetric_decryption",
    "symmetric_encryption",
    "symmetric_interop",
    "symmetric_interop_decryption",
    "validate_whitelisted",
]
