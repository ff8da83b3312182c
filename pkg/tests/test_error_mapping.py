import pathlib
import re

import pytest

from safencrypt.error_mapping import (
    CATCH_ALL_CODE,
    BackendFailure,
    DecryptionError,
    InvalidKeyError,
    KeyLengthError,
    Phase,
    SafError,
    TemplateArityError,
    default_catalog,
    known_codes,
    map_backend_error,
    render,
    render_warning,
)

SRC = pathlib.Path(__file__).resolve().parents[1] / "src" / "safencrypt"

LOG2 = (
    "[javax.crypto.BadPaddingException: Given final block not properly padded. Such issues can arise if a bad "
    "key is used during decryption.] | [SAF_010 : Either the Mode/Key/IV/Padding used for encryption was "
    "different than provided for decryption]"
)
SAF_010_BARE = (
    "[SAF_010 : Either the Mode/Key/IV/Padding used for encryption was different than provided for decryption]"
)
TWO_PART = re.compile(r"^\[([^\]]+): (.*)\] \| \[(SAF_\d{3}) : (.*)\]$")
ONE_PART = re.compile(r"^\[(SAF_\d{3}) : (.*)\]$")


def test_log2_exact():
    err = map_backend_error(
        "javax.crypto.BadPaddingException",
        "Given final block not properly padded. Such issues can arise if a bad key is used during decryption.",
        Phase.DECRYPT,
    )
    assert isinstance(err, DecryptionError)
    assert render(err) == LOG2 == str(err)


@pytest.mark.parametrize(
    "cls",
    [
        "cryptography.exceptions.InvalidTag",
        "javax.crypto.AEADBadTagException",
        "javax.crypto.IllegalBlockSizeException",
        "safencrypt.cipher_engine.InvalidPaddingError",
    ],
)
def test_decrypt_failures_map_to_010(cls):
    err = map_backend_error(cls, "anything", "decrypt")
    assert err.code == "SAF_010"
    assert err.backend == (cls, "anything")


def test_padding_outside_decrypt_is_not_010():
    assert map_backend_error("javax.crypto.BadPaddingException", "x", Phase.ENCRYPT).code == CATCH_ALL_CODE


def test_catch_all_preserves_backend():
    err = map_backend_error("weird.Error", "x", Phase.ENCRYPT)
    assert isinstance(err, BackendFailure)
    assert err.code == "SAF_099"
    assert str(err) == "[weird.Error: x] | [SAF_099 : Unexpected failure during encrypt]"


@pytest.mark.parametrize(
    "msg", ["Illegal key size", "Invalid AES key length: 23 bytes", "Key length not 128/192/256 bits"]
)
def test_key_messages(msg):
    err = map_backend_error("java.security.InvalidKeyException", msg, Phase.KEY)
    assert isinstance(err, InvalidKeyError)
    full = map_backend_error(
        "java.security.InvalidKeyException", msg, Phase.KEY,
        key_length=23, algorithm="AES_GCM_256_NoPadding", expected_length=32,
    )
    assert isinstance(full, KeyLengthError)
    assert full.message.startswith("Provided Key With Length [23]")


def test_mapping_is_pure():
    args = ("x.Y", "m", Phase.DECRYPT)
    assert str(map_backend_error(*args)) == str(map_backend_error(*args))


def test_render_saf_003():
    err = KeyLengthError(key_length=23, algorithm="AES_GCM_256_NoPadding", expected_length=32)
    assert render(err) == (
        "[SAF_003 : Provided Key With Length [23] bytes is not compatible with selected algorithm "
        "[AES_GCM_256_NoPadding], it should be exact [32] bytes long]"
    )


def test_render_saf_011():
    assert render_warning("AES", "CBC") == (
        "[SAF_011 : Usage of Algorithm [AES/CBC] is insecure in client-server architecture]"
    )


def test_render_saf_010_bare():
    assert render(DecryptionError()) == SAF_010_BARE


def test_template_arity():
    with pytest.raises(TemplateArityError):
        KeyLengthError(key_length=23)


def test_shapes():
    assert ONE_PART.match(str(DecryptionError()))
    assert TWO_PART.match(LOG2)


def test_catalog_closure():
    used = set()
    for path in SRC.rglob("*.py"):
        used |= set(re.findall(r"SAF_\d{3}", path.read_text()))
    catalog = set(default_catalog())
    assert used <= catalog
    assert catalog == set(known_codes())


def test_codes_are_unique_per_class():
    codes = {}
    for cls in SafError.__subclasses__():
        if "code" in cls.__dict__:
            assert codes.setdefault(cls.code, cls) is cls


def test_codes_format():
    assert all(re.fullmatch(r"SAF_\d{3}", c) for c in default_catalog())
