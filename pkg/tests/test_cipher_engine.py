import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from safencrypt import cipher_engine as ce
from safencrypt.config_registry import ModeConstraints, parse_algorithm_id
from safencrypt.error_mapping import (
    CiphertextLengthError,
    DecryptionError,
    IvLengthError,
    KeyLengthError,
    NotWhitelistedError,
)
from vectors import CBC_VECTORS, GCM_VECTORS

WHITELIST = [
    "AES_CBC_128_PKCS5Padding", "AES_CBC_192_PKCS5Padding", "AES_CBC_256_PKCS5Padding",
    "AES_CBC_128_PKCS7Padding", "AES_CBC_192_PKCS7Padding", "AES_CBC_256_PKCS7Padding",
    "AES_GCM_128_NoPadding", "AES_GCM_192_NoPadding", "AES_GCM_256_NoPadding",
]
GCM96 = ModeConstraints(12, 96)


def expected_len(alg, n):
    return n + 12 if "GCM" in alg else 16 * (n // 16) + 16


class TestPadding:
    def test_pad_11(self):
        out = ce.pad_pkcs7(b"x" * 11)
        assert len(out) == 16 and out.endswith(b"\x05" * 5)

    def test_pad_16(self):
        out = ce.pad_pkcs7(b"x" * 16)
        assert len(out) == 32 and out.endswith(b"\x10" * 16)

    def test_unpad_zero(self):
        with pytest.raises(ce.InvalidPaddingError):
            ce.unpad_pkcs7(b"x" * 15 + b"\x00")

    @pytest.mark.parametrize("data", [b"", b"x" * 15, b"x" * 17])
    def test_unpad_bad_length(self, data):
        with pytest.raises(ce.InvalidPaddingError):
            ce.unpad_pkcs7(data)

    @pytest.mark.parametrize("tail", [b"\x11", b"\x03\x03\x02", b"\x02\x01\x02"])
    def test_unpad_malformed(self, tail):
        with pytest.raises(ce.InvalidPaddingError):
            ce.unpad_pkcs7(b"a" * (16 - len(tail)) + tail)

    @given(st.binary(max_size=100))
    def test_round_trip(self, data):
        padded = ce.pad_pkcs7(data)
        assert len(padded) % 16 == 0 and 1 <= len(padded) - len(data) <= 16
        assert set(padded[len(data):]) == {len(padded) - len(data)}
        assert ce.unpad_pkcs7(padded) == data


class TestKnownAnswers:
    @pytest.mark.parametrize(
        "bits,vec", [(b, v) for b, vs in CBC_VECTORS.items() for v in vs], ids=lambda v: getattr(v, "name", str(v))
    )
    @pytest.mark.parametrize("padding", ["PKCS5Padding", "PKCS7Padding"])
    def test_cbc(self, registry, bits, vec, padding):
        alg = parse_algorithm_id(f"AES_CBC_{bits}_{padding}")
        key, iv, pt = (bytes.fromhex(x) for x in (vec.key, vec.iv, vec.plaintext))
        ct = ce._seal(alg, key, iv, pt, registry.constraints["AES_CBC"])
        # published vectors are unpadded; the extra final block is the PKCS#7 block
        assert ct[: len(pt)].hex() == vec.ciphertext
        assert len(ct) == len(pt) + 16
        assert ce.decrypt(alg, key, iv, ct, registry) == pt

    @pytest.mark.parametrize(
        "bits,vec", [(b, v) for b, vs in GCM_VECTORS.items() for v in vs], ids=lambda v: getattr(v, "name", str(v))
    )
    def test_gcm(self, registry, bits, vec):
        alg = parse_algorithm_id(f"AES_GCM_{bits}_NoPadding")
        key, iv, pt = (bytes.fromhex(x) for x in (vec.key, vec.iv, vec.plaintext))
        ct = ce._seal(alg, key, iv, pt, GCM96)
        assert ct.hex() == vec.ciphertext + vec.tag[:24]
        assert ce.decrypt(alg, key, iv, ct, registry) == pt

    def test_gcm_full_tag(self, registry):
        vec = GCM_VECTORS[128][2]
        alg = parse_algorithm_id("AES_GCM_128_NoPadding")
        key, iv, pt = (bytes.fromhex(x) for x in (vec.key, vec.iv, vec.plaintext))
        ct = ce._seal(alg, key, iv, pt, ModeConstraints(12, 128))
        assert ct.hex() == vec.ciphertext + vec.tag


class TestEncrypt:
    def test_hello_cbc(self, registry):
        r = ce.encrypt("AES_CBC_128_PKCS5Padding", os.urandom(16), b"Hello World", registry)
        assert len(r.ciphertext) == 16 and len(r.iv) == 16

    def test_hello_gcm(self, registry):
        r = ce.encrypt("AES_GCM_128_NoPadding", os.urandom(16), b"Hello World", registry)
        assert len(r.ciphertext) == 23 and len(r.iv) == 12

    @pytest.mark.parametrize("alg", WHITELIST)
    @pytest.mark.parametrize("n", [0, 1, 15, 16, 17, 31, 32, 33, 1024])
    def test_lengths_and_round_trip(self, registry, alg, n):
        a = parse_algorithm_id(alg)
        pt = os.urandom(n)
        r = ce.encrypt(alg, os.urandom(a.key_bytes), pt, registry)
        assert len(r.ciphertext) == expected_len(alg, n)
        assert ce.decrypt(alg, r.key, r.iv, r.ciphertext, registry) == pt

    def test_iv_generation(self, registry):
        assert len(ce.generate_iv("AES_CBC_128_PKCS5Padding", registry)) == 16
        assert len(ce.generate_iv("AES_GCM_256_NoPadding", registry)) == 12
        assert ce.generate_iv("AES_GCM_256_NoPadding", registry) != ce.generate_iv("AES_GCM_256_NoPadding", registry)

    def test_iv_not_whitelisted(self, registry):
        with pytest.raises(NotWhitelistedError):
            ce.generate_iv("AES_ECB_128_NoPadding", registry)

    def test_key_length(self, registry):
        with pytest.raises(KeyLengthError):
            ce.encrypt("AES_GCM_256_NoPadding", b"k" * 16, b"x", registry)

    def test_not_whitelisted(self, registry):
        with pytest.raises(NotWhitelistedError):
            ce.encrypt("AES_ECB_128_NoPadding", b"k" * 16, b"x", registry)

    @pytest.mark.parametrize("bits", [128, 192, 256])
    def test_pkcs5_pkcs7_interchangeable(self, registry, bits):
        key, iv, pt = os.urandom(bits // 8), os.urandom(16), os.urandom(37)
        c5 = ce._seal(parse_algorithm_id(f"AES_CBC_{bits}_PKCS5Padding"), key, iv, pt, None)
        c7 = ce._seal(parse_algorithm_id(f"AES_CBC_{bits}_PKCS7Padding"), key, iv, pt, None)
        assert c5 == c7
        assert ce.decrypt(f"AES_CBC_{bits}_PKCS5Padding", key, iv, c7, registry) == pt


class TestDecryptFailures:
    def test_cbc_wrong_key(self, registry):
        alg = "AES_CBC_128_PKCS5Padding"
        r = ce.encrypt(alg, os.urandom(16), b"Hello World", registry)
        # a wrong key occasionally yields valid-looking padding; try until it does not
        for _ in range(50):
            try:
                ce.decrypt(alg, os.urandom(16), r.iv, r.ciphertext, registry)
            except DecryptionError as exc:
                assert exc.backend[0].endswith("InvalidPaddingError")
                assert exc.backend[1].startswith("Given final block not properly padded")
                return
        pytest.fail("wrong key never produced a padding failure")

    @pytest.mark.parametrize("alg", ["AES_GCM_128_NoPadding", "AES_GCM_256_NoPadding"])
    def test_gcm_every_bit_flip(self, registry, alg):
        a = parse_algorithm_id(alg)
        r = ce.encrypt(alg, os.urandom(a.key_bytes), b"attack at dawn!", registry)
        for i in range(len(r.ciphertext) * 8):
            bad = bytearray(r.ciphertext)
            bad[i // 8] ^= 1 << (i % 8)
            with pytest.raises(DecryptionError):
                ce.decrypt(alg, r.key, r.iv, bytes(bad), registry)
        for i in range(len(r.iv) * 8):
            bad = bytearray(r.iv)
            bad[i // 8] ^= 1 << (i % 8)
            with pytest.raises(DecryptionError):
                ce.decrypt(alg, r.key, bytes(bad), r.ciphertext, registry)

    def test_gcm_truncated_tag(self, registry):
        r = ce.encrypt("AES_GCM_128_NoPadding", os.urandom(16), b"x" * 20, registry)
        with pytest.raises(DecryptionError):
            ce.decrypt("AES_GCM_128_NoPadding", r.key, r.iv, r.ciphertext[:-1], registry)

    def test_iv_length(self, registry):
        with pytest.raises(IvLengthError) as exc:
            ce.decrypt("AES_GCM_128_NoPadding", b"k" * 16, b"i" * 16, b"c" * 20, registry)
        assert "[16]" in str(exc.value) and "exact [12]" in str(exc.value)

    @pytest.mark.parametrize("alg,n", [("AES_CBC_128_PKCS5Padding", 0), ("AES_CBC_128_PKCS5Padding", 17),
                                       ("AES_GCM_128_NoPadding", 11)])
    def test_ciphertext_length(self, registry, alg, n):
        iv = b"i" * (16 if "CBC" in alg else 12)
        with pytest.raises(CiphertextLengthError):
            ce.decrypt(alg, b"k" * 16, iv, b"c" * n, registry)

    def test_result_repr_redacted(self, registry):
        key = bytes.fromhex("00112233445566778899aabbccddeeff")
        r = ce.encrypt("AES_GCM_128_NoPadding", key, b"secret", registry)
        assert key.hex() not in repr(r) and "\\x" not in repr(r)


@given(alg=st.sampled_from(WHITELIST), data=st.binary(max_size=300))
def test_round_trip_property(registry, alg, data):
    key = os.urandom(parse_algorithm_id(alg).key_bytes)
    r = ce.encrypt(alg, key, data, registry)
    assert len(r.ciphertext) == expected_len(alg, len(data))
    assert ce.decrypt(alg, key, r.iv, r.ciphertext, registry) == data
