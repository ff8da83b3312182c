#!/usr/bin/env python3
"""Walk through the three everyday tasks: text, password-based and file encryption."""

import argparse
import os
import tempfile
from pathlib import Path

from safencrypt import SafEncrypt, StreamJob, decrypt_stream, encrypt_stream


def text_task(message: str) -> None:
    enc = SafEncrypt.symmetric_encryption().generate_key().plaintext(message).encrypt()
    dec = SafEncrypt.symmetric_decryption().key(enc.key).iv(enc.iv).cipher_text(enc.ciphertext).decrypt()
    print(f"text:     {enc.algorithm}  ct={enc.ciphertext.hex()[:32]}...  ok={dec.decode() == message}")


def password_task(password: str, message: str) -> None:
    enc = SafEncrypt.symmetric_encryption().password(password).plaintext(message).encrypt()
    dec = (
        SafEncrypt.symmetric_decryption()
        .password(password, enc.salt)
        .iv(enc.iv)
        .cipher_text(enc.ciphertext)
        .decrypt()
    )
    print(f"password: {enc.algorithm}  salt={len(enc.salt)}B  prf={enc.pbe.prf}  ok={dec.decode() == message}")


def file_task(size: int) -> None:
    key = SafEncrypt.symmetric_encryption().generate_key().plaintext(b"").encrypt().key
    with tempfile.TemporaryDirectory() as d:
        src, enc, out = (Path(d) / n for n in ("in", "enc", "out"))
        src.write_bytes(os.urandom(size))
        with src.open("rb") as fi, enc.open("wb") as fo:
            res = encrypt_stream(StreamJob.encrypting(key.bound_algorithm, key), fi, fo)
        with enc.open("rb") as fi, out.open("wb") as fo:
            decrypt_stream(StreamJob.decrypting(res.algorithm, key, res.iv), fi, fo)
        print(f"file:     {res.algorithm}  {res.plaintext_bytes}B -> {res.ciphertext_bytes}B  "
              f"ok={out.read_bytes() == src.read_bytes()}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--message", default="Hello World")
    ap.add_argument("--password", default="correct horse battery staple")
    ap.add_argument("--file-bytes", type=int, default=1 << 20)
    args = ap.parse_args()
    text_task(args.message)
    password_task(args.password, args.message)
    file_task(args.file_bytes)


if __name__ == "__main__":
    main()
