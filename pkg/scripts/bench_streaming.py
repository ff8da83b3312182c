#!/usr/bin/env python3
"""Throughput of streaming encryption/decryption across chunk sizes."""

import argparse
import io
import os
import time

from safencrypt import StreamJob, decrypt_stream, encrypt_stream, generate_key


def bench(alg: str, data: bytes, chunk: int) -> tuple:
    key = generate_key(alg)
    sink = io.BytesIO()
    t0 = time.perf_counter()
    res = encrypt_stream(StreamJob.encrypting(alg, key, chunk_bytes=chunk), io.BytesIO(data), sink)
    t1 = time.perf_counter()
    out = io.BytesIO()
    decrypt_stream(StreamJob.decrypting(alg, key, res.iv, chunk_bytes=chunk), io.BytesIO(sink.getvalue()), out)
    t2 = time.perf_counter()
    assert out.getvalue() == data
    return t1 - t0, t2 - t1


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mib", type=int, default=16)
    ap.add_argument("--chunks", type=int, nargs="+", default=[16, 4096, 65536, 1 << 20])
    ap.add_argument("--alg", nargs="+", default=["AES_GCM_128_NoPadding", "AES_CBC_256_PKCS7Padding"])
    args = ap.parse_args()
    data = os.urandom(args.mib << 20)
    print(f"{'algorithm':<26} {'chunk':>8} {'enc MiB/s':>10} {'dec MiB/s':>10}")
    for alg in args.alg:
        for chunk in args.chunks:
            enc, dec = bench(alg, data, chunk)
            print(f"{alg:<26} {chunk:>8} {args.mib / enc:>10.1f} {args.mib / dec:>10.1f}")


if __name__ == "__main__":
    main()
