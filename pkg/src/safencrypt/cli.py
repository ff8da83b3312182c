"""safencrypt command line.

    safencrypt encrypt --in msg.txt --gen-key --key-out msg.key > msg.json
    safencrypt decrypt --in msg.json --key "$(cat msg.key)"
    safencrypt encrypt --in big.bin --out big.enc --format raw --password-stdin
    safencrypt algorithms
    safencrypt config --config-dir ./my-config

Exit status: 0 on success, 1 on a coded error (rendered on stderr), 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import base64
import binascii
import json
import logging
import os
import string
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence, Union

from . import step_builder, streaming
from .config_registry import (
    CONFIG_ENV_VAR,
    Registry,
    as_algorithm,
    default_registry,
    interop_profile,
    load_registry_from_dir,
    validate_whitelisted,
)
from .error_mapping import DecodeError, SafError
from .key_material import derive_key, generate_key

FORMATS = ("base64", "hex", "raw")
META_SUFFIX = ".meta.json"

_B64_ALPHABET = frozenset(string.ascii_letters + string.digits + "+/")
_HEX_ALPHABET = frozenset(string.hexdigits)


class UsageError(Exception):
    pass


def encode_output(data: bytes, fmt: str) -> Union[str, bytes]:
    if fmt == "base64":
        return base64.b64encode(data).decode("ascii")
    if fmt == "hex":
        return data.hex()
    if fmt == "raw":
        return bytes(data)
    raise ValueError(f"unknown format {fmt!r}")


def decode_input(text: Union[str, bytes], fmt: str) -> bytes:
    """Inverse of :func:`encode_output`; malformed input raises DecodeError with its offset."""
    if fmt == "raw":
        return bytes(text)
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise DecodeError(encoding=fmt, offset=exc.start, reason="non-ASCII byte") from None
    if fmt == "hex":
        for i, c in enumerate(text):
            if c not in _HEX_ALPHABET:
                raise DecodeError(encoding=fmt, offset=i, reason=f"illegal character {c!r}")
        if len(text) % 2:
            raise DecodeError(encoding=fmt, offset=len(text), reason="odd number of digits")
        return bytes.fromhex(text)
    if fmt == "base64":
        pad_start = None
        for i, c in enumerate(text):
            if c == "=":
                if pad_start is None:
                    pad_start = i
            elif c not in _B64_ALPHABET or pad_start is not None:
                raise DecodeError(encoding=fmt, offset=i, reason=f"illegal character {c!r}")
        if len(text) % 4 or (pad_start is not None and len(text) - pad_start > 2):
            raise DecodeError(encoding=fmt, offset=len(text), reason="incorrect padding")
        try:
            return base64.b64decode(text, validate=True)
        except binascii.Error as exc:
            raise DecodeError(encoding=fmt, offset=len(text), reason=str(exc)) from None
    raise ValueError(f"unknown format {fmt!r}")


def _flag_format(fmt: str) -> str:
    # secrets on the command line or in envelopes are text; raw falls back to base64
    return "base64" if fmt == "raw" else fmt


# -- I/O helpers -------------------------------------------------------------


def _read_input(path: Optional[str]) -> bytes:
    if path in (None, "-"):
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_output(path: Optional[str], data: Union[str, bytes]) -> None:
    if isinstance(data, str):
        data = (data + "\n").encode("utf-8")
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _write_secret(path: str, text: str) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w") as fh:
        fh.write(text + "\n")


def _password(args) -> Optional[str]:
    if getattr(args, "password_stdin", False):
        line = sys.stdin.readline()
        return line.rstrip("\r\n")
    if getattr(args, "password", None) is not None:
        print(
            "warning: --password is visible in the process list; prefer --password-stdin",
            file=sys.stderr,
        )
        return args.password
    return None


def _registry(args) -> Registry:
    config_dir = args.config_dir or os.environ.get(CONFIG_ENV_VAR)
    if config_dir:
        return load_registry_from_dir(config_dir)
    return default_registry()


def _algorithm_and_constraints(args, reg: Registry):
    if getattr(args, "interop", None):
        prof = interop_profile(args.interop, reg)
        return prof.default_algorithm, prof.constraints
    alg = validate_whitelisted(args.alg, reg) if args.alg else reg.default_algorithm
    return alg, reg.constraints[alg.mode_key]


def _envelope(alg, iv: bytes, ct: Optional[bytes], salt: Optional[bytes], fmt: str) -> dict:
    env = {"alg": str(alg), "iv": encode_output(iv, fmt)}
    if ct is not None:
        env["ct"] = encode_output(ct, fmt)
    if salt is not None:
        env["salt"] = encode_output(salt, fmt)
    return env


# -- commands ----------------------------------------------------------------


def _encrypt_start(args, reg: Registry):
    if args.interop:
        return step_builder.symmetric_interop(args.interop, registry=reg)
    return step_builder.symmetric_encryption(args.alg, registry=reg)


def _bind_encryption_key(args, start, reg: Registry):
    flag_fmt = _flag_format(args.format)
    if args.gen_key:
        if not args.key_out:
            raise UsageError("--gen-key needs --key-out PATH to store the generated key")
        bound = start.generate_key()
        _write_secret(args.key_out, encode_output(bound._state.key.data, flag_fmt))
        return bound
    if args.key is not None:
        return start.key(decode_input(args.key, flag_fmt))
    return start.password(_password(args))


def _check_stdin_use(args) -> None:
    if getattr(args, "password_stdin", False) and args.in_path in (None, "-"):
        raise UsageError("--password-stdin cannot be combined with data on stdin; use --in PATH")


def cmd_encrypt(args) -> int:
    _check_stdin_use(args)
    if args.format == "raw" and args.out in (None, "-"):
        raise UsageError("--format raw needs --out PATH (metadata goes to PATH.meta.json)")
    reg = _registry(args)
    start = _encrypt_start(args, reg)
    bound = _bind_encryption_key(args, start, reg)
    state = bound._state
    salt = state.pbe.salt if state.pbe is not None else None

    if args.format == "raw":
        job = streaming.StreamJob(state.algorithm, state.key, streaming.ENCRYPT, constraints=state.constraints)
        with _open_in(args.in_path) as src, open(args.out, "wb") as dst:
            res = streaming.encrypt_stream(job, src, dst, reg)
        meta = _envelope(res.algorithm, res.iv, None, salt, "base64")
        Path(args.out + META_SUFFIX).write_text(json.dumps(meta, indent=2) + "\n")
        return 0

    result = bound.plaintext(_read_input(args.in_path)).encrypt()
    env = _envelope(result.algorithm, result.iv, result.ciphertext, salt, args.format)
    _write_output(args.out, json.dumps(env))
    return 0


@contextmanager
def _open_in(path: Optional[str]):
    if path in (None, "-"):
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as fh:
            yield fh


def _load_meta(args) -> dict:
    if args.format == "raw":
        if args.in_path in (None, "-"):
            meta_path = None
        else:
            meta_path = Path(args.in_path + META_SUFFIX)
        if meta_path is not None and meta_path.is_file():
            return json.loads(meta_path.read_text())
        return {}
    raw = _read_input(args.in_path)
    try:
        env = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UsageError(f"--in is not a JSON envelope: {exc}") from None
    if not isinstance(env, dict) or "ct" not in env:
        raise UsageError("--in envelope must be an object with 'alg', 'iv' and 'ct'")
    return env


def cmd_decrypt(args) -> int:
    _check_stdin_use(args)
    reg = _registry(args)
    meta = _load_meta(args)
    env_fmt = "base64" if args.format == "raw" else args.format
    flag_fmt = _flag_format(args.format)

    if args.interop:
        start = step_builder.symmetric_interop_decryption(args.interop, registry=reg)
    else:
        alg_text = args.alg or meta.get("alg")
        if args.alg and meta.get("alg") and as_algorithm(args.alg) != as_algorithm(meta["alg"]):
            raise UsageError(f"--alg {args.alg} disagrees with the envelope algorithm {meta['alg']}")
        start = step_builder.symmetric_decryption(alg_text, registry=reg)

    if args.iv is not None:
        iv = decode_input(args.iv, flag_fmt)
    elif "iv" in meta:
        iv = decode_input(meta["iv"], env_fmt)
    else:
        raise UsageError("--iv is required when no envelope/metadata carries the IV")

    if args.key is not None:
        bound = start.key(decode_input(args.key, flag_fmt))
    else:
        password = _password(args)
        if args.salt is not None:
            salt = decode_input(args.salt, flag_fmt)
        elif "salt" in meta:
            salt = decode_input(meta["salt"], env_fmt)
        else:
            raise UsageError("--salt is required for password decryption without a stored salt")
        bound = start.password(password, salt)

    iv_bound = bound.iv(iv)
    state = iv_bound._state
    if args.format == "raw":
        job = streaming.StreamJob(state.algorithm, state.key, streaming.DECRYPT, state.iv, constraints=state.constraints)
        if args.out in (None, "-"):
            with _open_in(args.in_path) as src:
                streaming.decrypt_stream(job, src, sys.stdout.buffer, reg)
        else:
            with _open_in(args.in_path) as src, open(args.out, "wb") as dst:
                streaming.decrypt_stream(job, src, dst, reg)
        return 0

    plain = iv_bound.cipher_text(decode_input(meta["ct"], env_fmt)).decrypt()
    _write_output(args.out, plain)
    return 0


def cmd_keygen(args) -> int:
    reg = _registry(args)
    alg, _ = _algorithm_and_constraints(args, reg)
    key = generate_key(alg, reg)
    _write_output(args.out, encode_output(key.data, _flag_format(args.format)))
    return 0


def cmd_derive_key(args) -> int:
    reg = _registry(args)
    alg, _ = _algorithm_and_constraints(args, reg)
    fmt = _flag_format(args.format)
    salt = decode_input(args.salt, fmt) if args.salt is not None else None
    pbe = derive_key(_password(args), alg, reg, salt=salt, prf=args.prf)
    out = {
        "alg": str(alg),
        "key": encode_output(pbe.key.data, fmt),
        "salt": encode_output(pbe.salt, fmt),
        "prf": pbe.prf,
        "iterations": pbe.iterations,
    }
    _write_output(args.out, json.dumps(out))
    return 0


def cmd_algorithms(args) -> int:
    reg = _registry(args)
    for alg in reg.whitelist:
        print(alg)
    return 0


def cmd_config(args) -> int:
    reg = _registry(args)
    print(json.dumps(reg.to_dict(), indent=2))
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config-dir", help=f"directory with override JSON configs (env: {CONFIG_ENV_VAR})")

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=FORMATS, default="base64")

    io = argparse.ArgumentParser(add_help=False)
    io.add_argument("--in", dest="in_path", metavar="PATH", help="input file, '-' for stdin")
    io.add_argument("--out", metavar="PATH", help="output file, '-' for stdout")

    alg = argparse.ArgumentParser(add_help=False)
    sel = alg.add_mutually_exclusive_group()
    sel.add_argument("--alg", metavar="ID", help="algorithm id, e.g. AES_GCM_256_NoPadding")
    sel.add_argument("--interop", metavar="PROFILE", help="interoperability profile, e.g. Python")

    parser = argparse.ArgumentParser(prog="safencrypt", description="Misuse-resistant symmetric encryption")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encrypt", parents=[common, fmt, io, alg], help="encrypt data or a file")
    src = enc.add_mutually_exclusive_group(required=True)
    src.add_argument("--key", help="existing key (encoded per --format)")
    src.add_argument("--password")
    src.add_argument("--password-stdin", action="store_true", help="read the password from stdin")
    src.add_argument("--gen-key", action="store_true", help="generate a fresh key")
    enc.add_argument("--key-out", metavar="PATH", help="where --gen-key stores the key (mode 0600)")
    enc.set_defaults(func=cmd_encrypt)

    dec = sub.add_parser("decrypt", parents=[common, fmt, io, alg], help="decrypt an envelope or raw file")
    src = dec.add_mutually_exclusive_group(required=True)
    src.add_argument("--key")
    src.add_argument("--password")
    src.add_argument("--password-stdin", action="store_true")
    dec.add_argument("--salt", help="salt for password decryption if not stored with the ciphertext")
    dec.add_argument("--iv", help="IV if not stored with the ciphertext")
    dec.set_defaults(func=cmd_decrypt)

    kg = sub.add_parser("keygen", parents=[common, fmt, alg], help="print a fresh random key")
    kg.add_argument("--out", metavar="PATH")
    kg.set_defaults(func=cmd_keygen)

    dk = sub.add_parser("derive-key", parents=[common, fmt, alg], help="derive a key from a password")
    src = dk.add_mutually_exclusive_group(required=True)
    src.add_argument("--password")
    src.add_argument("--password-stdin", action="store_true")
    dk.add_argument("--salt")
    dk.add_argument("--prf", help="PBKDF2 variant, e.g. PBKDF2WithHmacSHA256")
    dk.add_argument("--out", metavar="PATH")
    dk.set_defaults(func=cmd_derive_key)

    al = sub.add_parser("algorithms", parents=[common], help="list whitelisted algorithms")
    al.set_defaults(func=cmd_algorithms)

    cf = sub.add_parser("config", parents=[common], help="validate and print the configuration")
    cf.set_defaults(func=cmd_config)
    return parser


LOG_FORMAT = "[%(threadName)s] %(levelname)s %(name)s - %(message)s"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # library warnings (SAF_011) go to stderr for the duration of the command
    log = logging.getLogger("safencrypt")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    log.addHandler(handler)
    propagate, log.propagate = log.propagate, False
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"safencrypt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except SafError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"safencrypt {args.command}: {exc}", file=sys.stderr)
        return 1
    finally:
        log.removeHandler(handler)
        log.propagate = propagate


if __name__ == "__main__":
    sys.exit(main())
