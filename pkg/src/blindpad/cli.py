"""Command line entry point: ``blindpad deal|encrypt|serve|fetch|verify``.

Exit codes: 0 success, 1 verification failed, 2 protocol error,
3 single-use violation, 4 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import keystore, net, protocol, verifier
from .errors import (
    BlindPadError,
    CapacityError,
    InvalidModulusError,
    KeystoreError,
    SingleUseViolation,
    VerificationBoundError,
)
from .numcore import RandomSource
from .params import parse_prime
from .wire import encode_frame

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PROTOCOL = 2
EXIT_SINGLE_USE = 3
EXIT_VALIDATION = 4

KEYSTORE_NAMES = {role: f"{role}.keys" for role in keystore.ROLES}


def _rng(seed: int | None) -> RandomSource:
    # --seed is for reproducible tests only; real keys need OS entropy
    return RandomSource(seed)


def cmd_deal(args: argparse.Namespace) -> int:
    p = parse_prime(args.p)
    material, _ = protocol.dealer_issue(p, args.l, _rng(args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = keystore.records_from_material(material)
    for role, record in records.items():
        keystore.keystore_save(record, out / KEYSTORE_NAMES[role])
    print(f"session {material.session_id.hex()}")
    print(f"p = {p.p} (plaintext {p.plaintext_bits} bits, ciphertext {p.ciphertext_bits} bits)")
    print(f"L = {material.L}")
    print(f"decryptor key bits: {records['decryptor'].key_bits}")
    print(f"wrote {', '.join(KEYSTORE_NAMES.values())} to {out}")
    return EXIT_OK


def _parse_messages(text: str) -> list[int]:
    try:
        return [int(part, 10) for part in text.split(",")]
    except ValueError:
        raise KeystoreError(f"messages must be comma separated decimals: {text!r}") from None


def cmd_encrypt(args: argparse.Namespace) -> int:
    path = Path(args.keys)
    record = keystore.keystore_load(path)
    if record.role != "encryptor":
        raise KeystoreError(f"encrypt needs an encryptor keystore, got {record.role}")
    msgs = _parse_messages(args.messages)
    if any(not 0 <= m < record.p.p for m in msgs):
        raise KeystoreError(f"messages must lie in [0, {record.p.p})")
    view = record.to_view()
    batch = protocol.encryptor_publish(view, msgs, _rng(args.seed))
    # mark the key spent before the batch leaves this process
    keystore.keystore_save(record.with_consumed(), path)
    Path(args.out).write_bytes(encode_frame(batch, record.p))
    print(f"wrote {len(batch.values)} ciphertexts to {args.out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    host, port = net.parse_address(args.listen)
    server = net.DecryptorServer((host, port), args.keys)
    print(f"listening on {server.address}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def cmd_fetch(args: argparse.Namespace) -> int:
    record = keystore.keystore_load(args.keys)
    batch = Path(args.batch).read_bytes()
    m = net.fetch(record, batch, args.choose, net.parse_address(args.server))
    print(m)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    kwargs = {} if args.variant is None else {"variant": args.variant}
    if args.definition == "encryptor":
        if args.l is None:
            raise VerificationBoundError("--l is required for the encryptor check")
        report = verifier.verify_leakfree_encryptor(args.p, args.l, **kwargs)
    else:
        report = verifier.VERIFIERS[args.definition](args.p, **kwargs)
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n")
    print(report.to_text())
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blindpad", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    deal = sub.add_parser("deal", help="mint key material for one session")
    deal.add_argument("--p", required=True, help="decimal prime or preset:<name>, e.g. preset:2^61-1")
    deal.add_argument("--l", type=int, required=True, help="batch size L (1 <= L <= p-1)")
    deal.add_argument("--out", required=True, help="directory for the four keystore files")
    deal.add_argument("--seed", type=int, help=argparse.SUPPRESS)
    deal.set_defaults(func=cmd_deal)

    enc = sub.add_parser("encrypt", help="publish the encrypted batch")
    enc.add_argument("--keys", required=True)
    enc.add_argument("--messages", required=True, help="m1,...,mL")
    enc.add_argument("--out", required=True)
    enc.add_argument("--seed", type=int, help=argparse.SUPPRESS)
    enc.set_defaults(func=cmd_encrypt)

    serve = sub.add_parser("serve", help="run the Decryptor")
    serve.add_argument("--keys", required=True)
    serve.add_argument("--listen", required=True, help="host:port (port 0 picks a free port)")
    serve.set_defaults(func=cmd_serve)

    fetch = sub.add_parser("fetch", help="blindly decrypt one ciphertext of the batch")
    fetch.add_argument("--keys", required=True)
    fetch.add_argument("--batch", required=True)
    fetch.add_argument("--choose", type=int, required=True, help="1-based index i")
    fetch.add_argument("--server", required=True, help="host:port")
    fetch.set_defaults(func=cmd_fetch)

    verify = sub.add_parser("verify", help="exact secrecy check by enumeration")
    verify.add_argument("--definition", required=True, choices=sorted(verifier.VERIFIERS))
    verify.add_argument("--p", type=int, required=True, help="prime p (modulus n for shannon)")
    verify.add_argument("--l", type=int)
    verify.add_argument("--variant", help="shipped (default) or a deliberately broken variant")
    verify.add_argument("--json", help="also write the report as JSON to this path")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except SingleUseViolation as exc:
        print(f"blindpad: single-use violation: {exc}", file=sys.stderr)
        return EXIT_SINGLE_USE
    except (KeystoreError, InvalidModulusError, CapacityError, VerificationBoundError, KeyError) as exc:
        print(f"blindpad: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BlindPadError, OSError, ValueError) as exc:
        print(f"blindpad: protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
