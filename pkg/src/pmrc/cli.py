"""pmrc command line: parameter calculator, file codec, secrecy audit and cluster simulation.

Exit codes: 0 success, 1 secrecy violation, 2 usage error, 3 I/O or corruption,
4 leakage from an adversary stronger than the code was designed for.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, cluster_sim, fileio
from .errors import (ConfigError, CorruptShare, DuplicateShare, FormatError, NotEnoughHelpers,
                     NotEnoughShares, PMRCError, SecrecyViolation, TooLargeForBruteForce)
from .gf import SeededSource, SystemSource
from .params import Mode, cutset_bound, make_params, secrecy_bound, secure_counts, select_modulus
from .pm_codes import Padding
from .secrecy_audit import (DEFAULT_BUDGET, EavesdropperSpec, audit_all, brute_force_leakage)
from .secure import build_code

EXIT_OK, EXIT_LEAK, EXIT_USAGE, EXIT_IO, EXIT_BY_DESIGN = 0, 1, 2, 3, 4


def _node_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated node ids, got {text!r}") from None


def _code_flags(p: argparse.ArgumentParser, q_default=None):
    p.add_argument("--mode", choices=[m.value for m in Mode], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--ell-prime", type=int, default=0)
    p.add_argument("--q", type=int, default=q_default, help="field size (prime)")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PMRC_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"PMRC_SEED must be an integer, got {env!r}") from None


def _code_from_manifest(m: fileio.Manifest):
    return build_code(m.mode, m.n, m.k, m.d, m.ell, m.ell_prime, q=m.q, points=m.points)


def _read_shares(manifest, code, paths) -> dict[int, np.ndarray]:
    """node id -> stripes x alpha array; rejects duplicates."""
    out = {}
    for path in paths:
        node, data = fileio.parse_share(manifest, Path(path).read_bytes(), code.alpha)
        if node in out:
            raise DuplicateShare(f"two share files for node {node}")
        out[node] = data
    return out


def _expand_share_args(items) -> list[Path]:
    paths = []
    for item in items:
        p = Path(item)
        paths.extend(sorted(p.glob("share_*.pmrc")) if p.is_dir() else [p])
    return paths


# -- params -------------------------------------------------------------------


def cmd_params(args) -> int:
    p = make_params(args.mode, args.n, args.k, args.d, args.beta)
    s = secure_counts(p, args.ell, args.ell_prime)
    unit = make_params(args.mode, args.n, args.k, args.d)
    base_n = args.n + unit.shortening
    base_alpha = unit.alpha + unit.shortening
    q = args.q or select_modulus(p.mode, base_n, base_alpha)
    rows = [
        ("mode", p.mode.value),
        ("n, k, d, beta", f"{p.n}, {p.k}, {p.d}, {p.beta}"),
        ("alpha", p.alpha),
        ("B", p.B),
        ("B_s", s.B_s),
        ("R", s.R),
        ("ell, ell'", f"{s.ell}, {s.ell_prime}"),
        ("q", q),
        ("repair bandwidth", p.repair_bandwidth),
        ("cut-set bound", cutset_bound(p.alpha, p.beta, p.k, p.d)),
        ("secrecy bound", secrecy_bound(p.alpha, p.beta, p.k, p.d, s.ell)),
        ("achieved B_s", s.B_s),
    ]
    if unit.shortening:
        rows.append(("shortened from", f"[{base_n}, {args.k + unit.shortening}, {args.d + unit.shortening}]"))
    width = max(len(r[0]) for r in rows)
    for key, value in rows:
        print(f"{key:<{width}}  {value}")
    return EXIT_OK


# -- encode / repair / reconstruct --------------------------------------------


def cmd_encode(args) -> int:
    q = args.q or 257
    payload = fileio.resolve_payload(args.payload, q)
    code = build_code(args.mode, args.n, args.k, args.d, args.ell, args.ell_prime, q=q)
    data = Path(args.input).read_bytes()
    symbols = fileio.bytes_to_symbols(data, q, payload)
    b_s = code.secrecy.B_s
    stripes = max(1, -(-symbols.size // b_s))
    stripes += -stripes % args.beta  # beta > 1 runs beta unit stripes side by side
    pad = fileio.BYTE_PAD if payload == "bytes" else 0
    block = np.full(stripes * b_s, pad, dtype=np.int64)
    block[: symbols.size] = symbols
    seed = _seed(args)
    source = SeededSource(seed) if seed is not None else SystemSource()
    shares = code.encode_batch(code.draw_free(block.reshape(stripes, b_s).T, source))

    manifest = fileio.Manifest(
        mode=code.mode.value, n=code.n, k=code.k, d=code.d, beta=args.beta, q=q,
        ell=code.secrecy.ell, ell_prime=code.secrecy.ell_prime, stripes=stripes,
        length=len(data), payload=payload, points=list(code.encoding.points),
    )
    bodies = [fileio.share_body(q, shares[i].T) for i in range(code.n)]
    manifest.share_digests = [fileio.body_digest(b) for b in bodies]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest.save(out / "manifest.txt")
    for i in range(code.n):
        (out / fileio.share_filename(i + 1)).write_bytes(fileio.share_bytes(manifest, i + 1, shares[i].T))
    print(f"{code.describe()}")
    print(f"encoded {len(data)} bytes as {stripes} stripes of {b_s} symbols ({payload} payload)")
    print(f"wrote {out / 'manifest.txt'} and {code.n} share files")
    return EXIT_OK


def cmd_repair(args) -> int:
    manifest = fileio.Manifest.load(args.manifest)
    code = _code_from_manifest(manifest)
    paths = _expand_share_args(args.shares)
    shares = _read_shares(manifest, code, paths)
    if args.node in shares:
        raise NotEnoughHelpers(f"node {args.node} cannot help repair itself")
    if len(shares) != code.d:
        raise NotEnoughHelpers(f"repair needs exactly d={code.d} helper shares, got {len(shares)}")
    if not 1 <= args.node <= code.n:
        raise ConfigError(f"node {args.node} outside 1..{code.n}")
    helpers = sorted(shares)
    symbols = np.stack([code.helper_batch(shares[h].T, args.node) for h in helpers])
    repaired = code.repair_batch(args.node, helpers, symbols)
    out = Path(args.out) if args.out else Path(args.manifest).parent / fileio.share_filename(args.node)
    raw = fileio.share_bytes(manifest, args.node, repaired.T)
    fileio.parse_share(manifest, raw, code.alpha)  # verify against the recorded digest
    out.write_bytes(raw)
    per_stripe = code.d * manifest.beta
    print(f"repair node {args.node}: helpers {','.join(map(str, helpers))} sent "
          f"{per_stripe} symbols/stripe over {manifest.stripes // manifest.beta} stripes "
          f"(total {per_stripe * manifest.stripes // manifest.beta} symbols)")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    manifest = fileio.Manifest.load(args.manifest)
    code = _code_from_manifest(manifest)
    shares = _read_shares(manifest, code, _expand_share_args(args.shares))
    if len(shares) < code.k:
        raise NotEnoughShares(f"reconstruction needs {code.k} shares, got {len(shares)}")
    ids = sorted(shares)[: code.k]
    free = code.decode_batch(ids, np.stack([shares[i].T for i in ids]))
    symbols = free[: code.secrecy.B_s].T.ravel()
    count = fileio.symbol_count(manifest.length, manifest.q, manifest.payload)
    data = fileio.symbols_to_bytes(symbols[:count], manifest.length, manifest.q, manifest.payload)
    Path(args.out).write_bytes(data)
    print(f"reconstructed {len(data)} bytes from nodes {','.join(map(str, ids))} into {args.out}")
    return EXIT_OK


# -- audit --------------------------------------------------------------------


def cmd_audit(args) -> int:
    ell_build = 0 if args.plain else args.ell
    ellp_build = 0 if args.plain else args.ell_prime
    code = build_code(args.mode, args.n, args.k, args.d, ell_build, ellp_build, q=args.q)
    report = audit_all(code, args.ell, args.ell_prime, include_smaller=args.include_smaller,
                       raise_on_violation=False)
    for line in report.lines():
        print(line)
    if args.brute_force:
        try:
            agree = True
            for r in report.results:
                bf = brute_force_leakage(code, r.spec, args.budget)
                ok = abs(bf - r.leakage) < 1e-9
                agree &= ok
                print(f"brute-force {r.spec}: enumerated={bf:.6f} rank={r.leakage} "
                      f"{'agree' if ok else 'DISAGREE'}")
            print(f"brute-force result={'AGREE' if agree else 'DISAGREE'}")
        except TooLargeForBruteForce as exc:
            print(f"brute-force skipped: {exc}")
    if report.violations:
        bad = report.violations[0]
        print(f"secrecy violation: spec {bad.spec} leaks {bad.leakage} symbols", file=sys.stderr)
        return EXIT_LEAK
    return EXIT_OK


# -- simulate -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    manifest = fileio.Manifest.load(args.manifest)
    code = _code_from_manifest(manifest)
    shares = _read_shares(manifest, code, _expand_share_args(args.shares))
    if len(shares) < code.k:
        raise NotEnoughShares(f"simulation needs at least {code.k} shares, got {len(shares)}")
    # recover every node's canonical share from any k (no hidden state needed)
    ids = sorted(shares)[: code.k]
    free = code.decode_batch(ids, np.stack([shares[i].T for i in ids]))
    canonical = code.encode_batch(free)
    for i, data in shares.items():
        if not np.array_equal(canonical[i - 1], data.T):
            raise CorruptShare(f"share for node {i} is inconsistent with the others")

    spec = None
    if args.observe or args.observe_repair:
        spec = EavesdropperSpec(frozenset(args.observe or []), frozenset(args.observe_repair or []))
    b_s = code.secrecy.B_s
    padding = Padding(manifest.stripes * b_s, manifest.stripes, b_s)
    state = cluster_sim.from_shares(code, canonical, padding, spec, seed=_seed(args) or 0)
    for node in range(1, code.n + 1):
        if node not in shares:
            state.fail(node)
    script = Path(args.script).read_text() if args.script else ""
    result = cluster_sim.run_scenario(state, script)

    count = fileio.symbol_count(manifest.length, manifest.q, manifest.payload)
    collects = [r for r in result.log if r.event == "collect"]
    for rec, message in zip(collects, result.collected):
        data = fileio.symbols_to_bytes(np.array(message[:count]), manifest.length, manifest.q,
                                       manifest.payload)
        print(f"collect nodes {','.join(map(str, rec.nodes))}: {len(data)} bytes "
              f"sha256={hashlib.sha256(data).hexdigest()}")
    repairs = result.log.per_stripe("repair")
    stripes = manifest.stripes // manifest.beta
    per_stripe = sum(repairs) * manifest.beta
    print(f"repairs={len(repairs)} repair traffic={per_stripe} symbols/stripe "
          f"({per_stripe * stripes} total)")
    print(f"collects={len(collects)} collect traffic="
          f"{sum(r.symbols_per_stripe for r in collects) * manifest.beta} symbols/stripe")
    print(f"alive shares match the originals: {'yes' if result.state.restored() else 'no'}")
    if spec is None:
        return EXIT_OK
    print(f"adversary {spec}: rank={result.adversary_rank} leakage={result.leakage}")
    if result.leakage == 0:
        return EXIT_OK
    within = (len(spec.storage_nodes) <= code.secrecy.ell
              and (code.mode is Mode.MBR or len(spec.repair_nodes) <= code.secrecy.ell_prime))
    if within:
        print(f"secrecy violation within the designed ell={code.secrecy.ell}, "
              f"ell'={code.secrecy.ell_prime}", file=sys.stderr)
        return EXIT_LEAK
    print(f"warning: adversary exceeds the designed ell={code.secrecy.ell}, "
          f"ell'={code.secrecy.ell_prime}; leakage is expected by design", file=sys.stderr)
    return EXIT_BY_DESIGN


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmrc", description="Secure product-matrix regenerating codes.")
    parser.add_argument("--version", action="version", version=f"pmrc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print code parameters and bounds")
    _code_flags(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("encode", help="encode a file into n share files")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    _code_flags(p)
    p.add_argument("--payload", choices=["auto", "bytes", "digits"], default="auto")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("repair", help="regenerate one share from d helper shares")
    p.add_argument("--manifest", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("shares", nargs="+")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("reconstruct", help="recover the file from k shares")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("shares", nargs="+")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("audit", help="exact leakage audit over all eavesdropper choices")
    _code_flags(p)
    p.add_argument("--plain", action="store_true", help="build the code without secrecy, audit at --ell")
    p.add_argument("--include-smaller", action="store_true")
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("simulate", help="replay a failure/repair scenario")
    p.add_argument("--manifest", required=True)
    p.add_argument("--shares", nargs="+", required=True)
    p.add_argument("--script")
    p.add_argument("--observe", type=_node_list)
    p.add_argument("--observe-repair", type=_node_list)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SecrecyViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LEAK
    except (CorruptShare, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PMRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
