"""Command-line front end.

Exit codes: 0 success, 2 usage or parameter error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    coherence_bruteforce,
    condition_number_stats,
    matrix_metrics,
    spectral_norm,
    write_cond_stats_csv,
)
from .charseq import Family, power_residue_sequence, sidelnikov_sequence
from .errors import CharsenseError, FormatError
from .galois import build_field
from .recovery import (
    ExperimentConfig,
    run_noiseless_experiment,
    run_noisy_experiment,
    write_rates_csv,
    write_rates_json,
)
from .reference import FLOOR_TOL, NORM_TOL, PUBLISHED_NORMS
from .seeding import default_seed
from .sensing import (
    build_gaussian_matrix,
    build_matrix,
    build_partial_fourier_matrix,
    column,
    export_matrix,
    import_matrix,
    rebuild_from_header,
)

log = logging.getLogger("charsense")

EXIT_USAGE = 2
EXIT_VERIFY = 3


class ConfigError(CharsenseError):
    pass


def parse_range(text: str, kind=int) -> list:
    """``"1..20"``, ``"1,2,3"``, ``"0..30:2"`` or comma-joined mixtures."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = (kind(v) for v in span.split("..", 1))
            step = kind(step) if step else kind(1)
            if step <= 0:
                raise argparse.ArgumentTypeError(f"non-positive step in {part!r}")
            slack = 1e-9 if kind is float else 0
            i = 0
            while lo + i * step <= hi + slack:
                out.append(lo + i * step)
                i += 1
        else:
            out.append(kind(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def _int_range(text):
    try:
        return parse_range(text, int)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _float_range(text):
    try:
        return parse_range(text, float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


# -- shared argument groups ------------------------------------------------------

def _add_matrix_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=[f.value for f in Family], default=Family.POWER_RESIDUE.value)
    p.add_argument("-p", type=int, help="field characteristic")
    p.add_argument("-m", type=int, default=1, help="extension degree (Sidelnikov)")
    p.add_argument("-M", type=int, help="alphabet size")
    p.add_argument("--K", type=int, help="rows (baselines)")
    p.add_argument("--N", type=int, help="columns (baselines)")


def _matrix_from_args(args, seed=None):
    fam = Family(args.family)
    if fam.deterministic:
        if args.p is None or args.M is None:
            raise CharsenseError("-p and -M are required for deterministic families")
        return build_matrix(fam, args.p, args.M, args.m)
    if args.K is None:
        raise CharsenseError("--K is required for baseline families")
    N = args.N if args.N is not None else args.K
    seed = default_seed() if seed is None else seed
    if fam is Family.GAUSSIAN:
        return build_gaussian_matrix(args.K, N, seed)
    return build_partial_fourier_matrix(args.K, N, seed)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline=""), True


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(args, config: dict, seed: int, outputs: dict[str, str | None]) -> None:
    manifest = {
        "command_line": sys.argv[:] if args.argv is None else args.argv,
        "config": config,
        "master_seed": seed,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": {k: _digest(v) for k, v in outputs.items() if v not in (None, "-")},
    }
    text = json.dumps(manifest, indent=1, sort_keys=True, default=str) + "\n"
    target = args.manifest
    if target is None and args.out not in (None, "-"):
        target = str(args.out) + ".manifest.json"
    if target is None:
        sys.stderr.write(text)
    else:
        Path(target).write_text(text)


# -- subcommands -----------------------------------------------------------------

def cmd_seq(args) -> int:
    ctx = build_field(args.p, args.m)
    fam = Family(args.family)
    seq = power_residue_sequence(ctx, args.M) if fam is Family.POWER_RESIDUE else sidelnikov_sequence(ctx, args.M)
    fh, close = _open_out(args.out)
    try:
        fh.write("k,symbol\n")
        for k, v in enumerate(seq.symbols.tolist()):
            fh.write(f"{k},{v}\n")
    finally:
        if close:
            fh.close()
    return 0


def _verify_file(path) -> list[str]:
    with open(path) as fh:
        mat = import_matrix(fh)
    problems = []
    if mat.family.deterministic:
        ref = rebuild_from_header(mat)
        if ref.exponents.shape != mat.exponents.shape or not np.array_equal(ref.exponents, mat.exponents):
            problems.append("exponent table differs from the re-derived construction")
        dense = mat.dense
        bad = [n for n in range(mat.N) if not np.array_equal(column(mat, n), dense[:, n])]
        if bad:
            problems.append(f"{len(bad)} columns differ from their base-sequence reconstruction (first: {bad[0]})")
    else:
        seed = mat.provenance.get("seed")
        if seed is None:
            problems.append("baseline export has no seed; cannot re-derive")
        else:
            build = build_gaussian_matrix if mat.family is Family.GAUSSIAN else build_partial_fourier_matrix
            ref = build(mat.K, mat.N, int(seed))
            if not np.array_equal(ref.dense, mat.dense):
                problems.append("values differ from the seeded re-derivation")
    return problems


def cmd_matrix(args) -> int:
    if args.action == "verify":
        if not args.path:
            raise CharsenseError("matrix verify needs a file path")
        try:
            problems = _verify_file(args.path)
        except FormatError as exc:
            print(f"verify: {exc}", file=sys.stderr)
            return EXIT_VERIFY
        for msg in problems:
            print(f"verify: {msg}", file=sys.stderr)
        print(json.dumps({"path": args.path, "ok": not problems}))
        return EXIT_VERIFY if problems else 0

    mat = _matrix_from_args(args, args.seed)
    out = args.out or args.path
    if args.action == "export" and out is None:
        raise CharsenseError("matrix export needs --out")
    if out is None:
        summary = {"family": mat.family.value, "K": mat.K, "N": mat.N, "M": mat.M, **mat.provenance}
        print(json.dumps(summary, sort_keys=True))
        return 0
    fh, close = _open_out(out)
    try:
        export_matrix(mat, fh)
    finally:
        if close:
            fh.close()
    log.info("wrote %s x %s %s matrix to %s", mat.K, mat.N, mat.family.value, out)
    return 0


def _table1_report() -> int:
    rows = []
    failed = 0
    for row in PUBLISHED_NORMS:
        mat = build_matrix(row.family, row.p, row.M, row.m)
        norm = spectral_norm(mat)
        floor = math.sqrt(mat.N / mat.K)
        ok = (
            (mat.K, mat.N) == (row.K, row.N)
            and abs(norm - row.spectral_norm) <= NORM_TOL
            and abs(floor - row.tight_frame_floor) <= FLOOR_TOL
        )
        failed += not ok
        rows.append({
            "family": row.family, "K": mat.K, "N": mat.N, "M": mat.M,
            "spectral_norm": norm, "published": row.spectral_norm,
            "tight_frame_floor": floor, "published_floor": row.tight_frame_floor,
            "pass": ok,
        })
    print(json.dumps(rows, indent=1))
    return EXIT_VERIFY if failed else 0


def cmd_analyze(args) -> int:
    if args.table1:
        return _table1_report()
    if args.input:
        with open(args.input) as fh:
            mat = import_matrix(fh)
    else:
        mat = _matrix_from_args(args, args.seed)
    metrics = matrix_metrics(mat).as_dict()
    if args.bruteforce:
        metrics["coherence_bruteforce"] = coherence_bruteforce(mat)
    print(json.dumps({"family": mat.family.value, "K": mat.K, "N": mat.N, "M": mat.M, **metrics}, indent=1))
    return 0


def cmd_cond_stats(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    if Family(args.family) is Family.GAUSSIAN and args.N is None:
        args.N = args.K
    mat = _matrix_from_args(args, seed)
    stats = []
    for s in args.s:
        st = condition_number_stats(mat, s, args.trials, seed, args.threads)
        log.info("cond-stats %s s=%d mean=%.6f std=%.6f", mat.family.value, s, st.mean, st.std_dev)
        stats.append(st)
    fh, close = _open_out(args.out)
    try:
        write_cond_stats_csv(mat, stats, fh)
    finally:
        if close:
            fh.close()
    config = {"family": args.family, "p": args.p, "m": args.m, "M": args.M, "K": args.K, "N": args.N,
              "s": args.s, "trials": args.trials}
    _write_manifest(args, config, seed, {"csv": args.out})
    return 0


def _experiment_config(args) -> ExperimentConfig:
    seed = args.seed if args.seed is not None else default_seed()
    snrs = args.snr_db or []
    if args.snr_linear:
        snrs = [10.0 * math.log10(v) if v > 0 else -math.inf for v in args.snr_linear]
    return ExperimentConfig(
        family=args.family, p=args.p, m=args.m, M=args.M, K=args.K, N=args.N,
        sparsities=args.s, trials=args.trials, max_iterations=args.max_iterations,
        success_threshold=args.threshold, snr_db=tuple(snrs), master_seed=seed,
        algorithm=args.algorithm, strict_iterations=args.strict_iterations,
        regenerate=not args.fixed_baseline, threads=args.threads, per_trial=args.per_trial,
    )


def cmd_recover(args) -> int:
    cfg = _experiment_config(args)
    if cfg.snr_db:
        rows = run_noisy_experiment(cfg)
    else:
        rows = run_noiseless_experiment(cfg)
    for r in rows:
        log.info("recover %s s=%d snr=%s rate=%.4f", r.family, r.s, r.snr_db, r.rate)
    fh, close = _open_out(args.out)
    try:
        if args.format == "json" or args.per_trial:
            write_rates_json(rows, fh)
        else:
            write_rates_csv(rows, fh)
    finally:
        if close:
            fh.close()
    config = {k: v for k, v in vars(cfg).items() if k != "threads"}
    _write_manifest(args, config, cfg.master_seed, {"results": args.out})
    return 0


# -- parser ----------------------------------------------------------------------

def _add_experiment_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed (default: $CHARSENSE_SEED)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--manifest", help="manifest path (default: OUT.manifest.json, or stderr)")
    p.add_argument("--config", help="key=value file mirroring the flags; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seq", help="dump a symbol sequence as CSV")
    p.add_argument("--family", choices=[Family.POWER_RESIDUE.value, Family.SIDELNIKOV.value],
                   default=Family.POWER_RESIDUE.value)
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-m", type=int, default=1)
    p.add_argument("-M", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_seq)

    p = sub.add_parser("matrix", help="build, export or verify a sensing matrix")
    p.add_argument("action", choices=["build", "export", "verify"])
    p.add_argument("path", nargs="?", help="file to verify, or export target")
    _add_matrix_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("analyze", help="coherence, norms and bounds as JSON")
    _add_matrix_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--input", help="analyze an exported matrix file")
    p.add_argument("--table1", action="store_true", help="check the ten published spectral norms")
    p.add_argument("--bruteforce", action="store_true", help="also report the pairwise-scan coherence")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cond-stats", help="condition numbers of random column submatrices")
    _add_matrix_args(p)
    p.add_argument("--s", type=_int_range, required=True, help="e.g. 1..20 or 5,10,15")
    p.add_argument("--trials", type=int, default=10_000)
    _add_experiment_io(p)
    p.set_defaults(func=cmd_cond_stats)

    p = sub.add_parser("recover", help="Monte-Carlo sparse recovery success rates")
    _add_matrix_args(p)
    p.add_argument("--s", type=_int_range, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("--threshold", type=float, help="success threshold on ||x - xhat||^2")
    snr = p.add_mutually_exclusive_group()
    snr.add_argument("--snr-db", type=_float_range, help="e.g. 0..30:5; omit for noiseless")
    snr.add_argument("--snr-linear", type=_float_range, help="linear SNR values")
    p.add_argument("--algorithm", choices=["mp", "omp"], default="mp")
    p.add_argument("--strict-iterations", action="store_true", help="disable the residual early stop")
    p.add_argument("--fixed-baseline", action="store_true", help="one baseline matrix for all trials")
    p.add_argument("--per-trial", action="store_true", help="JSON output with per-trial squared errors")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_experiment_io(p)
    p.set_defaults(func=cmd_recover)
    return parser


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(name)
    return None


def read_config(path: str, sub: argparse.ArgumentParser) -> dict:
    """Parse ``key=value`` lines into parser defaults; ``#`` starts a comment."""
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    for a in sub._actions:
        for opt in a.option_strings:
            actions.setdefault(opt.lstrip("-").replace("-", "_"), a)
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().lstrip("-").replace("-", "_")
            value = value.strip()
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            action = actions.get(key)
            if action is None:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                if action.nargs == 0:
                    parsed = value.lower() in ("1", "true", "yes", "on")
                elif action.type is not None:
                    parsed = action.type(value)
                else:
                    parsed = value
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
            if action.choices is not None and parsed not in action.choices:
                raise ConfigError(f"{path}:{lineno}: {key!r} must be one of {sorted(action.choices)}")
            out[action.dest] = parsed
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    raw = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(raw)
    try:
        if known.config and raw:
            cmd = next((a for a in raw if not a.startswith("-")), None)
            sub = _subparser(parser, cmd)
            if sub is None:
                raise ConfigError("--config is only valid after a subcommand")
            defaults = read_config(known.config, sub)
            # required options satisfied by the file must not trip argparse
            for a in sub._actions:
                if a.dest in defaults:
                    a.required = False
            sub.set_defaults(**defaults)
    except (ConfigError, OSError) as exc:
        print(f"charsense: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        args = parser.parse_args(raw)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = ["charsense", *raw]
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CharsenseError as exc:
        print(f"charsense: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
