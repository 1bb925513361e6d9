"""Command-line front end: end-to-end delivery simulation, analytic
sweeps, and a self-check battery.

Exit codes are the machine contract: 0 success, 1 analytic or decode
failure, 2 usage/configuration error.  All outputs are deterministic
given the flags and the seed (flag --seed, else env SYNERGY_SEED, else 0).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .bounds import (
    CertificateViolationError,
    cache_fraction_for_gap,
    check_midrange_gap_envelope,
    gap_certificate,
    min_cache_fraction_for_gap,
    synergy_report,
)
from .combinatorics import format_rational, harmonic
from .decoder import verify_all
from .field import MODULUS, SeededRng
from .placement import SystemConfig, fill_caches, load_library, random_library, subpacketize
from .scheduler import default_config, plan_phases, validate_demand
from .simulator import (
    DEMAND_STREAM,
    LIBRARY_STREAM,
    DegenerateChannelError,
    run_delivery,
    save_transcript,
    simulate,
)

_GAP_SWEEP_LIMIT = 256


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


def _seed_from(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SYNERGY_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"SYNERGY_SEED must be an integer, got {env!r}") from exc
    return 0


def _build_config(args) -> SystemConfig:
    if args.library is not None:
        config, _ = load_library(args.library)
        for name, given in (("K", args.K), ("N", args.N), ("M", args.M)):
            if given is not None and given != getattr(config, name):
                raise UsageError(f"flag -{name} {given} conflicts with the library header")
        return config
    if args.K is None or args.N is None:
        raise UsageError("simulate needs -K and -N (or --library)")
    if (args.M is None) == (args.replication is None):
        raise UsageError("give exactly one of -M or --replication")
    M = args.M
    if M is None:
        if (args.replication * args.N) % args.K:
            raise UsageError(
                f"replication {args.replication} does not give an integer cache size "
                f"for K={args.K}, N={args.N}"
            )
        M = (args.replication * args.N) // args.K
    try:
        if args.granularity is None:
            return default_config(args.K, args.N, M, modulus=args.modulus)
        return SystemConfig(args.K, args.N, M, granularity=args.granularity, modulus=args.modulus)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_demand(spec: str, config: SystemConfig, seed: int) -> tuple[int, ...]:
    if spec == "distinct":
        if config.K > config.N:
            raise UsageError("distinct demands need K <= N")
        return tuple(range(1, config.K + 1))
    if spec == "uniform-random":
        rng = SeededRng(seed).child(DEMAND_STREAM)
        return tuple(1 + rng.uniform_int(config.N) for _ in range(config.K))
    try:
        demand = tuple(int(part) for part in spec.split(","))
    except ValueError as exc:
        raise UsageError(f"demand must be comma-separated integers, got {spec!r}") from exc
    try:
        return validate_demand(config, demand)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_simulate(args) -> int:
    config = _build_config(args)
    seed = _seed_from(args)
    demand = _parse_demand(args.demand, config, seed)
    if config.K > 8:
        print(f"warning: K={config.K} blocks grow as C(K, replication); expect a slow run",
              file=sys.stderr)
    if args.library is not None:
        _, library = load_library(args.library)
    else:
        library = random_library(config, SeededRng(seed).child(LIBRARY_STREAM))
    plan = plan_phases(config, demand, subfiles=subpacketize(config, library))
    mode = "resample" if args.resample_degenerate else "error"
    try:
        transcript = run_delivery(plan, library, seed, on_degenerate=mode)
    except DegenerateChannelError as exc:
        print(f"degenerate channel: {exc} (rerun with --resample-degenerate)", file=sys.stderr)
        return 1
    report = verify_all(transcript, library)

    total = transcript.plan.total_duration
    print(f"K={config.K} N={config.N} M={config.M} replication={config.replication} "
          f"granularity={config.granularity} seed={seed}")
    print(f"demand: {','.join(str(r) for r in demand)}")
    print(f"delivery time: {format_rational(total)} ({float(total):.6f}) "
          f"over {transcript.total_uses} channel uses")
    for entry in report.users:
        status = "ok" if entry.match else f"FAIL ({entry.error or 'mismatch'})"
        print(f"  user {entry.user} wants file {entry.requested}: {status}")

    if args.output is not None:
        prefix = Path(args.output)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        save_transcript(transcript, Path(f"{prefix}.transcript.json"),
                        Path(f"{prefix}.transcript.bin"))
        if args.format == "json":
            payload = {"format": "synergy-verification", "version": 1, **report.to_json()}
            Path(f"{prefix}.verification.json").write_text(json.dumps(payload, indent=2) + "\n")
        else:
            with open(f"{prefix}.verification.csv", "w", newline="") as fh:
                writer = csv.DictWriter(
                    fh, fieldnames=["user", "requested", "match", "solves", "max_system_dim", "error"]
                )
                writer.writeheader()
                for entry in report.users:
                    writer.writerow(entry.to_json())
        print(f"reports written under {prefix}")
    return 0 if report.all_pass else 1


def _write_csv(rows: list[dict], output: str | None) -> None:
    if not rows:
        return
    target = open(output, "w", newline="") if output else sys.stdout
    try:
        writer = csv.DictWriter(target, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if output:
            target.close()


def _parse_gap_range(spec: str) -> list[int]:
    try:
        lo, hi = spec.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise UsageError(f"gap range must look like 1..10, got {spec!r}") from exc
    if lo < 1 or hi < lo:
        raise UsageError(f"gap range must be an increasing range of targets >= 1, got {spec!r}")
    return list(range(lo, hi + 1))


def _cmd_sweep(args) -> int:
    if args.mode in ("gap", "dof"):
        if not 2 <= args.kmax <= _GAP_SWEEP_LIMIT:
            raise UsageError(f"--kmax must lie in [2, {_GAP_SWEEP_LIMIT}] for {args.mode} sweeps")
    if args.mode == "gap":
        try:
            certificate = gap_certificate(args.kmax)
        except CertificateViolationError as exc:
            print(f"gap certificate violated: {exc}", file=sys.stderr)
            return 1
        _write_csv([row.csv_row() for row in certificate.rows], args.output)
        print(
            f"max gap {format_rational(certificate.max_gap)} "
            f"({float(certificate.max_gap):.6f}) at K={certificate.argmax[0]}, "
            f"replication={certificate.argmax[1]}; all {len(certificate.rows)} cells below 4",
            file=sys.stderr,
        )
        return 0
    if args.mode == "dof":
        rows = [
            synergy_report(K, replication).csv_row()
            for K in range(2, args.kmax + 1)
            for replication in range(1, K)
        ]
        _write_csv(rows, args.output)
        return 0
    # buffer mode: closed-form vs. exhaustive minimum cache fraction per target
    if args.kmax < 2:
        raise UsageError("--kmax must be at least 2")
    rows = []
    for gap in _parse_gap_range(args.gap_range):
        exhaustive = min_cache_fraction_for_gap(gap, args.kmax)
        rows.append(
            {
                "gap_target": gap,
                "users": args.kmax,
                "cache_fraction_formula": cache_fraction_for_gap(gap, args.kmax),
                "cache_fraction_exhaustive": "" if exhaustive is None else float(exhaustive),
            }
        )
    _write_csv(rows, args.output)
    return 0


def _check_schedule_identities(kmax: int) -> None:
    for K in range(1, kmax + 1):
        for replication in range(0, K):
            plan = plan_phases(default_config(K, K, replication))
            expected = harmonic(K) - harmonic(replication)
            assert plan.total_duration == expected, f"duration off at K={K}, g={replication}"
            first = plan.phases[0]
            for phase in plan.phases:
                assert phase.duration * phase.order == first.duration * first.order, (
                    f"ratio law off at K={K}, g={replication}, phase {phase.order}"
                )
            if replication < K:
                denom = (
                    plan.config.subfiles_per_file
                    * (K - replication)
                    * plan.config.granularity
                )
                assert Fraction(plan.total_uses, denom) == expected, (
                    f"use accounting off at K={K}, g={replication}"
                )


def _check_cache_identity(kmax: int) -> None:
    for K in range(1, kmax + 1):
        for replication in range(0, K + 1):
            config = SystemConfig(K, K, replication, granularity=1)
            library = random_library(config, SeededRng(7).child(LIBRARY_STREAM))
            caches = fill_caches(config, subpacketize(config, library))
            expected = config.cache_fraction * config.library_symbols
            assert expected.denominator == 1
            for cache in caches:
                assert cache.symbol_count == expected, f"cache identity off at K={K}"


def _check_decodes(kmax: int, seeds: int) -> None:
    for K in range(2, kmax + 1):
        for replication in range(0, K + 1):
            config = default_config(K, K, replication)
            demand = tuple(range(1, K + 1))
            for seed in range(seeds):
                transcript = simulate(config, demand, seed)
                library = random_library(config, SeededRng(seed).child(LIBRARY_STREAM))
                report = verify_all(transcript, library)
                assert report.all_pass, (
                    f"decode failed at K={K}, replication={replication}, seed={seed}: "
                    + json.dumps(report.to_json())
                )
                if replication == K:
                    assert transcript.total_uses == 0
                else:
                    denom = config.subfiles_per_file * (K - replication) * config.granularity
                    assert Fraction(transcript.total_uses, denom) == transcript.plan.total_duration


def _cmd_verify(args) -> int:
    quick = args.quick
    checks = [
        ("schedule duration + ratio identities", lambda: _check_schedule_identities(16 if quick else 64)),
        ("cache-size identity", lambda: _check_cache_identity(6 if quick else 10)),
        ("gap certificate", lambda: gap_certificate(16 if quick else 64)),
        ("mid-range gap envelope", check_midrange_gap_envelope),
        ("end-to-end decode", lambda: _check_decodes(4 if quick else 6, 1 if quick else 2)),
    ]
    for name, check in checks:
        try:
            check()
        except Exception as exc:
            print(f"FAIL {name}: {exc}")
            return 1
        print(f"ok {name}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synergy",
        description="Cache-aided broadcast delivery with delayed channel feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run placement, delivery and per-user decoding")
    sim.add_argument("-K", type=int, default=None, help="number of users/antennas")
    sim.add_argument("-N", type=int, default=None, help="number of library files")
    sim.add_argument("-M", type=int, default=None, help="per-user cache size in files")
    sim.add_argument("--replication", type=int, default=None,
                     help="K*M/N, alternative to -M")
    sim.add_argument("--granularity", type=int, default=None,
                     help="symbols per first-phase stream (default: minimal feasible)")
    sim.add_argument("--modulus", type=int, default=MODULUS, help="field modulus (prime)")
    sim.add_argument("--seed", type=int, default=None, help="seed (default: $SYNERGY_SEED or 0)")
    sim.add_argument("--demand", default="distinct",
                     help='comma-separated 1-based file indices, "distinct" or "uniform-random"')
    sim.add_argument("--library", default=None, help="binary library file to load")
    sim.add_argument("--output", default=None, help="prefix for transcript + verification reports")
    sim.add_argument("--format", choices=("json", "csv"), default="json",
                     help="verification report format")
    sim.add_argument("--resample-degenerate", action="store_true",
                     help="redraw channel uses that break decodability instead of failing")
    sim.set_defaults(handler=_cmd_simulate)

    sweep = sub.add_parser("sweep", help="emit plot-ready CSV over parameter grids")
    sweep.add_argument("--mode", choices=("gap", "dof", "buffer"), required=True)
    sweep.add_argument("--kmax", type=int, default=64, help="largest K (gap/dof) or the K (buffer)")
    sweep.add_argument("--gap-range", default="1..10",
                       help="buffer mode: inclusive integer range of gap targets, e.g. 1..10")
    sweep.add_argument("--output", default=None, help="CSV path (default: stdout)")
    sweep.set_defaults(handler=_cmd_sweep)

    verify = sub.add_parser("verify", help="run the self-check battery")
    verify.add_argument("--quick", action="store_true", help="reduced ranges, < 30 s")
    verify.set_defaults(handler=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
