"""Command-line surface: bounds, audits, sampling, pooled-test simulation, sweeps.

Exit codes: 0 success, 2 usage error, 3 enumeration-cap exceeded.
All JSON output carries schema_version "1".  Every randomized subcommand
requires an explicit --seed, so identical invocations are byte-identical.
Flag values override --config file entries, which override defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from random import Random

from . import bounds as bounds_mod
from .auditor import (
    DEFAULT_OUTCOME_CAP,
    DEFAULT_PAIR_CAP,
    audit_accuracy,
    audit_privacy,
    audit_testing_accuracy,
    audit_testing_privacy,
    canonical_pair,
    mc_estimate_delta,
)
from .combinatorics import Subset
from .grouptesting import (
    ContaminationInduced,
    IndependentOverwrite,
    NoiseAfter,
    NoiseBefore,
    Noiseless,
    PoolingDesign,
    bernoulli_design,
    identity_design,
    simulate,
)
from .mechanisms import BASE_MECHANISMS, CapExceededError, Mechanism, make_mechanism, mechanism_from_json

SCHEMA_VERSION = "1"
T_DENOMINATOR_LIMIT = 10**9


class UsageError(Exception):
    pass


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse {text!r} as a fraction: {exc}") from None


def _parse_items(text: str, n: int) -> Subset:
    try:
        items = tuple(int(part) for part in text.split(",") if part != "")
        return Subset(n, items)
    except ValueError as exc:
        raise UsageError(f"cannot parse subset {text!r}: {exc}") from None


def _parse_grid_axis(text: str) -> list[int]:
    """Grid axis: '4', '4:9' (inclusive range) or '4,6,8'."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi) + 1))
        if "," in text:
            return [int(part) for part in text.split(",")]
        return [int(text)]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid axis {text!r}: {exc}") from None


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required flag --{name.replace('_', '-')}")


def _frac_str(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def _resolve_t(args: argparse.Namespace) -> tuple[Fraction, dict]:
    """Exact multiplier t.  --t wins; otherwise t = e^eps2 rationalized
    to the nearest fraction with denominator <= 1e9, rounding recorded."""
    if getattr(args, "t", None) is not None:
        t = _parse_fraction(args.t)
        if t < 1:
            raise UsageError(f"need t >= 1, got {t}")
        return t, {"t": _frac_str(t), "t_decimal": float(t), "t_rounding": "exact"}
    eps2 = args.eps2 or 0.0
    if eps2 < 0:
        raise UsageError(f"need eps2 >= 0, got {eps2}")
    exact = Fraction(math.exp(eps2))
    t = exact.limit_denominator(T_DENOMINATOR_LIMIT)
    rounding = "exact" if t == exact else ("down" if t < exact else "up")
    if t < 1:  # rationalization may round below 1 for tiny eps2
        t = Fraction(1)
        rounding = "up"
    return t, {"t": _frac_str(t), "t_decimal": float(t), "t_rounding": rounding, "eps2": eps2}


def _emit_json(payload: dict, out: io.TextIOBase) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    out.write(json.dumps(payload, indent=2, sort_keys=True))
    out.write("\n")


def _emit_table(rows: list[tuple[str, str]], out: io.TextIOBase) -> None:
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        out.write(f"{key.ljust(width)}  {value}\n")


def _emit_csv(header: list[str], rows: list[list[str]], out: io.TextIOBase) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


# -- bounds -------------------------------------------------------------------

def cmd_bounds(args: argparse.Namespace) -> int:
    _require(args, "n", "d", "beta")
    reports = bounds_mod.evaluate_all(args.n, args.d, args.beta, args.eps1 or 0.0, args.eps2 or 0.0)
    if args.format == "json":
        payload = {
            "n": args.n, "d": args.d, "beta": args.beta,
            "eps1": args.eps1 or 0.0, "eps2": args.eps2 or 0.0,
            "bounds": {k: (r.to_json() if r else None) for k, r in reports.items()},
        }
        _emit_json(payload, sys.stdout)
    elif args.format == "csv":
        header = ["bound", "value", "clipped", "regime_ok", "regime_note"]
        rows = []
        for key, rep in reports.items():
            if rep is None:
                rows.append([key, "n/a", "n/a", "n/a", "sphere release undefined for this beta"])
            else:
                rows.append([key, _frac_str(rep.value), _frac_str(rep.clipped),
                             str(rep.regime_ok).lower(), rep.regime_note])
        _emit_csv(header, rows, sys.stdout)
    else:
        rows = []
        for key, rep in reports.items():
            if rep is None:
                rows.append((key, "n/a (sphere release undefined for this beta)"))
            else:
                flag = "" if rep.regime_ok else f"  [outside regime: {rep.regime_note}]"
                rows.append((key, f"{float(rep.clipped):.6g} ({_frac_str(rep.value)}){flag}"))
        _emit_table(rows, sys.stdout)
    return 0


# -- audit --------------------------------------------------------------------

def _build_design(args: argparse.Namespace) -> PoolingDesign:
    if getattr(args, "design_file", None):
        try:
            with open(args.design_file) as fh:
                design = PoolingDesign.from_json(json.load(fh))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot load design from {args.design_file!r}: {exc}") from None
        if args.n is not None and args.n != design.n:
            raise UsageError(f"--n {args.n} does not match the design's ground set ({design.n})")
        args.n = design.n
        return design
    if args.gt == "identity":
        return identity_design(args.n)
    if args.gt == "bernoulli":
        _require(args, "tests", "p", "design_seed")
        return bernoulli_design(args.n, args.tests, args.p, Random(args.design_seed))
    raise UsageError(f"unknown design {args.gt!r}; expected identity or bernoulli")


def _build_noise(args: argparse.Namespace):
    name = args.noise or "noiseless"
    if name == "noiseless":
        return Noiseless()
    if name == "before":
        return NoiseBefore(args.beta)
    if name == "induced":
        return NoiseAfter(ContaminationInduced(args.beta))
    if name == "after":
        _require(args, "q0", "q1", "q2")
        return NoiseAfter(IndependentOverwrite(
            _parse_fraction(args.q0), _parse_fraction(args.q1), _parse_fraction(args.q2)
        ))
    raise UsageError(f"unknown noise {name!r}; expected noiseless, before, after or induced")


def _build_mechanism(args: argparse.Namespace) -> Mechanism:
    if args.mech_file:
        try:
            with open(args.mech_file) as fh:
                return mechanism_from_json(json.load(fh))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot load mechanism from {args.mech_file!r}: {exc}") from None
    _require(args, "mech", "n", "d", "beta")
    try:
        return make_mechanism(args.mech, args.n, args.d, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_audit(args: argparse.Namespace) -> int:
    gt_requested = args.gt or args.design_file
    if (args.mech or args.mech_file) and gt_requested:
        raise UsageError("give either --mech/--mech-file or --gt/--design-file, not both")
    t, t_info = _resolve_t(args)
    payload: dict = {"mode": args.mode, **t_info}

    if gt_requested:
        if (args.noise or "noiseless") in ("before", "induced"):
            _require(args, "beta")
        if args.mode == "mc":
            raise UsageError("--mode mc applies to --mech audits only")
        if not args.design_file:
            _require(args, "n")
        design = _build_design(args)  # a design file fills in --n
        _require(args, "n", "d")
        noise = _build_noise(args)
        report = audit_testing_privacy(
            design, noise, args.n, args.d, t,
            pairs=args.pairs, outcome_cap=args.outcome_cap, pair_cap=args.pair_cap,
        )
        payload.update({
            "design": args.gt or f"file:{args.design_file}",
            "noise": args.noise or "noiseless",
            "n": args.n, "d": args.d, "beta": args.beta, **report.to_json(),
        })
    else:
        m = _build_mechanism(args)
        payload.update({"mechanism": m.to_json()})
        if args.mode == "mc":
            _require(args, "seed", "samples")
            pair = canonical_pair(m.n, m.d)
            if args.ei is not None or args.ej is not None:
                _require(args, "ei", "ej")
                pair = (_parse_items(args.ei, m.n), _parse_items(args.ej, m.n))
            report = mc_estimate_delta(m, pair, float(t), args.samples, Random(args.seed))
            payload.update({"seed": args.seed, **report.to_json()})
        else:
            report = audit_privacy(
                m, t, pairs=args.pairs, outcome_cap=args.outcome_cap, pair_cap=args.pair_cap
            )
            payload.update(report.to_json())

    if args.format == "json":
        _emit_json(payload, sys.stdout)
    else:
        rows = [(k, json.dumps(v) if isinstance(v, (dict, list)) else str(v))
                for k, v in sorted(payload.items())]
        _emit_table(rows, sys.stdout)
    return 0


# -- sample -------------------------------------------------------------------

def cmd_sample(args: argparse.Namespace) -> int:
    m = _build_mechanism(args)
    _require(args, "seed")
    e = _parse_items(args.e, m.n) if args.e else Subset(m.n, tuple(range(m.d)))
    rng = Random(args.seed)
    draws = [m.sample(e, rng).to_json() for _ in range(args.count)]
    if args.format == "json":
        _emit_json({"mechanism": m.to_json(), "input": e.to_json(),
                    "seed": args.seed, "draws": draws}, sys.stdout)
    else:
        for i, draw in enumerate(draws):
            sys.stdout.write(f"{i}\t{json.dumps(draw)}\n")
    return 0


# -- gt (simulate) ------------------------------------------------------------

def cmd_gt(args: argparse.Namespace) -> int:
    if not args.design_file:
        _require(args, "n")
    if (args.noise or "noiseless") in ("before", "induced"):
        _require(args, "beta")
    design = _build_design(args)  # a design file fills in --n
    _require(args, "n", "d", "seed")
    if args.save_design:
        with open(args.save_design, "w") as fh:
            json.dump(design.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    noise = _build_noise(args)
    e = _parse_items(args.e, args.n) if args.e else Subset(args.n, tuple(range(args.d)))
    if len(e) != args.d:
        raise UsageError(f"--e has {len(e)} items but --d is {args.d}")
    rng = Random(args.seed)
    trials = [simulate(design, e, noise, rng) for _ in range(args.trials)]

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        if args.format == "json":
            _emit_json({
                "design": design.to_json(), "noise": args.noise or "noiseless",
                "input": e.to_json(), "seed": args.seed,
                "trials": [
                    {"trial": i, "syndrome": str(tr.syndrome),
                     "decoded": tr.decoded.to_json(), "distance": tr.distance_to_e}
                    for i, tr in enumerate(trials)
                ],
            }, out)
        else:
            header = ["trial", "syndrome", "decoded", "distance"]
            rows = [[str(i), str(tr.syndrome), json.dumps(tr.decoded.to_json(), separators=(",", ":")),
                     str(tr.distance_to_e)] for i, tr in enumerate(trials)]
            _emit_csv(header, rows, out)
    finally:
        if args.out:
            out.close()
    return 0


# -- sweep --------------------------------------------------------------------

_SWEEP_HEADER = [
    "n", "d", "beta", "target", "t",
    "delta_star", "delta_star_decimal", "eps1", "eps1_decimal",
    "lower_any", "lower_any_regime", "upper_sphere",
    "lower_independent", "lower_independent_regime",
    "upper_union", "upper_union_regime",
]


def _sweep_cell(payload: tuple) -> list[str]:
    (n, d, beta, target, t_num, t_den, noise_name, outcome_cap, pair_cap) = payload
    t = Fraction(t_num, t_den)
    if target.startswith("gt:"):
        design = identity_design(n)
        noise = NoiseBefore(beta) if noise_name == "before" else Noiseless()
        priv = audit_testing_privacy(design, noise, n, d, t,
                                     outcome_cap=outcome_cap, pair_cap=pair_cap)
        acc = audit_testing_accuracy(design, noise, n, d, beta,
                                     outcome_cap=outcome_cap, input_cap=pair_cap)
    else:
        m = make_mechanism(target, n, d, beta)
        priv = audit_privacy(m, t, outcome_cap=outcome_cap, pair_cap=pair_cap)
        acc = audit_accuracy(m, outcome_cap=outcome_cap, input_cap=pair_cap)
    reports = bounds_mod.evaluate_all(n, d, beta)
    lo_any = reports["lower_any"]
    up_sphere = reports["upper_sphere"]
    lo_ind = reports["lower_independent"]
    up_union = reports["upper_union"]
    return [
        str(n), str(d), str(beta), target, _frac_str(t),
        _frac_str(priv.delta_star), repr(float(priv.delta_star)),
        _frac_str(acc.eps1_exact), repr(float(acc.eps1_exact)),
        _frac_str(lo_any.value), str(lo_any.regime_ok).lower(),
        _frac_str(up_sphere.value) if up_sphere else "n/a",
        _frac_str(lo_ind.value), str(lo_ind.regime_ok).lower(),
        _frac_str(up_union.value), str(up_union.regime_ok).lower(),
    ]


def cmd_sweep(args: argparse.Namespace) -> int:
    _require(args, "n", "d", "beta", "out")
    if args.mech and args.gt:
        raise UsageError("give either --mech or --gt, not both")
    if args.gt and args.gt != "identity":
        raise UsageError("sweep supports --gt identity only")
    if not args.mech and not args.gt:
        raise UsageError("missing required flag --mech (or --gt identity)")
    target = f"gt:{args.gt}" if args.gt else args.mech
    noise_name = args.noise or "noiseless"
    if args.gt and noise_name not in ("noiseless", "before"):
        raise UsageError("sweep supports --noise noiseless or before")

    t, _ = _resolve_t(args)
    cells = [
        (n, d, beta, target, t.numerator, t.denominator, noise_name,
         args.outcome_cap, args.pair_cap)
        for n in _parse_grid_axis(args.n)
        for d in _parse_grid_axis(args.d)
        for beta in _parse_grid_axis(args.beta)
    ]
    cells = [c for c in cells if 0 < c[1] < c[0] and c[2] >= 1]
    if not cells:
        raise UsageError("empty sweep grid")
    # validate cells upfront so failures never leave a partial file behind
    for n, d, beta, *_ in cells:
        if not target.startswith("gt:"):
            try:
                make_mechanism(target, n, d, beta)
            except ValueError as exc:
                raise UsageError(f"grid cell (n={n}, d={d}, beta={beta}): {exc}") from None

    out_dir = os.path.dirname(os.path.abspath(args.out))
    fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=".csv.tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            if args.jobs and args.jobs > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    rows = list(pool.map(_sweep_cell, cells))
            else:
                rows = [_sweep_cell(cell) for cell in cells]
            _emit_csv(_SWEEP_HEADER, rows, fh)
        os.replace(tmp_path, args.out)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    sys.stdout.write(f"wrote {len(cells)} rows to {args.out}\n")
    return 0


# -- parser -------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser, grid_axes: bool = False) -> None:
    sp.add_argument("--config", help="JSON config file; flags override its entries")
    if grid_axes:
        sp.add_argument("--n", help="ground-set sizes: '6', '5:9' or '5,7,9'")
        sp.add_argument("--d", help="secret sizes (same grammar); infeasible cells d >= n are skipped")
        sp.add_argument("--beta", help="distortion radii (same grammar)")
    else:
        sp.add_argument("--n", type=int, help="ground-set size")
        sp.add_argument("--d", type=int, help="secret subset size")
        sp.add_argument("--beta", type=int, help="distortion radius / noise size")
    sp.add_argument("--format", choices=["table", "json", "csv"], default="table")
    sp.add_argument("--outcome-cap", type=int, default=DEFAULT_OUTCOME_CAP,
                    help="max outcomes per exact distribution")
    sp.add_argument("--pair-cap", type=int, default=DEFAULT_PAIR_CAP,
                    help="max neighbor pairs / inputs per full scan")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privset",
        description="Private subset release and noisy pooled testing, with exact audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mech_names = ", ".join(sorted(BASE_MECHANISMS))

    p = sub.add_parser(
        "bounds", help="closed-form leakage bounds at one parameter point",
        epilog="example: privset bounds --n 6 --d 2 --beta 1 --format json",
    )
    _add_common(p)
    p.add_argument("--eps1", type=float, help="accuracy slack (default 0)")
    p.add_argument("--eps2", type=float, help="multiplicative privacy slack (default 0)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser(
        "audit", help="exact or Monte-Carlo leakage audit",
        epilog="examples: privset audit --mech a1ball --n 6 --d 2 --beta 1 --format json | "
               "privset audit --gt identity --noise before --n 6 --d 2 --beta 1",
    )
    _add_common(p)
    p.add_argument("--mech", help=f"mechanism kind: {mech_names}")
    p.add_argument("--mech-file", help="JSON mechanism descriptor (supports clamp/resize wrappers)")
    p.add_argument("--gt", choices=["identity", "bernoulli"], help="audit a pooled-testing design instead")
    p.add_argument("--design-file", help="JSON pooling design {n, pools: [[int]]} to audit")
    p.add_argument("--noise", choices=["noiseless", "before", "after", "induced"])
    p.add_argument("--q0", help="force-0 probability (fraction, --noise after)")
    p.add_argument("--q1", help="force-1 probability (fraction, --noise after)")
    p.add_argument("--q2", help="pass-through probability (fraction, --noise after)")
    p.add_argument("--tests", type=int, help="pool count (bernoulli designs)")
    p.add_argument("--p", type=float, help="inclusion probability (bernoulli designs)")
    p.add_argument("--design-seed", type=int, help="seed for bernoulli design generation")
    p.add_argument("--t", help="exact multiplier t >= 1 as a fraction, e.g. 3/2 (overrides --eps2)")
    p.add_argument("--eps2", type=float, help="multiplicative slack; t = e^eps2 rationalized")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int, help="draw count per input (mc mode)")
    p.add_argument("--seed", type=int, help="rng seed (required in mc mode)")
    p.add_argument("--ei", help="first input, e.g. 0,1 (mc mode; default canonical)")
    p.add_argument("--ej", help="second input (mc mode; default canonical neighbor)")
    p.add_argument("--pairs", choices=["auto", "fast", "full"], default="auto",
                   help="neighbor-pair scan strategy")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser(
        "sample", help="draw mechanism outputs",
        epilog="example: privset sample --mech a2 --n 6 --d 2 --beta 1 --e 0,1 --seed 7 --count 5",
    )
    _add_common(p)
    p.add_argument("--mech", help=f"mechanism kind: {mech_names}")
    p.add_argument("--mech-file", help="JSON mechanism descriptor")
    p.add_argument("--e", help="input subset as comma-separated items (default 0..d-1)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, help="rng seed (required)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser(
        "gt", help="simulate collector-to-lab pooled-testing rounds",
        epilog="example: privset gt --design identity --noise before --n 6 --d 2 --beta 1 "
               "--seed 7 --trials 20 --format csv",
    )
    _add_common(p)
    p.add_argument("--design", dest="gt", choices=["identity", "bernoulli"], default="identity")
    p.add_argument("--design-file", help="JSON pooling design {n, pools: [[int]]} to simulate")
    p.add_argument("--save-design", help="write the design used to this JSON file")
    p.add_argument("--noise", choices=["noiseless", "before", "after", "induced"])
    p.add_argument("--q0", help="force-0 probability (fraction, --noise after)")
    p.add_argument("--q1", help="force-1 probability (fraction, --noise after)")
    p.add_argument("--q2", help="pass-through probability (fraction, --noise after)")
    p.add_argument("--tests", type=int, help="pool count (bernoulli designs)")
    p.add_argument("--p", type=float, help="inclusion probability (bernoulli designs)")
    p.add_argument("--design-seed", type=int, help="seed for bernoulli design generation")
    p.add_argument("--e", help="true subset as comma-separated items (default 0..d-1)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, help="rng seed (required)")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.set_defaults(func=cmd_gt, format="csv")

    p = sub.add_parser(
        "sweep", help="audit + bounds over a parameter grid, written as CSV",
        epilog="example: privset sweep --mech a1ball --n 5:9 --d 2 --beta 1 --out sweep.csv",
    )
    _add_common(p, grid_axes=True)
    p.add_argument("--mech", help=f"mechanism kind: {mech_names}")
    p.add_argument("--gt", choices=["identity"], help="sweep the identity pooled-testing pipeline")
    p.add_argument("--noise", choices=["noiseless", "before"])
    p.add_argument("--t", help="exact multiplier t >= 1 as a fraction (overrides --eps2)")
    p.add_argument("--eps2", type=float, help="multiplicative slack; t = e^eps2 rationalized")
    p.add_argument("--out", help="output CSV path (written atomically)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers across grid cells")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)

    # config file pre-pass: its entries become defaults, so explicit flags win
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        try:
            with open(known.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            sys.stderr.write(f"error: cannot read config {known.config!r}: {exc}\n")
            return 2
        if not isinstance(config, dict):
            sys.stderr.write("error: config file must hold a JSON object\n")
            return 2
        for action in parser._subparsers._group_actions:  # noqa: SLF001
            for sp in action.choices.values():
                dests = {a.dest for a in sp._actions}  # noqa: SLF001
                sp.set_defaults(**{k: v for k, v in config.items() if k in dests})

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        # ValueError here means CLI-supplied parameters violated a library
        # precondition (e.g. subset items out of range)
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except CapExceededError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
