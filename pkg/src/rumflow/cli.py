"""Command line front end.

Exit codes: 0 success (rationalizable, member), 1 the data fails the test,
2 usage, input or guard errors.  Set ``RUMFLOW_WORKERS`` to spread bound
computations over processes; output order never depends on it.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import document
from .bounds import (
    interval_rows,
    intervals_csv,
    intervals_table,
    naive_bounds,
    ru_bounds,
    ru_bounds_decomposed,
)
from .errors import MenuOutsideRemarkScope, RumflowError
from .model import IncompleteDataset, Instance, build_instance, format_decimal, format_fraction
from .mr import check_mr
from .network import build_network, to_dot
from .oracle import (
    DATA_MODES,
    MENU_MODES,
    GeneratorConfig,
    brute_force_rationalizable,
    fit_logit,
    identified_set_oracle,
    sample_instance,
)
from .theorem import RationalizabilityReport, check_theorem, make_test_collection
from .witness import witness_condition_i, witness_condition_ii

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
WORKERS_ENV = "RUMFLOW_WORKERS"


class UsageError(RumflowError):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers

def workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return k


def _names(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_instance_spec(text: str) -> Instance:
    """``"a,b,c,d;c,d"``: alternatives, then hidden ones, every menu offered."""
    parts = text.split(";")
    if len(parts) not in (1, 2):
        raise UsageError(f"instance spec must be 'alternatives;hidden', got {text!r}")
    alts = _names(parts[0])
    hidden = _names(parts[1]) if len(parts) == 2 else []
    return build_instance(alts, hidden, "all")


def parse_pair_spec(inst: Instance, text: str):
    """``"{a,b}:b"`` or ``"a,b:b"``."""
    if ":" not in text:
        raise UsageError(f"pair spec must be 'menu:alternative', got {text!r}")
    menu, alt = text.rsplit(":", 1)
    menu = menu.strip()
    if menu.startswith("{") and menu.endswith("}"):
        menu = menu[1:-1]
    names = _names(menu)
    if not names:
        raise UsageError("pair spec needs a nonempty menu")
    return inst.pair(names, alt.strip())


_SETS = re.compile(r"\{([^{}]*)\}")


def parse_target_spec(inst: Instance, text: str):
    """``"A={a};E={c},{d}"``: observable base and minimal hidden sets."""
    fields = {}
    for part in text.split(";"):
        if "=" not in part:
            raise UsageError(f"target spec must look like 'A={{..}};E={{..}}', got {text!r}")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    if set(fields) != {"A", "E"}:
        raise UsageError("target spec needs exactly the fields A and E")
    base = _SETS.fullmatch(fields["A"])
    if base is None:
        raise UsageError(f"A must be a single set in braces, got {fields['A']!r}")
    mins = _SETS.findall(fields["E"])
    if not mins or _SETS.sub("", fields["E"]).replace(",", "").strip():
        raise UsageError(f"E must be a comma separated list of sets in braces, got {fields['E']!r}")
    base_mask = inst.mask(_names(base.group(1)))
    if base_mask & inst.unobservable:
        raise UsageError("A must consist of observable alternatives")
    minimal = [inst.mask(_names(m)) for m in mins]
    if any(m & ~inst.unobservable for m in minimal):
        raise UsageError("E must consist of hidden alternatives")
    return make_test_collection(inst, base_mask, minimal)


# ---------------------------------------------------------------------------
# rendering

def _q(v: Fraction, digits: int) -> str:
    return f"{format_fraction(v)} ({format_decimal(v, digits)})"


def render_report(rep: RationalizabilityReport, digits: int = 6, certificate: bool = False) -> str:
    inst = rep.instance
    menus = "all" if inst.all_menus else str(len(inst.menus))
    lines = [
        f"verdict: {'rationalizable' if rep.verdict else 'not rationalizable'}",
        f"alternatives: {' '.join(map(str, inst.alternatives))}",
        f"hidden: {' '.join(inst.names(inst.unobservable)) or '-'}",
        f"menus: {menus}",
        f"negative polynomials: {len(rep.condition_i_violations)}",
    ]
    for d, x, v in rep.condition_i_violations:
        lines.append(f"  K({inst.fmt_set(d)}, {inst.alternatives[x]}) = {_q(v, digits)}")
    lines.append(f"negative collections: {len(rep.condition_ii_violations)}")
    for tc, v in rep.condition_ii_violations:
        lines.append(f"  delta[{tc.describe(inst)}] = {_q(v, digits)}")
    if certificate and rep.certificate is not None:
        lines.append("certificate:")
        for r, w in sorted(rep.certificate.weights.items()):
            lines.append(f"  {rep.certificate.fmt_ranking(r)}  {_q(w, digits)}")
    return "\n".join(lines) + "\n"


def _report_document(rep: RationalizabilityReport, certificate: bool) -> dict:
    return {"instance": document.instance_document(rep.instance), **rep.to_dict(certificate=certificate)}


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _out(text: str):
    sys.stdout.write(text)


def _err(text: str):
    sys.stderr.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# commands

def cmd_check(args) -> int:
    ds = document.load(args.input)
    rep = check_theorem(ds, certificate=args.certificate)
    _out(render_report(rep, args.precision, args.certificate))
    if args.report:
        document.write_atomic(args.report, _dump_json(_report_document(rep, args.certificate)))
    if args.dot:
        document.write_atomic(args.dot, to_dot(build_network(ds)))
    return EXIT_OK if rep.verdict else EXIT_FAIL


def _one_interval(job):
    ds, pair, method = job
    d, x = pair
    if method == "monolithic":
        return ru_bounds(ds, d, x)
    if method == "decomposed":
        return ru_bounds_decomposed(ds, d, x)
    return identified_set_oracle(ds, d, x)


def compute_intervals(ds: IncompleteDataset, pairs, method: str) -> list:
    jobs = [(ds, p, method) for p in pairs]
    k = workers()
    if k > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=k) as pool:
            return list(pool.map(_one_interval, jobs))
    return [_one_interval(j) for j in jobs]


def _naive(ds: IncompleteDataset, pairs) -> dict:
    out = {}
    for d, x in pairs:
        try:
            out[(d, x)] = naive_bounds(ds, d, x)
        except MenuOutsideRemarkScope:
            pass
    return out


def _requested_pairs(ds: IncompleteDataset, args) -> list:
    inst = ds.instance
    if args.all_hidden:
        return list(inst.hidden_pairs)
    pairs = []
    for spec in args.pair:
        d, x = parse_pair_spec(inst, spec)
        if inst.is_observable(d, x):
            raise UsageError(f"pair {inst.fmt_pair((d, x))} is observable, not hidden")
        pairs.append((d, x))
    return pairs


def _emit_intervals(ds: IncompleteDataset, intervals, args) -> int:
    pairs = [iv.pair for iv in intervals]
    naive = _naive(ds, pairs)
    rows = interval_rows(ds, intervals, naive)
    csv_text = intervals_csv(rows)
    if args.csv:
        document.write_atomic(args.csv, csv_text)
        _out(intervals_table(ds, intervals, naive, args.precision))
    else:
        _out(csv_text)
    if args.plot:
        from .plotting import render_intervals  # matplotlib is optional

        render_intervals(rows, args.plot)
    return EXIT_OK


def _bounds(args, method: str) -> int:
    ds = document.load(args.input)
    pairs = _requested_pairs(ds, args)
    rep = check_theorem(ds, certificate=False)
    if not rep.verdict:
        _err("dataset is not rationalizable; no bounds")
        _out(render_report(rep, args.precision))
        return EXIT_FAIL
    return _emit_intervals(ds, compute_intervals(ds, pairs, method), args)


def cmd_bounds(args) -> int:
    return _bounds(args, args.method)


def cmd_witness(args) -> int:
    inst = parse_instance_spec(args.instance)
    if args.target:
        tc = parse_target_spec(inst, args.target)
        ds = witness_condition_ii(inst, tc)
    else:
        ds = witness_condition_i(inst, parse_pair_spec(inst, args.pair))
    rep = check_theorem(ds, certificate=False)
    if rep.violation_count != 1:
        raise RuntimeError("witness failed its own check")
    text = document.dumps(ds)
    if args.out:
        document.write_atomic(args.out, text)
    else:
        _out(text)
    if rep.condition_i_violations:
        d, x, v = rep.condition_i_violations[0]
        line = f"violated: K({inst.fmt_set(d)}, {inst.alternatives[x]}) = {_q(v, args.precision)}"
    else:
        tc, v = rep.condition_ii_violations[0]
        line = f"violated: delta[{tc.describe(inst)}] = {_q(v, args.precision)}"
    (_out if args.out else _err)(line + "\n")
    return EXIT_OK


def cmd_gen(args) -> int:
    out = Path(args.out)
    for k in range(args.count):
        cfg = GeneratorConfig(
            n=args.n,
            hidden=args.hidden,
            menus=args.menus,
            mode=args.mode,
            magnitude=Fraction(args.magnitude),
            seed=args.seed + k,
            numeric_names=args.numeric_names,
        )
        _, ds, _ = sample_instance(cfg)
        path = out / f"instance-{cfg.seed:05d}.json"
        document.dump(ds, path, meta={"generator": cfg.to_dict()})
        _out(f"{path}\n")
    return EXIT_OK


def cmd_mr(args) -> int:
    ds = document.load(args.input)
    v = check_mr(ds, args.m, budget=args.budget, seed=args.seed)
    mode = "exhaustive" if v.exhaustive else "sampled, not exhaustive"
    _out(f"m: {v.m}\nmode: {mode}\nexamined: {v.examined}\nmember: {'yes' if v.member else 'no'}\n")
    if v.violation is not None:
        _out(f"violation: {v.violation.describe(ds.instance)}\nvalue: {_q(v.value, args.precision)}\n")
    return EXIT_OK if v.member else EXIT_FAIL


def cmd_calibrate(args) -> int:
    ds = document.load(args.input)
    fit = fit_logit(ds, grid=10 ** args.grid_digits)
    rep = check_theorem(fit.dataset, certificate=False)
    if not rep.verdict:
        raise RuntimeError("calibrated dataset failed the exact check")
    meta = {
        "logit": {
            "params": {k: repr(v) for k, v in fit.params.items()},
            "loss": repr(fit.loss),
            "iterations": fit.iterations,
            "converged": fit.converged,
        }
    }
    document.dump(fit.dataset, args.out, meta=meta)
    _out(f"loss: {fit.loss:.6e}\niterations: {fit.iterations}\nconverged: {'yes' if fit.converged else 'no'}\n")
    for k, v in fit.params.items():
        _out(f"a[{k}] = {v:.9f}\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    ds = document.load(args.input)
    if args.all_hidden or args.pair:
        return _bounds(args, "oracle")
    mu = brute_force_rationalizable(ds)
    _out(f"verdict: {'rationalizable' if mu is not None else 'not rationalizable'}\n")
    if mu is not None and args.certificate:
        _out("certificate:\n")
        for r, w in sorted(mu.weights.items()):
            _out(f"  {mu.fmt_ranking(r)}  {_q(w, args.precision)}\n")
    return EXIT_OK if mu is not None else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rumflow", description="Random utility tests for choice data with hidden alternatives.")
    sub = p.add_subparsers(dest="command", required=True)

    def precision(sp):
        sp.add_argument("--precision", type=int, default=6, help="decimal digits in tables (default 6)")

    def pair_args(sp, required: bool):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--pair", action="append", default=[], help="hidden pair 'menu:alternative', e.g. '{a,b}:c' (repeatable)")
        g.add_argument("--all-hidden", action="store_true", help="every hidden pair")
        sp.add_argument("--csv", help="write the CSV here and print a table instead")
        sp.add_argument("--plot", help="render an interval chart (needs matplotlib)")

    sp = sub.add_parser("check", help="decide rationalizability")
    sp.add_argument("input")
    sp.add_argument("--certificate", action="store_true", help="include a rationalizing distribution")
    sp.add_argument("--report", help="write the structured report (JSON) here")
    sp.add_argument("--dot", help="write the lattice network in DOT format here")
    precision(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bounds", help="bounds on hidden choice frequencies")
    sp.add_argument("input")
    pair_args(sp, required=True)
    sp.add_argument("--method", choices=("monolithic", "decomposed", "oracle"), default="monolithic")
    precision(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("witness", help="dataset violating exactly one inequality")
    sp.add_argument("--instance", required=True, help="'alternatives;hidden', e.g. 'a,b,c,d;c,d'")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--target", help="test collection, e.g. 'A={a};E={c},{d}'")
    g.add_argument("--pair", help="polynomial pair, e.g. '{a,b}:b'")
    sp.add_argument("--out", help="output document (default: stdout)")
    precision(sp)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("gen", help="write a reproducible corpus of synthetic datasets")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--hidden", type=int, default=2)
    sp.add_argument("--menus", choices=MENU_MODES, default="full")
    sp.add_argument("--mode", choices=DATA_MODES, default="from-random-mu")
    sp.add_argument("--magnitude", default="1/10")
    sp.add_argument("--numeric-names", action="store_true")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("mr", help="bounded-multiplicity McFadden-Richter test")
    sp.add_argument("input")
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--budget", type=int, help="sample this many multisets when the sweep is too large")
    sp.add_argument("--seed", type=int, default=0)
    precision(sp)
    sp.set_defaults(func=cmd_mr)

    sp = sub.add_parser("calibrate", help="fit a logit model and write its snapped dataset")
    sp.add_argument("input")
    sp.add_argument("--out", required=True)
    sp.add_argument("--grid-digits", type=int, default=9, help="snap to multiples of 10^-digits (default 9)")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("oracle", help="brute force over rankings, for cross-checks")
    sp.add_argument("input")
    sp.add_argument("--certificate", action="store_true")
    pair_args(sp, required=False)
    precision(sp)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "precision", 6) < 0:
        parser.error("--precision must be nonnegative")
    try:
        return args.func(args)
    except (ValueError, ImportError) as exc:
        # domain errors all derive from ValueError
        _err(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
