"""Command line entry point: ``rqsm {sweep,design,abep,verify}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import re
import sys

from .analysis import abep_asymptotic, abep_bound_distances
from .constellation import conventional, from_distances
from .designer import design
from .harness import DETECTORS, SOURCES, ExperimentConfig, compare_detectors, emit, sweep
from .ris_core import large_n_report, verify_element_means


def _floats(values) -> list:
    out = []
    for v in values:
        out.extend(float(x) for x in str(v).split(",") if x.strip())
    return out


def _common(p, snr_required=False):
    p.add_argument("--config", help="JSON file with experiment keys; flags override it")
    p.add_argument("--n", type=int, dest="N", help="number of RIS elements")
    p.add_argument("--nr", type=int, dest="Nr", help="number of receive antennas")
    p.add_argument("--m", type=int, dest="M", help="QAM order")
    p.add_argument("--es", type=float, help="average symbol energy")
    p.add_argument("--snr-db", nargs="+", dest="snr_db", required=snr_required,
                   help="Es/N0 values in dB, space or comma separated")


def _constellation_flags(p):
    p.add_argument("--constellation", choices=SOURCES)
    p.add_argument("--distances", nargs="+", help="normalized distances d0 d1 ... for --constellation explicit")
    p.add_argument("--method", choices=("kkt", "grid"), dest="design_method", help="design route for optimized")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rqsm", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo BER over an SNR grid")
    _common(p)
    _constellation_flags(p)
    p.add_argument("--detector", choices=DETECTORS + ("both",))
    p.add_argument("--trials", type=int)
    p.add_argument("--target-errors", type=int, dest="target_errors",
                   help="stop a point after this many bit errors (0 disables)")
    p.add_argument("--seed", type=int)
    p.add_argument("--block-size", type=int, dest="block_size")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", default=".", help="output directory, or a .csv path for a single detector")

    p = sub.add_parser("design", help="optimized PAM distances per SNR")
    _common(p, snr_required=True)
    p.add_argument("--method", choices=("kkt", "grid"), default="kkt")
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("abep", help="analytic bound and asymptotic approximation")
    _common(p, snr_required=True)
    _constellation_flags(p)
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("verify", help="Monte Carlo checks of the large-N link statistics")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, dest="N", default=256)
    return ap


def _experiment(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    for key in ("N", "Nr", "M", "es", "detector", "constellation", "design_method", "trials",
                "seed", "block_size", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if getattr(args, "snr_db", None) is not None:
        data["snr_db"] = _floats(args.snr_db)
    if getattr(args, "distances", None) is not None:
        data["distances"] = _floats(args.distances)
        data.setdefault("constellation", "explicit")
    if getattr(args, "target_errors", None) is not None:
        data["target_errors"] = args.target_errors or None
    if data.get("detector") == "both":
        data["detector"] = "gd"
        data["_both"] = True
    both = data.pop("_both", False)
    return ExperimentConfig.from_dict(data), both


def _writer(path):
    fh = open(path, "w", newline="") if path else sys.stdout
    return fh, csv.writer(fh, lineterminator="\n")


def cmd_sweep(args) -> int:
    cfg, both = _experiment(args)
    curves = compare_detectors(cfg) if both else (sweep(cfg),)
    single = args.out.endswith(".csv") and len(curves) == 1
    if not single:
        os.makedirs(args.out, exist_ok=True)
    for curve in curves:
        path = args.out if single else os.path.join(args.out, f"ber_{curve.detector}_{cfg.constellation}_M{cfg.M}.csv")
        emit(curve, path)
        for p in curve.points:
            flag = " low-confidence" if p.lowconf else ""
            print(f"{curve.detector} snr={p.snr_db:g} dB ber={p.ber:.4g} errors={p.bit_errors}{flag}")
        print(f"wrote {path}")
    return 0


def cmd_design(args) -> int:
    cfg, _ = _experiment(args)
    fh, w = _writer(args.out)
    k2 = math.isqrt(cfg.M) // 2
    w.writerow(["snr_db"] + [f"d{i}" for i in range(k2)] + ["abep", "method", "certified"])
    for s in cfg.snr_db:
        r = design(cfg.system(s), method=args.method)
        w.writerow([s] + [f"{d:.6f}" for d in r.distances] + [f"{r.abep:.6e}", r.method, int(r.certified)])
    if args.out:
        fh.close()
    return 0


def cmd_abep(args) -> int:
    cfg, _ = _experiment(args)
    fh, w = _writer(args.out)
    w.writerow(["snr_db", "abep_bound", "abep_asymptotic"])
    for s in cfg.snr_db:
        sysc = cfg.system(s)
        if cfg.constellation == "conventional":
            d = conventional(cfg.M, cfg.es).distances
        elif cfg.constellation == "explicit":
            d = from_distances(cfg.distances, cfg.M, cfg.es).distances
        else:
            d = design(sysc, method=cfg.design_method).distances
        bound = abep_bound_distances(d, sysc)[0]
        asym = abep_asymptotic(sysc, d[0], d[1]) if cfg.M >= 16 else float("nan")
        w.writerow([s, f"{bound:.6e}", f"{asym:.6e}"])
    if args.out:
        fh.close()
    return 0


def cmd_verify(args) -> int:
    rows = large_n_report(Ns=sorted({64, args.N}), trials=args.trials, seed=args.seed, gain_N=args.N)
    rows += verify_element_means(1.0, args.N, args.trials, args.seed)
    print("quantity,target,estimate,rel_err,pass")
    for r in rows:
        print(r.csv())
    failed = [r for r in rows if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed", file=sys.stderr)
        return 1
    return 0


_NUMBER = re.compile(r"^-?(\d|\.\d)[\d.,eE+-]*$")


def _join_numeric(argv):
    """Fold the values after list flags into one token so negative numbers are not read as options."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--snr-db", "--distances"):
            vals = []
            i += 1
            while i < len(argv) and _NUMBER.match(argv[i]):
                vals.append(argv[i])
                i += 1
            out.append(f"{tok}={','.join(vals)}")
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = _join_numeric(sys.argv[1:] if argv is None else list(argv))
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return {"sweep": cmd_sweep, "design": cmd_design, "abep": cmd_abep, "verify": cmd_verify}[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
