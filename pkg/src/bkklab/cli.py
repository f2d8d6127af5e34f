"""Command-line front end.

Exit status: 0 success, 1 verification failure, 2 bad input (argument,
config or norm parse errors, unsupported combinations), 3 numerical
non-convergence.  Reports are JSON with sorted keys and no timestamps, so
one config and one seed always give the same bytes.
"""
import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .banach import NormSpec, symmetrize
from .crofton import crofton_density_for, zonoid_check
from .errors import (InvalidArgument, InvalidBody, NonConvergence, PreconditionError,
                     UnsupportedMode)
from .scenario import get_scenario, load_scenario, tomllib
from .solver import estimate_average, mixed_volume_side, verify_bkk

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("symmetrize", "crofton-density", "zonoid-check", "mixed-volume",
            "average-solutions", "verify", "selftest")


def _plain(obj):
    """numpy scalars/arrays to JSON-native values; non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dumps(report):
    return json.dumps(_plain(report), sort_keys=True, indent=2) + "\n"


def _write(out_dir, stem, report):
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.json"
    path.write_text(dumps(report))
    return path


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


# -- input resolution ---------------------------------------------------------

def _read_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidArgument(f"{path}: {exc}") from exc
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}") from exc


def _norm(args):
    if args.norm:
        return NormSpec.parse(args.norm)
    if args.config:
        cfg = _read_config(args.config).get("norm")
        if isinstance(cfg, str):
            return NormSpec.parse(cfg)
        if isinstance(cfg, dict):
            return NormSpec.from_config(cfg)
        raise InvalidArgument(f"{args.config}: no 'norm' entry")
    raise InvalidArgument(f"{args.command} needs --norm or --config")


def _scenario(args):
    if args.config:
        sc = load_scenario(args.config)
    elif args.scenario:
        sc = get_scenario(args.scenario)
    else:
        raise InvalidArgument(f"{args.command} needs --scenario or --config")
    kw = {k: getattr(args, k) for k in ("samples", "grid", "seed") if getattr(args, k) is not None}
    return sc.with_(**kw) if kw else sc


def _head(args, extra):
    return dict(command=args.command, version=__version__, **extra)


# -- commands -------------------------------------------------------------------

def cmd_symmetrize(args):
    norm = _norm(args)
    s = symmetrize(norm, args.resolution)
    e = np.eye(norm.dim)
    vals = s.h_symm.values
    report = _head(args, {
        "norm": norm.describe(),
        "resolution": s.resolution,
        "grid_points": len(vals),
        "h_symm_axes": [float(s(v)) for v in e],
        "h_symm_diagonal": float(s(np.ones(norm.dim))),
        "h_symm_min": float(vals.min()),
        "h_symm_max": float(vals.max()),
    })
    print(f"h_symm(e1) = {report['h_symm_axes'][0]:.6f}  "
          f"h_symm(1,...,1) = {report['h_symm_diagonal']:.6f}")
    if args.format == "csv":
        s.h_symm.to_csv(args.out_dir / "symmetrize.csv")
    return report, EXIT_OK


def cmd_crofton(args):
    norm = _norm(args)
    phi = crofton_density_for(norm, args.resolution)
    report = _head(args, {
        "norm": norm.describe(),
        "grid_points": len(phi.values),
        "degree": phi.degree,
        "residual": phi.residual,
        "fit_residual": phi.fit_residual,
        "min": float(phi.values.min()),
        "mean": float(phi.mean()),
        "max": float(phi.values.max()),
    })
    print(f"density in [{report['min']:.6g}, {report['max']:.6g}], "
          f"degree {phi.degree}, residual {phi.residual:.3g}")
    if args.format == "csv":
        phi.to_csv(args.out_dir / "crofton-density.csv")
    return report, EXIT_OK


def cmd_zonoid(args):
    norm = _norm(args)
    r = zonoid_check(norm, args.resolution)
    report = _head(args, {"norm": norm.describe(), "is_zonoid": r.is_zonoid,
                          "min_density": r.min_density, "mean_density": r.mean_density,
                          "degree": r.degree, "residual": r.residual})
    print(f"is_zonoid={str(r.is_zonoid).lower()}  min={r.min_density:.6g}  "
          f"mean={r.mean_density:.6g}")
    return report, EXIT_OK


def cmd_mixed_volume(args):
    sc = _scenario(args)
    value, tol, fv = mixed_volume_side(sc)
    report = _head(args, {
        "config": sc.describe(), "scenario": sc.name, "value": value, "grid": fv.grid,
        "coarse_value": value * fv.coarse / fv.value if fv.value else fv.coarse,
        "tolerance": tol, "tolerance-met": fv.converged, "directions": fv.directions,
    })
    print(f"{sc.name}: mixed-volume side {value:.6f} (grid {fv.grid}, change {tol:.2g})")
    return report, EXIT_OK


def _per_sample_csv(args, name, per):
    if args.format == "csv" and per is not None:
        _write_rows(args.out_dir / f"{name}-samples.csv", ["weight", "count"],
                    zip(per["weight"], per["count"].astype(int)))


def cmd_average(args):
    sc = _scenario(args)
    rep = estimate_average(sc, keep_samples=args.format == "csv")
    report = _head(args, {"config": sc.describe(), "scenario": sc.name, **rep.to_dict()})
    print(f"{sc.name}: average count {rep.estimate:.6f} +- {rep.stderr:.2g} "
          f"({rep.samples} samples, {rep.uncertain} uncertain)")
    _per_sample_csv(args, f"average-solutions-{sc.name}", rep.per_sample)
    return report, EXIT_OK


def cmd_verify(args):
    sc = _scenario(args)
    rec = verify_bkk(sc, sigma=sc.tolerances.get("sigma", 3.0),
                     keep_samples=args.format == "csv")
    report = _head(args, {"config": sc.describe(), **rec.to_dict()})
    print(f"{sc.name}: LHS {rec.lhs:.6f} +- {rec.stderr:.2g}  RHS {rec.rhs:.6f}  "
          f"z={rec.z_score:.2f}  {'PASS' if rec.passed else 'FAIL'}")
    _per_sample_csv(args, f"verify-{sc.name}", rec.per_sample)
    return report, EXIT_OK if rec.passed else EXIT_FAIL


def cmd_selftest(args):
    from .selftest import run_all
    results = run_all(args.scale)
    report = _head(args, {"scale": args.scale,
                          "checks": [{"key": r.key, "title": r.title, "passed": r.passed,
                                      "details": r.details} for r in results]})
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return report, EXIT_OK if ok else EXIT_FAIL


_DISPATCH = {"symmetrize": cmd_symmetrize, "crofton-density": cmd_crofton,
             "zonoid-check": cmd_zonoid, "mixed-volume": cmd_mixed_volume,
             "average-solutions": cmd_average, "verify": cmd_verify,
             "selftest": cmd_selftest}


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="bkklab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="scenario or norm TOML file")
    p.add_argument("--scenario", help="built-in scenario name")
    p.add_argument("--norm", help="short norm spec, e.g. euclidean:3, lp:1.5:3, linf:2")
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--grid", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--resolution", type=_positive_int, help="sphere grid resolution")
    p.add_argument("--scale", type=float, default=1.0,
                   help="selftest only: multiply Monte-Carlo sample counts")
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv additionally writes grids or per-sample tables")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        report, code = _DISPATCH[args.command](args)
    except (InvalidArgument, PreconditionError, UnsupportedMode, InvalidBody) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergence as exc:
        print(f"non-convergence: {exc} (last residual {exc.residual:.3g})", file=sys.stderr)
        return EXIT_NUMERIC
    stem = args.command
    if args.command in ("mixed-volume", "average-solutions", "verify"):
        stem += f"-{report.get('scenario', 'config')}"
    path = _write(args.out_dir, stem, report)
    print(f"report: {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
