"""Command-line driver: ``gocc-lab {sweep-coherent,chernoff,hide,bounds,protocol}``.

Every command writes to ``--out`` (default: stdout), echoes its parameters and
defaults into the output, and is byte-reproducible for a fixed ``--seed``.

Exit codes: 0 success, 2 bad arguments, 3 protocol/state file parse error,
4 numeric guard tripped.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np
import yaml
from scipy.special import erf

from . import __version__
from .bounds import TowerViolation, corollary_energy_bound, optimize_corollary_c
from .fock_oracle import CutoffTooSmallError, NotADensityError, density_from_constellation, quantum_chernoff
from .gaussian_core import CoherentConstellation, wigner_of_coherent
from .gocc_sim import ProtocolError, gocc_norm_from_error, run_protocol_error_prob
from .hiding import HidingParams, InfeasibleParameters, choose_L, run_hiding_experiment
from .protocol_io import ProtocolParseError, builtin_protocol, load_protocol
from .wigner_metrics import classical_chernoff_equal_cov, classical_chernoff_mc

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ARGS, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(ValueError):
    pass


class StateParseError(ValueError):
    pass


def _clean(obj):
    """JSON-ready copy: NaN -> None, numpy scalars -> Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _emit_json(payload, out):
    body = {"schema_version": SCHEMA_VERSION, "gocc_lab_version": __version__, **payload}
    _emit(json.dumps(_clean(body), indent=2, sort_keys=False) + "\n", out)


def _fmt(x):
    return f"{x:.10g}"


def sweep_coherent_rows(alpha_min, alpha_max, steps):
    if not 0 <= alpha_min < alpha_max or steps < 2:
        raise UsageError("need 0 <= alpha_min < alpha_max and steps >= 2")
    alpha = np.linspace(alpha_min, alpha_max, steps)
    half_trace = np.sqrt(-np.expm1(-4 * alpha ** 2))
    half_gocc = erf(alpha * np.sqrt(2.0))
    return alpha, half_trace, half_gocc, half_trace - half_gocc


def cmd_sweep_coherent(args):
    alpha, ht, hg, gap = sweep_coherent_rows(args.alpha_min, args.alpha_max, args.steps)
    k = int(np.argmax(gap))
    buf = io.StringIO()
    buf.write(f"# gocc-lab sweep-coherent schema_version={SCHEMA_VERSION} "
              f"alpha_min={args.alpha_min} alpha_max={args.alpha_max} steps={args.steps} seed={args.seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "half_trace", "half_gocc", "gap"])
    for row in zip(alpha, ht, hg, gap):
        w.writerow([_fmt(v) for v in row])
    buf.write(f"# max_gap={_fmt(gap[k])} at_alpha={_fmt(alpha[k])}\n")
    _emit(buf.getvalue(), args.out)


def chernoff_report(alpha, cutoff, mc_samples, seed):
    if alpha < 0:
        raise UsageError("alpha must be >= 0")
    r0 = CoherentConstellation.pure([alpha])
    r1 = CoherentConstellation.pure([-alpha])
    quantum = quantum_chernoff(density_from_constellation(r0, cutoff), density_from_constellation(r1, cutoff))
    w0, w1 = wigner_of_coherent([alpha]), wigner_of_coherent([-alpha])
    classical_mc = classical_chernoff_mc(w0, w1, mc_samples, seed)
    closed = classical_chernoff_equal_cov(w0.mean, w1.mean, w0.cov)
    return {
        "params": {"alpha": alpha, "cutoff": cutoff, "mc_samples": mc_samples, "seed": seed},
        "quantum_chernoff": quantum,
        "quantum_chernoff_closed_form": 4 * alpha ** 2,
        "classical_chernoff_mc": classical_mc,
        "classical_chernoff_closed_form": closed,
        "ratio": quantum / closed if closed > 0 else None,
    }


def cmd_chernoff(args):
    _emit_json({"command": "chernoff",
                **chernoff_report(args.alpha, args.cutoff, args.mc_samples, args.seed)}, args.out)


def _median(values):
    vals = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.median(vals)) if vals else None


def cmd_hide(args):
    if args.L is None:
        L = choose_L(args.m, args.E_bar, args.delta)
    elif args.L < 1:
        raise UsageError("L must be >= 1")
    else:
        L = args.L
    seeds = [args.seed + k for k in range(args.n_seeds)]
    reports = []
    for s in seeds:
        p = HidingParams(args.m, args.E_bar, args.delta, L, s)
        reports.append(run_hiding_experiment(p, args.mc_samples, n_trials=args.trials).to_dict())
    keys = ["trace_dist_half", "l1_w0_w1", "l1_w0_thermal", "l1_w1_thermal",
            "heterodyne_bias", "homodyne_bias"]
    _emit_json({
        "command": "hide",
        "params": {"m": args.m, "E_bar": args.E_bar, "delta": args.delta, "L": L,
                   "L_source": "override" if args.L is not None else "auto",
                   "seeds": seeds, "mc_samples": args.mc_samples,
                   "trials": args.trials if args.trials is not None else args.mc_samples},
        "reports": reports,
        "medians": {k: _median([r[k] for r in reports]) for k in keys},
    }, args.out)


def cmd_bounds(args):
    if args.m < 1 or args.E_bar < 0:
        raise UsageError("need m >= 1 and E_bar >= 0")
    c_star, bound_star = optimize_corollary_c(args.m, args.E_bar, args.t)
    detail = corollary_energy_bound(args.m, args.E_bar, args.t, c_star)
    _emit_json({
        "command": "bounds",
        "params": {"m": args.m, "E_bar": args.E_bar, "t": args.t, "seed": args.seed},
        "c_star": c_star,
        "bound_star": bound_star,
        "r": detail.r,
        "D": detail.D,
        "bound_pre_relaxation": detail.bound_pre_relaxation,
    }, args.out)


def _parse_points(raw, where):
    pts = []
    for i, p in enumerate(raw):
        if not isinstance(p, list):
            raise StateParseError(f"{where}.points[{i}]: expected a list of modes")
        modes = []
        for j, a in enumerate(p):
            if isinstance(a, list) and len(a) == 2:
                modes.append(complex(float(a[0]), float(a[1])))
            elif isinstance(a, (int, float)) and not isinstance(a, bool):
                modes.append(complex(a))
            else:
                raise StateParseError(f"{where}.points[{i}][{j}]: expected a number or [re, im]")
        pts.append(modes)
    return pts


def load_states(path):
    """Read ``{r0: {points, weights?}, r1: {...}}`` (YAML or JSON)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise StateParseError(f"{path}: malformed file: {exc}") from exc
    if not isinstance(doc, dict) or "r0" not in doc or "r1" not in doc:
        raise StateParseError(f"{path}: expected mappings 'r0' and 'r1'")
    out = []
    for key in ("r0", "r1"):
        spec = doc[key]
        if not isinstance(spec, dict) or "points" not in spec:
            raise StateParseError(f"{path}: {key}.points missing")
        pts = _parse_points(spec["points"], f"{path}: {key}")
        try:
            c = (CoherentConstellation(pts, spec["weights"]) if "weights" in spec
                 else CoherentConstellation.uniform(pts))
        except ValueError as exc:
            raise StateParseError(f"{path}: {key}: {exc}") from exc
        out.append(c)
    return out


def cmd_protocol(args):
    if args.protocol_file.startswith("builtin:"):
        protocol = builtin_protocol(args.protocol_file.split(":", 1)[1])
    else:
        protocol = load_protocol(args.protocol_file)
    if (args.states is None) == (args.pm_alpha is None):
        raise UsageError("give exactly one of --states FILE or --pm-alpha A")
    if args.states is not None:
        r0, r1 = load_states(args.states)
        state_desc = {"file": args.states}
    else:
        a = np.full(protocol.n_modes, args.pm_alpha)
        r0, r1 = CoherentConstellation.pure(a), CoherentConstellation.pure(-a)
        state_desc = {"pm_alpha": args.pm_alpha}
    p_err, se = run_protocol_error_prob(protocol, r0, r1, args.trials, args.seed)
    payload = {
        "command": "protocol",
        "params": {"protocol": args.protocol_file, "protocol_name": protocol.name,
                   "states": state_desc, "trials": args.trials, "seed": args.seed},
        "p_err": p_err,
        "std_err": se,
        "gocc_norm_lower_estimate": gocc_norm_from_error(p_err) if p_err <= 0.5 else None,
    }
    _emit_json(payload, args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="gocc-lab", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    def common(p, out_help="output file ('-' for stdout)"):
        p.add_argument("--seed", type=int, default=0, help="master RNG seed")
        p.add_argument("--out", default="-", help=out_help)

    p = sub.add_parser("sweep-coherent", formatter_class=fmt,
                       help="trace vs GOCC distance of coherent states +-alpha (CSV)")
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=201)
    common(p)
    p.set_defaults(func=cmd_sweep_coherent)

    p = sub.add_parser("chernoff", formatter_class=fmt,
                       help="quantum vs classical Chernoff exponents for +-alpha (JSON)")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--cutoff", type=int, default=25, help="Fock cutoff (max photons)")
    p.add_argument("--mc-samples", type=int, default=200_000)
    common(p)
    p.set_defaults(func=cmd_chernoff)

    p = sub.add_parser("hide", formatter_class=fmt,
                       help="random-constellation data hiding experiment (JSON)")
    p.add_argument("--m", type=int, default=4, help="number of modes")
    p.add_argument("--E-bar", dest="E_bar", type=float, default=1.0, help="mean photons per mode")
    p.add_argument("--delta", type=float, default=0.05, help="capacity slack")
    p.add_argument("--L", type=int, default=None, help="codewords per state (default: window midpoint)")
    p.add_argument("--n-seeds", type=int, default=5, help="runs with seeds seed, seed+1, ...")
    p.add_argument("--mc-samples", type=int, default=20_000)
    p.add_argument("--trials", type=int, default=None, help="attack trials (default: mc-samples)")
    common(p)
    p.set_defaults(func=cmd_hide)

    p = sub.add_parser("bounds", formatter_class=fmt,
                       help="energy-truncated W+ lower bound, optimised over c (JSON)")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--E-bar", dest="E_bar", type=float, default=1.0)
    p.add_argument("--t", type=float, default=2.0, help="trace-norm lower bound t in (0, 2]")
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("protocol", formatter_class=fmt,
                       help="run a GOCC protocol file on two states (JSON)")
    p.add_argument("protocol_file", help="YAML protocol, or builtin:NAME")
    p.add_argument("--states", default=None, help="YAML/JSON file with r0 and r1 constellations")
    p.add_argument("--pm-alpha", type=float, default=None, help="use |+a>^m vs |-a>^m")
    p.add_argument("--trials", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_protocol)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ProtocolParseError, StateParseError) as exc:
        print(f"gocc-lab: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, InfeasibleParameters, ProtocolError, OSError) as exc:
        print(f"gocc-lab: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (CutoffTooSmallError, NotADensityError, TowerViolation, ArithmeticError) as exc:
        print(f"gocc-lab: numeric guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"gocc-lab: {exc}", file=sys.stderr)
        return EXIT_ARGS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
