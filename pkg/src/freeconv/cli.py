"""Command-line front end.

::

    freeconv convolve A.spec B.spec --op add --grid -2.5:2.5:501 --out run/
    freeconv certify  M.spec --out run/
    freeconv oracle   A.spec B.spec --op mul-pos --n 3000 --trials 10 --seed 0 --ks --out run/

Every run writes ``meta.json`` with the effective configuration.  Errors are
reported as JSON on standard error (and as ``error.json`` in the output
directory) with exit code 2 for bad input, 3 for non-convergence and 4 for
internal failures.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .atoms import ATOM_LADDER, analyze_atoms, reports_to_json, shared_component_violations
from .density import DEFAULT_LADDER, check_ladder, stieltjes_invert
from .errors import CarrierMismatchError, FreeConvError
from .evaluators import CARRIER_OF_OP, FreeConvolution
from .indecomposability import certify_indecomposable
from .measures import CircleMeasure, PosMeasure, RealMeasure
from .oracle import ks_distance, sample
from .specfile import load_measure
from .subordination import DEFAULT_MAX_ITER, DEFAULT_TOL

SCHEMA = "freeconv/1"
EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGENCE, EXIT_INTERNAL = 0, 2, 3, 4


class NonConvergence(FreeConvError):
    code = "non-convergence"


def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be min:max:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 2 or not hi > lo:
        raise argparse.ArgumentTypeError("grid needs max > min and n >= 2")
    return lo, hi, n


def _ladder(text):
    try:
        return check_ladder(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="freeconv", description="Free convolutions of probability measures")
    parser.add_argument("--version", action="version", version=f"freeconv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
        p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)

    conv = sub.add_parser("convolve", help="density and atoms of a free convolution")
    conv.add_argument("spec1")
    conv.add_argument("spec2")
    conv.add_argument("--op", choices=sorted(CARRIER_OF_OP), default="add")
    conv.add_argument("--grid", type=_grid, help="min:max:n (angles on the circle)")
    conv.add_argument("--eps", type=_ladder, default=DEFAULT_LADDER, help="density ladder, decreasing")
    conv.add_argument("--atom-eps", type=_ladder, default=ATOM_LADDER, help="atom probe ladder, decreasing")
    common(conv)

    cert = sub.add_parser("certify", help="free indecomposability certificate")
    cert.add_argument("spec")
    cert.add_argument("--carrier", choices=["line", "halfline", "circle"])
    cert.add_argument("--gap-tol", type=float, default=0.0)
    common(cert)

    orc = sub.add_parser("oracle", help="random-matrix sample of a free convolution")
    orc.add_argument("spec1")
    orc.add_argument("spec2")
    orc.add_argument("--op", choices=sorted(CARRIER_OF_OP), default="add")
    orc.add_argument("--n", type=int, default=1000, help="matrix dimension")
    orc.add_argument("--trials", type=int, default=4)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--ks", action="store_true", help="also compare with the solver-recovered measure")
    orc.add_argument("--grid", type=_grid, help="reference density grid for --ks")
    orc.add_argument("--eps", type=_ladder, default=DEFAULT_LADDER)
    common(orc)
    return parser


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config(args):
    cfg = {k: v for k, v in vars(args).items()}
    for key in ("eps", "atom_eps"):
        if key in cfg:
            cfg[key] = list(cfg[key])
    if cfg.get("grid") is not None:
        cfg["grid"] = list(cfg["grid"])
    return cfg


_NEEDED = {"add": RealMeasure, "mul-pos": PosMeasure, "mul-circle": CircleMeasure}


def _load_pair(args):
    mu1, mu2 = load_measure(args.spec1), load_measure(args.spec2)
    if mu1.carrier != mu2.carrier:
        raise CarrierMismatchError(f"specs are on different carriers: {mu1.carrier} and {mu2.carrier}")
    need = _NEEDED[args.op]
    if not (isinstance(mu1, need) and isinstance(mu2, need)):
        raise CarrierMismatchError(f"operation {args.op} needs {need.carrier} specs, got {mu1.carrier}")
    return mu1, mu2


def default_grid(mu1, mu2, op, n=501):
    if op == "mul-circle":
        return 0.0, 2.0 * np.pi, n
    (a1, b1), (a2, b2) = mu1.hull, mu2.hull
    if op == "add":
        pad = 0.05 * (b1 - a1 + b2 - a2) + 0.1
        return a1 + a2 - pad, b1 + b2 + pad, n
    return 0.0, 1.05 * b1 * b2 + 0.1, n


def _convolve(args):
    mu1, mu2 = _load_pair(args)
    conv = FreeConvolution(mu1, mu2, args.op, args.tol, args.max_iter)
    lo, hi, n = args.grid or default_grid(mu1, mu2, args.op)
    grid = stieltjes_invert(conv, (lo, hi), n, args.eps)
    reports = analyze_atoms(conv, args.atom_eps)
    grid.save(os.path.join(args.out, "density.csv"))
    with open(os.path.join(args.out, "atoms.json"), "w") as fh:
        fh.write(reports_to_json(reports, operation=args.op,
                                 shared_component_violations=len(shared_component_violations(reports))))
    stats = dict(conv.stats)
    meta = {"schema": SCHEMA, "version": __version__, "command": "convolve", "config": _config(args),
            "carrier": conv.carrier, "grid": [lo, hi, n], "solver": stats,
            "flagged_points": int(np.count_nonzero(grid.flagged)),
            "atom_mass_total": float(sum(r.mass for r in reports))}
    _write_json(os.path.join(args.out, "meta.json"), meta)
    for r in reports:
        print(f"atom {r.alpha!r} mass {r.mass:.6f}")
    print(f"density: {n} points on [{lo!r}, {hi!r}], {meta['flagged_points']} flagged")
    if stats["unconverged"]:
        raise NonConvergence(f"{stats['unconverged']} of {stats['points']} solver points did not converge")


def _certify(args):
    mu = load_measure(args.spec)
    cert = certify_indecomposable(mu, args.carrier, args.gap_tol)
    _write_json(os.path.join(args.out, "certificate.json"), cert.to_dict())
    _write_json(os.path.join(args.out, "meta.json"),
                {"schema": SCHEMA, "version": __version__, "command": "certify", "config": _config(args)})
    print(cert.summary())
    sys.stdout.write(cert.to_json())


def _oracle(args):
    mu1, mu2 = _load_pair(args)
    if args.n < 2 or args.trials < 1:
        raise ValueError("need --n >= 2 and --trials >= 1")
    smp = sample(mu1, mu2, args.op, args.n, args.trials, args.seed)
    smp.save(os.path.join(args.out, "eigs.csv"))
    meta = {"schema": SCHEMA, "version": __version__, "command": "oracle", "config": _config(args)}
    if args.ks:
        conv = FreeConvolution(mu1, mu2, args.op, args.tol, args.max_iter)
        lo, hi, n = args.grid or default_grid(mu1, mu2, args.op, 2001)
        grid = stieltjes_invert(conv, (lo, hi), n, args.eps)
        reports = analyze_atoms(conv)
        dist = ks_distance(smp, (grid, reports))
        _write_json(os.path.join(args.out, "ks.json"),
                    {"schema": SCHEMA, "ks_distance": dist, "reference": "solver", "grid": [lo, hi, n],
                     "atoms": [[r.alpha, r.mass] for r in reports]})
        meta["solver"] = dict(conv.stats)
        print(f"ks distance {dist:.6f}")
    _write_json(os.path.join(args.out, "meta.json"), meta)
    print(f"{smp.eigenvalues.size} eigenvalues ({args.trials} trials of dimension {args.n})")


_COMMANDS = {"convolve": _convolve, "certify": _certify, "oracle": _oracle}


def _fail(args, code, exit_code, message):
    doc = {"schema": SCHEMA, "error": {"code": code, "message": message}, "exit_code": exit_code}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    out = getattr(args, "out", None)
    if out and os.path.isdir(out):
        _write_json(os.path.join(out, "error.json"), doc)
    return exit_code


def _join_negative(argv):
    """Let ``--grid -2:2:101`` through; argparse would read ``-2:2:101`` as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            out.append(f"--grid={next(it, '')}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_join_negative(sys.argv[1:] if argv is None else list(argv)))
    try:
        os.makedirs(args.out, exist_ok=True)
        with np.errstate(all="ignore"):
            _COMMANDS[args.command](args)
    except NonConvergence as exc:
        return _fail(args, exc.code, EXIT_NONCONVERGENCE, str(exc))
    except FreeConvError as exc:
        return _fail(args, exc.code, EXIT_INPUT, str(exc))
    except (ValueError, OSError) as exc:
        return _fail(args, "input-error", EXIT_INPUT, str(exc))
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal-error exit code
        return _fail(args, "internal-error", EXIT_INTERNAL, f"{type(exc).__name__}: {exc}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
