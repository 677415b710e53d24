"""Command-line entry point: ray, land, julia, motion, verify and symbolic verbs.

Exit codes: 0 success or passing report, 1 failing report or numerical
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from .angles import ExactAngle
from .config import ConfigError, load_config, resolve
from .errors import RayflowError

SUITES = ("main-bound", "zcycles", "lemma-t", "hausdorff", "holder", "derivative-formula", "semiconjugacy")
DEFAULT_EPS = {
    "main-bound": "1e-2,1e-3,1e-4",
    "zcycles": "1e-2,1e-3,1e-4",
    "lemma-t": "1e-2,1e-3,1e-4",
    "hausdorff": "10^-1.5,1e-2,10^-2.5,1e-3,10^-3.5,1e-4",
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- argument parsing

def parse_angle(text: str, nonzero: bool = True) -> ExactAngle:
    try:
        t = ExactAngle.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if nonzero and t.num == 0:
        raise UsageError("angle 0 is excluded")
    return t


def parse_complex(text: str) -> complex:
    """'-2', '0.1+1.1i', '0.1+1.1j', 'i' or 're,im'."""
    s = text.strip().replace(" ", "")
    if "," in s:
        re_, im = s.split(",", 1)
        return complex(float(re_), float(im))
    s = s.replace("i", "j")
    if re.fullmatch(r"[+-]?j", s):
        s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError as exc:
        raise UsageError(f"cannot parse complex number {text!r}") from exc


def parse_real(text: str) -> float:
    """Float, or 10^x for exponent grids."""
    s = text.strip()
    if s.startswith("10^"):
        return 10.0 ** float(s[3:])
    return float(s)


def parse_list(text: str, item=parse_real, sep: str = ",") -> list:
    try:
        return [item(x) for x in text.split(sep) if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad list {text!r}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rayflow", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value file with defaults (command-line flags win)")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def tuning(q, *keys):
        for k in keys:
            q.add_argument("--" + k.replace("_", "-"), dest=k, type=str, default=None)

    q = sub.add_parser("ray", help="trace a dynamic ray (with --c) or a parameter ray, write CSV")
    q.add_argument("--angle", required=True)
    q.add_argument("--c")
    q.add_argument("--out")
    tuning(q, "g_min", "steps_per_halving")

    q = sub.add_parser("land", help="landing point of a parameter ray (or a dynamic ray with --c), JSON")
    q.add_argument("--angle", required=True)
    q.add_argument("--p", type=int)
    q.add_argument("--c")
    q.add_argument("--out")
    tuning(q, "r0", "tol", "steps_per_halving")

    q = sub.add_parser("julia", help="render J(f_c) as PPM")
    q.add_argument("--c", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--width", type=int, default=400)
    q.add_argument("--height", type=int, default=400)
    q.add_argument("--center", default="0")
    q.add_argument("--scale", type=float, default=0.01)
    q.add_argument("--method", choices=("escape", "inverse"), default="escape")
    q.add_argument("--points", type=int, default=200000)
    tuning(q, "max_iter", "seed")

    q = sub.add_parser("motion", help="frames and CSVs of the motion along R_M(angle)")
    q.add_argument("--angle", required=True)
    q.add_argument("--itinerary", action="append", help="itinerary such as 1(0); repeatable (default: all words of length 8 + e)")
    q.add_argument("--frames", type=int, default=12)
    q.add_argument("--out-dir", required=True)
    q.add_argument("--width", type=int, default=400)
    q.add_argument("--height", type=int, default=400)
    q.add_argument("--g-max", type=float, default=1.0)
    tuning(q, "g_min", "depth", "r0", "tol")

    q = sub.add_parser("verify", help="run a verification suite, print its JSON report")
    q.add_argument("suite", choices=SUITES)
    q.add_argument("--angle", default="1/2")
    q.add_argument("--eps")
    q.add_argument("--c", help="parameters separated by ';' (derivative-formula)")
    q.add_argument("--itinerary", action="append")
    q.add_argument("--out")
    tuning(q, "nu", "depth", "max_len", "word_len", "cloud_len", "r0", "tol")

    q = sub.add_parser("symbolic", help="kneading sequences, angle classification, the relation ~_e")
    q.add_argument("action", choices=("kneading", "classify", "equiv"))
    q.add_argument("--angle", required=True)
    q.add_argument("--depth", type=int)
    q.add_argument("--a")
    q.add_argument("--s")
    return p


# ---------------------------------------------------------------- verbs

def _emit(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) if not isinstance(obj, str) else obj
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _typed(opts: dict) -> dict:
    from .config import DEFAULTS

    out = {}
    for k, v in opts.items():
        if v is None or k not in DEFAULTS:
            out[k] = v
            continue
        try:
            out[k] = type(DEFAULTS[k])(v)
        except ValueError as exc:
            raise UsageError(f"bad value for --{k.replace('_', '-')}: {v!r}") from exc
    return out


def _context(angle: ExactAngle, cfg: dict):
    from .motion.context import make_context

    if angle.den % 2:
        raise UsageError(f"angle {angle} needs an even denominator (a Misiurewicz landing)")
    return make_context(angle, r0=cfg["r0"], tol=cfg["tol"])


def cmd_ray(args, cfg) -> int:
    from .boettcher import trace_dynamic_ray, trace_parameter_ray

    t = parse_angle(args.angle)
    if args.c is not None:
        poly = trace_dynamic_ray(parse_complex(args.c), t, cfg["g_min"], cfg["steps_per_halving"])
    else:
        poly = trace_parameter_ray(t, cfg["g_min"], cfg["steps_per_halving"])
    if args.out:
        poly.write_csv(args.out)
    else:
        print("potential,re,im")
        for g, z in zip(poly.potentials, poly.points):
            print(f"{float(g)!r},{float(z.real)!r},{float(z.imag)!r}")
    return 0


def cmd_land(args, cfg) -> int:
    from .boettcher import land_dynamic_ray, land_parameter_ray
    from .symbolic import classify_angle

    t = parse_angle(args.angle)
    if args.c is not None:
        c = parse_complex(args.c)
        y, err, poly = land_dynamic_ray(c, t, cfg["tol"], cfg["steps_per_halving"])
        out = poly.landing_json()
        out.update({"kind": "dynamic", "c_re": c.real, "c_im": c.imag})
    else:
        p = args.p if args.p is not None else classify_angle(t).period
        if p < 1:
            raise UsageError("--p must be a positive integer")
        c, seq, ratios, err, poly = land_parameter_ray(t, p, cfg["r0"], cfg["tol"], cfg["steps_per_halving"])
        out = poly.landing_json()
        out.update({"kind": "parameter", "p": p, "r0": cfg["r0"], "ratios": [float(r) for r in ratios],
                    "sequence_length": len(seq)})
    _emit(out, args.out)
    return 0


def cmd_julia(args, cfg) -> int:
    from .render import render_julia

    if args.width < 1 or args.height < 1 or not args.scale > 0:
        raise UsageError("width, height and scale must be positive")
    img = render_julia(parse_complex(args.c), args.width, args.height, parse_complex(args.center), args.scale,
                       args.method, cfg["max_iter"], args.points, cfg["seed"])
    img.write_ppm(args.out)
    return 0


def _itineraries(texts):
    from .symbolic import ItinerarySeq

    try:
        return [ItinerarySeq.parse(x) for x in texts]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_motion(args, cfg) -> int:
    from .render import motion_strip
    from .symbolic import words

    if args.frames < 1:
        raise UsageError("--frames must be at least 1")
    ctx = _context(parse_angle(args.angle), cfg)
    seqs = _itineraries(args.itinerary) if args.itinerary else [ctx.e.prepend(w) for w in words(8)]
    path, rows = motion_strip(ctx, seqs, args.frames, args.out_dir, args.width, args.height,
                              g_max=args.g_max, g_min=cfg["g_min"], depth=cfg["depth"],
                              with_derivative=bool(args.itinerary))
    if args.itinerary:
        for k in range(len(seqs)):
            path.write_csv(os.path.join(args.out_dir, f"motion_{k}.csv"), k)
    skipped = sum(1 for r in rows if r["skipped"])
    print(json.dumps({"frames": len(rows), "skipped": skipped, "out_dir": args.out_dir}, sort_keys=True))
    return 0 if skipped == 0 else 1


def cmd_verify(args, cfg) -> int:
    from .motion import suites

    name = args.suite
    if name == "derivative-formula":
        params = parse_list(args.c, parse_complex, ";") if args.c else list(suites.FIXED_POINT_PARAMETERS)
        report = suites.verify_derivative_formula(params, cfg["depth"])
    else:
        ctx = _context(parse_angle(args.angle), cfg)
        eps = parse_list(args.eps or DEFAULT_EPS.get(name, "1e-2,1e-3,1e-4"))
        if any(not e > 0 for e in eps):
            raise UsageError("epsilons must be positive")
        if name == "main-bound":
            report = suites.verify_main_bound(ctx, eps, cfg["max_len"], cfg["depth"])
        elif name == "lemma-t":
            report = suites.dist_zero_julia(ctx, eps, cfg["max_len"], cfg["depth"])
        elif name == "zcycles":
            report = suites.verify_zcycles(ctx, eps, cfg["nu"], cfg["max_len"], cfg["depth"])
        elif name == "hausdorff":
            report = suites.hausdorff_scaling(ctx, eps, cfg["cloud_len"], cfg["depth"])
        elif name == "semiconjugacy":
            report = suites.semiconjugacy_check(ctx, cfg["word_len"], cfg["depth"])
        else:
            seqs = _itineraries(args.itinerary) if args.itinerary else suites.default_holder_itineraries(ctx)
            report = suites.motion_limit_crosscheck(ctx, seqs, cfg["depth"])
    _emit(report.to_dict(), args.out)
    return 0 if report.passed else 1


def cmd_symbolic(args, cfg) -> int:
    from .symbolic import classify_angle, equivalent_wrt, fiber_partner, kneading

    t = parse_angle(args.angle)
    if args.action == "kneading":
        print(str(kneading(t, args.depth)))
    elif args.action == "classify":
        cls = classify_angle(t)
        _emit({"angle": str(t), "preperiod": cls.preperiod, "period": cls.period, "recurrent": cls.recurrent}, None)
    else:
        if args.s is None:
            raise UsageError("equiv needs --s (and optionally --a)")
        e = kneading(t)
        s = _itineraries([args.s])[0]
        partner = fiber_partner(e, s, args.depth)
        out = {"e": str(e), "s": str(s), "partner": None if partner is None else str(partner)}
        if args.a is not None:
            a = _itineraries([args.a])[0]
            out["a"] = str(a)
            out["equivalent"] = equivalent_wrt(e, a, s, args.depth)
        _emit(out, None)
    return 0


COMMANDS = {"ray": cmd_ray, "land": cmd_land, "julia": cmd_julia, "motion": cmd_motion,
            "verify": cmd_verify, "symbolic": cmd_symbolic}


VALUE_OPTIONS = ("--c", "--center", "--angle", "--eps", "--itinerary", "--s", "--a")


def _attach_values(argv: list[str]) -> list[str]:
    """Rewrite ``--c -0.1+0.6i`` as ``--c=-0.1+0.6i`` so argparse does not read the value as a flag."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in VALUE_OPTIONS and k + 1 < len(argv) and argv[k + 1].startswith("-") and argv[k + 1][1:2] != "-":
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(_attach_values(sys.argv[1:] if argv is None else list(argv)))
        config = load_config(args.config) if args.config else {}
        flags = {k: v for k, v in vars(args).items() if k not in ("verb", "config")}
        cfg = resolve(_typed(flags), config)
        return COMMANDS[args.verb](args, cfg)
    except (UsageError, ConfigError, OSError) as exc:
        print(f"rayflow: {exc}", file=sys.stderr)
        return 2
    except (RayflowError, ValueError) as exc:
        print(f"rayflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
