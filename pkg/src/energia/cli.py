"""``energia`` command-line interface.

Each run writes one JSON record per classification (a JSON object per
line) or, for scans, a CSV table. Exit status: 0 on success, 2 on bad
input, 3 when symbolic and numeric routes disagree.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction
from functools import partial

import numpy as np

from . import blowup, divisorial, radial, toric
from .config import RunConfig, load_config
from .convex import (
    Polytope,
    SampledConvexFunction,
    legendre_transform,
    subgradient_image,
)
from .errors import EnergiaError, FitUnstable, Inconclusive, OracleDisagreement
from .logpow import LogPowerTerm, classify_at_infinity, classify_at_zero, exact, parse_term
from .oracle import VERDICT_BAND, check_callable, cross_check
from .report import (
    ANCHORS,
    ordered_map,
    parse_range,
    record,
    scan_values,
    to_csv,
    to_json_line,
    withheld,
)

EXIT_OK, EXIT_INPUT, EXIT_ORACLE = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let "-3/2", "-1e-3" and "-4:4:801" through as values, not flags
        self._negative_number_matcher = re.compile(r"^-(\d|\.\d)[\d.eE+\-/:]*$")

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _common(with_out: bool = True) -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--config", help="INI file with run parameters (default: $ENERGIA_CONFIG)")
    g.add_argument("--tol", type=float, help="relative quadrature tolerance")
    g.add_argument("--panels", type=int, help="panel budget for tail integrals")
    g.add_argument("--grid", type=int, help="slope grid size for Legendre transforms")
    g.add_argument("--window", type=int, help="points used by endpoint power fits")
    g.add_argument("--jobs", type=int, help="worker processes for scans")
    g.add_argument("--format", choices=("json", "csv"), help="output encoding")
    g.add_argument(
        "--check",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="cross-check symbolic verdicts numerically (default on)",
    )
    if with_out:
        g.add_argument("--out", help="write records here instead of stdout")
    return p


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text) if "/" in text else exact(float(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _interval(text: str) -> Polytope:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    try:
        return Polytope(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="energia", description="Finite-energy thresholds for model measures.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("radial", parents=[common], help="radial weights chi(log||z||)")
    r.add_argument("op", nargs="?", default="classify", choices=("classify", "dirichlet", "lp", "perturb"))
    r.add_argument("--n", type=int, default=1, help="complex dimension")
    r.add_argument("--p", type=_fraction, help="exponent of chi_p(t) = -(-t)^p")
    r.add_argument("--weight", help="sampled weight file (columns s, chi)")
    r.add_argument("--gamma", type=_fraction, help="exponent of g = (-log||z||)^gamma")
    r.add_argument("--q", type=_fraction, help="integrability exponent for lp")

    t = sub.add_parser("toric", parents=[common], help="toric potentials via Legendre duality")
    t.add_argument("op", nargs="?", default="classify", choices=("classify", "moment", "lq", "sobolev"))
    t.add_argument("--beta", type=float, help="member of the phi_beta family")
    t.add_argument("--scan-beta", help="scan beta over from:to:step")
    t.add_argument("--q", type=float, default=1.0)
    t.add_argument("--n", type=int, help="dimension for the Sobolev chain")
    t.add_argument("--C", type=float, help="phi_beta constant (default normalises phi* to p^-beta*)")
    t.add_argument("--potential", help="sampled convex potential file")
    t.add_argument("--input", help="sampled conjugate file for lq")
    t.add_argument("--polytope", type=_interval, default=Polytope(0.0, 1.0), help="moment interval lo:hi")

    d = sub.add_parser("divisorial", parents=[common], help="densities with poles along a divisor")
    d.add_argument(
        "op", nargs="?", default="classify", choices=("classify", "mass", "entropy", "pairing", "barrier")
    )
    d.add_argument("--alpha", type=_fraction)
    d.add_argument("--scan-alpha", help="scan alpha over from:to:step")
    d.add_argument("--components", type=int, default=1)
    d.add_argument("--bound", type=float, default=1.0, help="B with 1/B <= h <= B")
    d.add_argument("--p", type=_fraction, help="barrier exponent")

    b = sub.add_parser("blowup", parents=[common], help="non-invariance under blowing up a point")
    b.add_argument("op", nargs="?", default="pairing", choices=("pairing", "reduce", "report"))
    b.add_argument("--delta", type=_fraction)
    b.add_argument("--delta-prime", type=_fraction)
    b.add_argument("--scan", action="store_true", help="emit the (delta, delta') region as CSV")
    b.add_argument("--steps", type=int, default=100, help="grid size per axis for --scan")

    lg = sub.add_parser("legendre", parents=[_common(with_out=False)], help="Legendre transform of a sampled function")
    lg.add_argument("--input", required=True, help="two-column file (x, value)")
    lg.add_argument("--out", help="write the conjugate here")
    lg.add_argument("--slopes", help="target slopes lo:hi:count (default: the subgradient image)")

    c = sub.add_parser("classify-integral", parents=[common], help="classify c t^a (log t)^b")
    c.add_argument("--expr", help='e.g. "t^-1*log(t)^-2" or "r^-1*(-log(r))^-1.5"')
    c.add_argument("--a", type=_fraction)
    c.add_argument("--b", type=_fraction, default=Fraction(0))
    c.add_argument("--coeff", type=float, default=1.0)
    c.add_argument("--at", choices=("infinity", "zero"), default="infinity")
    c.add_argument("--bound", type=float, help="lower limit at infinity / upper limit at zero")

    s = sub.add_parser("scan", parents=[common], help="parameter scans as CSV")
    s.add_argument("--module", required=True, choices=("radial", "toric", "divisorial", "blowup"))
    s.add_argument("--param", required=True)
    s.add_argument("--from", dest="start", required=True, type=float)
    s.add_argument("--to", dest="stop", required=True, type=float)
    s.add_argument("--step", required=True, type=float)
    s.add_argument("--operation", help="module operation (default: the energy classification)")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--components", type=int, default=1)
    s.add_argument("--bound", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--delta-prime", type=float, default=0.05)
    return top


def _require(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ValueError("missing required option(s): " + ", ".join("--" + m for m in missing))


# radial


def _radial_weight(args) -> radial.RadialWeight:
    if args.weight:
        return radial.SampledWeight.from_file(args.weight)
    _require(args, "p")
    return radial.PowerLog(args.p)


def _radial_params(args, w) -> dict:
    out = {"n": args.n}
    out.update({"p": float(w.p)} if isinstance(w, radial.PowerLog) else {"weight": args.weight})
    return out


def radial_energy_record(n: int, p, cfg: RunConfig, op: str = "classify") -> dict:
    w = radial.PowerLog(p)
    if op == "dirichlet":
        v = radial.dirichlet_energy(w, tol=cfg.tol, panels=cfg.panels)

        def f(t):
            return w.dchi(-t) ** 2

        near = abs(w.p - Fraction(1, 2)) < VERDICT_BAND
        anchor = "radial.dirichlet"
    else:
        v = radial.classify_energy(w, n, tol=cfg.tol, panels=cfg.panels)
        f = radial.energy_integrand(w, n)
        near = abs(w.p - Fraction(n, n + 1)) < VERDICT_BAND
        anchor = "radial"
    extra = {}
    if cfg.check and not near:
        extra = check_callable(f, v, "infinity", w.lower, tol=cfg.tol, panels=cfg.panels).to_dict()
    op_name = "dirichlet_energy" if op == "dirichlet" else "classify_energy"
    params = {"p": float(w.p)} if op == "dirichlet" else {"n": n, "p": float(w.p)}
    return record("radial", op_name, params, v, anchor=_anchor(anchor), **extra)


def _anchor(key: str) -> str:
    return ANCHORS[key]


def _run_radial(args, cfg):
    if args.op in ("classify", "dirichlet"):
        w = _radial_weight(args)
        if isinstance(w, radial.PowerLog):
            return [radial_energy_record(args.n, w.p, cfg, args.op)]
        params = _radial_params(args, w)
        try:
            if args.op == "dirichlet":
                v = radial.dirichlet_energy(w)
            else:
                v = radial.classify_energy(w, args.n)
        except (FitUnstable, Inconclusive) as exc:
            return [withheld("radial", args.op, params, str(exc))]
        return [record("radial", args.op, params, v)]
    _require(args, "p", "gamma")
    w = radial.PowerLog(args.p)
    if args.op == "lp":
        _require(args, "q")
        v = radial.lp_membership(args.gamma, w, args.n, args.q, tol=cfg.tol, panels=cfg.panels)
        params = {"n": args.n, "p": float(w.p), "gamma": float(args.gamma), "q": float(args.q)}
        return [record("radial", "lp_membership", params, v, anchor=_anchor("radial.lp"))]
    w2 = radial.perturbed_weight(args.gamma, w, args.n)
    v = radial.classify_energy(w2, args.n, tol=cfg.tol, panels=cfg.panels)
    params = {"n": args.n, "p": float(w.p), "gamma": float(args.gamma)}
    return [
        record(
            "radial", "perturbed_weight", params, v, anchor=_anchor("radial.lp"),
            p_prime=float(w2.p), p_prime_exact=str(w2.p),
        )
    ]


# toric


def toric_beta_record(beta: float, q: float, cfg: RunConfig, op: str = "classify") -> dict:
    model = toric.ToricModel.beta_family(beta, cfg.toric_C, cfg.grid)
    fn = toric.moment_integral if op == "moment" else toric.classify_toric_energy
    params = {"beta": beta, "q": q}
    try:
        v = fn(model, q, cfg.fit_window)
    except FitUnstable as exc:
        return withheld("toric", op, params, str(exc))
    name = "moment_integral" if op == "moment" else "classify_toric_energy"
    return record("toric", name, params, v, anchor=_anchor("toric.beta"))


def _run_toric(args, cfg):
    if args.op == "sobolev":
        _require(args, "n")
        chk = toric.verify_sobolev(args.q, args.n)
        return [
            record(
                "toric", "sobolev_chain", {"q": args.q, "n": args.n}, provenance="numeric",
                qStar=float(chk.q_star), qStar_exact=str(chk.q_star),
                fitted_constant=chk.fitted_constant, sharp_constant=chk.sharp_constant,
                holds=chk.holds, ratios=chk.ratios,
            )
        ]
    if args.op == "lq":
        _require(args, "input")
        f = SampledConvexFunction.load(args.input)
        params = {"input": args.input, "q": args.q}
        try:
            v = toric.lq_norm_on_polytope(f, args.q, args.polytope, cfg.fit_window)
        except FitUnstable as exc:
            return [withheld("toric", "lq_norm_on_polytope", params, str(exc))]
        return [record("toric", "lq_norm_on_polytope", params, v)]
    if args.potential:
        pot = SampledConvexFunction.load(args.potential)
        model = toric.ToricModel(toric.reference_potential(), pot, args.polytope, grid=cfg.grid)
        fn = toric.moment_integral if args.op == "moment" else toric.classify_toric_energy
        params = {"potential": args.potential, "q": args.q}
        try:
            v = fn(model, args.q, cfg.fit_window)
        except FitUnstable as exc:
            return [withheld("toric", args.op, params, str(exc))]
        return [record("toric", args.op, params, v)]
    if args.scan_beta:
        betas = parse_range(args.scan_beta)
        return ordered_map(partial(_toric_point, q=args.q, cfg=cfg, op=args.op), betas, cfg.jobs), "csv"
    _require(args, "beta")
    return [toric_beta_record(args.beta, args.q, cfg, args.op)]


def _toric_point(beta, q, cfg, op):
    return toric_beta_record(beta, q, cfg, op)


# divisorial

_DIV_OPS = {
    "classify": (divisorial.classify, divisorial.pairing_term, "divisorial"),
    "pairing": (divisorial.critical_pairing, divisorial.pairing_term, "divisorial"),
    "mass": (divisorial.mass_integral, divisorial.mass_term, "divisorial"),
    "entropy": (divisorial.entropy_integral, divisorial.entropy_term, "divisorial.entropy"),
}


def divisorial_record(alpha, components: int, bound: float, cfg: RunConfig, op: str = "classify") -> dict:
    dens = divisorial.DivisorialDensity(alpha, components, bound)
    fn, term_fn, anchor = _DIV_OPS[op]
    v = fn(dens)
    extra = {}
    if cfg.check:
        extra = cross_check(term_fn(dens), "zero", divisorial.CUTOFF, tol=cfg.tol, panels=cfg.panels).to_dict()
    return record("divisorial", fn.__name__, dens.parameters(), v, anchor=_anchor(anchor), **extra)


def _run_divisorial(args, cfg):
    if args.op == "barrier":
        _require(args, "p")
        v = divisorial.barrier_energy(args.p)
        return [record("divisorial", "barrier_energy", {"p": float(args.p)}, v)]
    if args.scan_alpha:
        alphas = parse_range(args.scan_alpha)
        fn = partial(_div_point, components=args.components, bound=args.bound, cfg=cfg, op=args.op)
        return ordered_map(fn, alphas, cfg.jobs), "csv"
    _require(args, "alpha")
    return [divisorial_record(args.alpha, args.components, args.bound, cfg, args.op)]


def _div_point(alpha, components, bound, cfg, op):
    return divisorial_record(exact(alpha), components, bound, cfg, op)


# blowup


def blowup_record(delta, delta_prime, cfg: RunConfig, op: str = "pairing") -> dict:
    scn = blowup.BlowupScenario(delta, delta_prime)
    params = scn.parameters()
    if op == "reduce":
        term = blowup.density_reduction(scn)
        return record(
            "blowup", "density_reduction", params, provenance="symbolic",
            term={"coeff": term.coeff, "a": float(term.a), "b": float(term.b), "symbol": term.symbol},
            b_exact=str(term.b),
        )
    if op == "report":
        rep = blowup.scenario_report(scn)
        v = blowup.pairing_integral(scn)
        return record("blowup", "scenario_report", params, v, report=rep)
    v = blowup.pairing_integral(scn)
    extra = {}
    if cfg.check and abs(scn.delta + scn.delta_prime - blowup.BOUNDARY) >= 0.02:
        extra = check_callable(
            scn.integrand_s, v, "infinity", -math.log(blowup.UPPER), tol=cfg.tol, panels=cfg.panels
        ).to_dict()
    return record("blowup", "pairing_integral", params, v, **extra)


def _blowup_point(scn_pair, cfg):
    d, dp = scn_pair
    return blowup_record(d, dp, cfg)


def _run_blowup(args, cfg):
    if args.scan:
        pairs = [(s.delta, s.delta_prime) for s in blowup.region_grid(args.steps)]
        return ordered_map(partial(_blowup_point, cfg=cfg), pairs, cfg.jobs), "csv"
    _require(args, "delta", "delta-prime")
    return [blowup_record(args.delta, args.delta_prime, cfg, args.op)]


# legendre


def _run_legendre(args, cfg):
    f = SampledConvexFunction.load(args.input)
    slopes = None
    if args.slopes:
        parts = args.slopes.split(":")
        if len(parts) != 3:
            raise ValueError(f"--slopes expects lo:hi:count, got {args.slopes!r}")
        slopes = np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    g = legendre_transform(f, slopes, n_slopes=cfg.grid)
    if args.out:
        g.save(args.out, header=("p", "conjugate"))
    lo, hi = subgradient_image(f)
    return [
        record(
            "legendre", "legendre_transform", {"input": args.input, "points": int(f.grid.size)},
            provenance="numeric", subgradient_image=[lo, hi], slopes=int(g.grid.size),
            extension=g.extension.tag(), output=args.out,
        )
    ]


# classify-integral


def _run_integral(args, cfg):
    if args.expr:
        term, form = parse_term(args.expr)
    else:
        _require(args, "a")
        term, form = LogPowerTerm(args.coeff, args.a, args.b), args.at
    bound = args.bound if args.bound is not None else (math.e if form == "infinity" else math.exp(-1))
    params = {"coeff": term.coeff, "a": float(term.a), "b": float(term.b), "form": form, "bound": bound}
    if cfg.check:
        chk = cross_check(term, form, bound, tol=cfg.tol, panels=cfg.panels)
        v, extra = chk.symbolic, chk.to_dict()
    else:
        classify = classify_at_infinity if form == "infinity" else classify_at_zero
        v, extra = classify(term, bound, tol=cfg.tol, panels=cfg.panels), {}
    return [record("classify-integral", "classify_at_" + form, params, v, a_exact=str(term.a), b_exact=str(term.b), **extra)]


# scan

_SCAN_PARAMS = {"radial": ("p",), "toric": ("beta",), "divisorial": ("alpha",), "blowup": ("delta", "deltaPrime", "delta-prime")}


def _scan_point(value, args_dict, cfg):
    a = args_dict
    module, op = a["module"], a["operation"]
    if module == "radial":
        return radial_energy_record(a["n"], exact(value), cfg, op or "classify")
    if module == "toric":
        return toric_beta_record(value, a["q"], cfg, op or "classify")
    if module == "divisorial":
        return divisorial_record(exact(value), a["components"], a["bound"], cfg, op or "classify")
    if a["param"] == "delta":
        return blowup_record(exact(value), exact(a["delta_prime"]), cfg, op or "pairing")
    return blowup_record(exact(a["delta"]), exact(value), cfg, op or "pairing")


def _run_scan(args, cfg):
    if args.param not in _SCAN_PARAMS[args.module]:
        raise ValueError(f"module {args.module} scans {', '.join(_SCAN_PARAMS[args.module][:2])}, not {args.param}")
    values = scan_values(args.start, args.stop, args.step)
    fixed = {
        "module": args.module,
        "operation": args.operation,
        "param": "delta" if args.param == "delta" else args.param,
        "n": args.n,
        "q": args.q,
        "components": args.components,
        "bound": args.bound,
        "delta": args.delta,
        "delta_prime": args.delta_prime,
    }
    return ordered_map(partial(_scan_point, args_dict=fixed, cfg=cfg), values, cfg.jobs), "csv"


_HANDLERS = {
    "radial": _run_radial,
    "toric": _run_toric,
    "divisorial": _run_divisorial,
    "blowup": _run_blowup,
    "legendre": _run_legendre,
    "classify-integral": _run_integral,
    "scan": _run_scan,
}


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.override(
        tol=args.tol, panels=args.panels, grid=args.grid, fit_window=args.window,
        jobs=args.jobs, check=args.check, toric_C=getattr(args, "C", None),
    )


def _emit(records: list[dict], fmt: str, out_path: str | None) -> None:
    if fmt == "csv":
        text = to_csv(records)
    else:
        text = "".join(to_json_line(r) + "\n" for r in records)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        result = _HANDLERS[args.command](args, cfg)
        records, default_fmt = (result if isinstance(result, tuple) else (result, "json"))
        out = None if args.command == "legendre" else args.out
        _emit(records, args.format or default_fmt, out)
    except OracleDisagreement as exc:
        print(f"energia: oracle disagreement: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (ValueError, OSError, EnergiaError) as exc:
        print(f"energia: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
