"""Scenario runner: every operation as a reproducible command.

Configs are strict JSON: any unrecognized key aborts with exit code 2,
so a typo in a tolerance never silently runs with defaults.  Outputs are
written atomically under --out.  Exit codes: 0 success, 2 validation
failure, 3 numerical divergence (with the offending operation named).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import exponents, fields, maximal, spaces, sweeps
from .errors import (BracketingError, ConfigError, DivergenceError,
                     DomainError, UnsupportedFieldError, VexsError)
from .functionals import (QuadratureSpec, bbm_functional, eps_functional,
                          layer_cake_check, nguyen_functional)
from .reporting import write_csv, write_json_report, write_plot_data
from .sphere import default_rule, k_np


def check_keys(cfg: dict, allowed: set, context: str) -> None:
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in {context}: {', '.join(sorted(unknown))}")


def parse_field(cfg: dict) -> fields.ScalarField:
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise ConfigError("field config must be a mapping with a family")
    fam = cfg["family"]
    if fam == "gaussian":
        check_keys(cfg, {"family", "sigma", "center", "scale", "dimension"},
                   "field")
        return fields.Gaussian(cfg.get("sigma", 1.0), cfg.get("center", 0.0),
                               cfg.get("scale", 1.0),
                               int(cfg.get("dimension", 1)))
    if fam == "tent":
        check_keys(cfg, {"family", "scale", "dimension"}, "field")
        return fields.Tent(cfg.get("scale", 1.0), int(cfg.get("dimension", 1)))
    if fam == "smooth-bump":
        check_keys(cfg, {"family", "scale", "dimension"}, "field")
        return fields.SmoothBump(cfg.get("scale", 1.0),
                                 int(cfg.get("dimension", 1)))
    if fam == "power-tail":
        check_keys(cfg, {"family", "scale"}, "field")
        return fields.PowerTail(cfg.get("scale", 1.0))
    if fam == "log-singular":
        check_keys(cfg, {"family", "window"}, "field")
        return fields.LogSingular(tuple(cfg.get("window", (0.0, 1.0))))
    if fam == "sampled-table":
        check_keys(cfg, {"family", "csv", "xs", "us"}, "field")
        if "csv" in cfg:
            return fields.SampledTable.from_csv(cfg["csv"])
        return fields.SampledTable(cfg["xs"], cfg["us"])
    raise ConfigError(f"unknown field family {fam!r}")


def parse_exponent(cfg: dict) -> exponents.ExponentField:
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise ConfigError("exponent config must be a mapping with a family")
    fam = cfg["family"]
    if fam == "constant":
        check_keys(cfg, {"family", "value", "dimension"}, "exponent")
        return exponents.constant(cfg["value"], int(cfg.get("dimension", 1)))
    if fam == "inverse-quadratic":
        check_keys(cfg, {"family", "a", "b", "dimension"}, "exponent")
        return exponents.inverse_quadratic(cfg["a"], cfg["b"],
                                           int(cfg.get("dimension", 1)))
    if fam == "sin-squared":
        check_keys(cfg, {"family", "a", "b", "direction", "dimension"},
                   "exponent")
        return exponents.sin_squared(cfg["a"], cfg["b"], cfg["direction"],
                                     int(cfg.get("dimension", 1)))
    if fam == "piecewise-table":
        check_keys(cfg, {"family", "breaks", "values", "interp"}, "exponent")
        return exponents.piecewise_table(cfg["breaks"], cfg["values"],
                                         cfg.get("interp", "const"))
    raise ConfigError(f"unknown exponent family {fam!r}")


def parse_quad(cfg: dict | None, seed: int = 0) -> QuadratureSpec:
    if cfg is None:
        return QuadratureSpec(seed=seed)
    check_keys(cfg, {"truncation_radius", "sphere_rule", "outer_x_tolerance",
                     "h_bracket_grid", "h_max", "rel_tol", "seed"}, "quad")
    rule = None
    if "sphere_rule" in cfg:
        rc = cfg["sphere_rule"]
        check_keys(rc, {"dimension", "node_count"}, "sphere_rule")
        nc = rc.get("node_count")
        rule = default_rule(int(rc["dimension"]),
                            tuple(nc) if isinstance(nc, list) else nc)
    kwargs = {k: cfg[k] for k in ("truncation_radius", "outer_x_tolerance",
                                  "h_bracket_grid", "h_max", "rel_tol")
              if k in cfg}
    return QuadratureSpec(sphere_rule=rule, seed=int(cfg.get("seed", seed)),
                          **kwargs)


def load_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


# ----------------------------------------------------------------------
# layer-cake presets
# ----------------------------------------------------------------------

def lemma41_preset(name: str, seed: int = 0):
    """A (phi, psi, alpha, box, y_seeds) instance for the exchange check."""
    if name == "unit-distance":
        return (lambda x, y: np.abs(x - y),
                lambda x, y: np.ones_like(np.asarray(x, dtype=float)),
                lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                (0.0, 1.0), None)
    if name == "always-large":
        return (lambda x, y: np.full_like(np.asarray(x, dtype=float), 2.0),
                lambda x, y: np.ones_like(np.asarray(x, dtype=float)),
                lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                (0.0, 1.0), None)
    if name == "random-smooth":
        rng = np.random.default_rng(seed)
        a0 = 0.65 + 0.5 * rng.random()
        a1 = 0.9 * a0 * rng.random()
        kx, ky = rng.uniform(1.0, 4.0, size=2)
        ph = rng.uniform(0.0, 2 * math.pi, size=2)
        b0 = 0.4 + rng.random()
        b1 = 0.8 * b0 * rng.random()
        kp = rng.uniform(1.0, 3.0)
        pexp = exponents.inverse_quadratic(1.0 + rng.random(),
                                           0.5 + rng.random())
        eps = 0.1 + 0.5 * rng.random()

        def phi(x, y):
            return a0 + a1 * np.sin(kx * x + ph[0]) * np.cos(ky * y + ph[1])

        def psi(x, y):
            return b0 + b1 * np.sin(kp * (x + y))

        def alpha(x):
            return pexp.eval(np.asarray(x, dtype=float)) + eps - 1.0

        return phi, psi, alpha, (0.0, 1.0), None
    raise ConfigError(f"unknown lemma41 preset {name!r}")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _out_path(args, filename: str) -> str:
    return os.path.join(args.out, filename)


def cmd_constants(args) -> int:
    ns = [int(t) for t in str(args.n).split(",")]
    ps = [float(t) for t in str(args.p).split(",")]
    rows = []
    for n in ns:
        rule = default_rule(n)
        for p in ps:
            closed = k_np(n, p)
            quad = k_np(n, p, rule)
            rel = abs(closed - quad) / abs(closed)
            rows.append([n, p, closed, quad, rel])
            _say(args, f"K_{{{n},{p:g}}} = {closed:.12g} "
                       f"(quadrature {quad:.12g}, rel diff {rel:.2e})")
    if args.out:
        write_csv(_out_path(args, "constants.csv"),
                  ["n", "p", "K_closed", "K_quad", "rel_diff"], rows)
    return 0


def cmd_lemma41(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        check_keys(cfg, {"name", "preset", "seed", "quad"}, "lemma41 config")
        preset = cfg.get("preset", "unit-distance")
        seed = int(cfg.get("seed", args.seed))
        name = cfg.get("name", preset)
        quad = parse_quad(cfg.get("quad"), seed)
    else:
        preset, seed, name = args.preset, args.seed, args.preset
        quad = QuadratureSpec(seed=seed)
    phi, psi, alpha, box, y_seeds = lemma41_preset(preset, seed)
    res = layer_cake_check(phi, psi, alpha, box, quad, y_seeds)
    ok = res.residual <= 1e-6
    _say(args, f"lemma41 {name}: lhs = {res.lhs:.6f}, rhs = "
               f"{res.rhs_small + res.rhs_large:.6f} "
               f"(small {res.rhs_small:.6f}, large {res.rhs_large:.6f}), "
               f"residual = {res.residual:.3e} "
               f"{'PASS' if ok else 'FAIL'}")
    if args.out:
        write_json_report(_out_path(args, f"{name}.lemma41.json"), {
            "operation": "lemma41",
            "preset": preset,
            "seed": seed,
            "lhs": res.lhs,
            "rhs_small": res.rhs_small,
            "rhs_large": res.rhs_large,
            "residual": res.residual,
            "pass": ok,
        })
    return 0


def _functional_record(name: str, params: dict, fv) -> dict:
    return {
        "functional": name,
        "params": params,
        "value": fv.value,
        "error_estimate": fv.error_estimate,
        "node_count": fv.node_count,
        "truncation_radius": fv.truncation_radius,
        "empty_superlevel": fv.empty_superlevel,
    }


def cmd_nguyen(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "exponent", "delta", "weight_mode",
                     "quad"}, "nguyen config")
    u = parse_field(cfg["field"])
    p = parse_exponent(cfg["exponent"])
    quad = parse_quad(cfg.get("quad"), args.seed)
    mode = cfg.get("weight_mode", "unit")
    fv = nguyen_functional(u, p, float(cfg["delta"]), mode, quad)
    name = cfg.get("name", "nguyen")
    _say(args, f"nguyen {name}: value = {fv.value:.8g} "
               f"(delta {cfg['delta']}, {mode})")
    if args.out:
        write_json_report(
            _out_path(args, f"{name}.nguyen.json"),
            _functional_record("nguyen", {"delta": float(cfg["delta"]),
                                          "weight_mode": mode}, fv))
    return 0


def cmd_eps(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "exponent", "epsilon", "mode", "quad"},
               "eps config")
    u = parse_field(cfg["field"])
    p = parse_exponent(cfg["exponent"])
    quad = parse_quad(cfg.get("quad"), args.seed)
    mode = cfg.get("mode", "full")
    eps = float(cfg.get("epsilon", 0.5))
    fv = eps_functional(u, p, eps, mode, quad)
    name = cfg.get("name", "eps")
    _say(args, f"eps {name}: value = {fv.value:.8g} (epsilon {eps}, {mode})")
    if args.out:
        write_json_report(
            _out_path(args, f"{name}.eps.json"),
            _functional_record("eps", {"epsilon": eps, "mode": mode}, fv))
    return 0


def cmd_bbm(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "p", "s", "quad"}, "bbm config")
    u = parse_field(cfg["field"])
    quad = parse_quad(cfg.get("quad"), args.seed)
    fv = bbm_functional(u, float(cfg["p"]), float(cfg["s"]), quad)
    name = cfg.get("name", "bbm")
    _say(args, f"bbm {name}: value = {fv.value:.8g} "
               f"(p {cfg['p']}, s {cfg['s']})")
    if args.out:
        write_json_report(
            _out_path(args, f"{name}.bbm.json"),
            _functional_record("bbm", {"p": float(cfg["p"]),
                                       "s": float(cfg["s"])}, fv))
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "exponent", "kind", "grid", "quad"},
               "sweep config")
    u = parse_field(cfg["field"])
    p = parse_exponent(cfg["exponent"])
    quad = parse_quad(cfg.get("quad"), args.seed)
    report = sweeps.run_sweep(cfg["kind"], u, p, cfg["grid"], quad)
    name = cfg.get("name", cfg["kind"])
    _say(args, f"sweep {name}: extrapolated = {report.extrapolated:.6g}, "
               f"target = {report.target:.6g}, "
               f"fit exponent = {report.fit_exponent:.3g}"
               f"{' (flagged)' if report.fit_flagged else ''}")
    if args.out:
        payload = {"operation": "sweep", "name": name}
        payload.update(report.as_dict())
        write_json_report(_out_path(args, f"{name}.report.json"), payload)
        write_plot_data(_out_path(args, f"{name}.plot.dat"),
                        report.grid, [v.value for v in report.values],
                        annotation=f"target = {report.target!r}")
    return 0


def cmd_modular(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "exponent", "weight", "lambda", "quad"},
               "modular config")
    u = parse_field(cfg["field"])
    p = parse_exponent(cfg["exponent"])
    weight = parse_field(cfg["weight"]) if "weight" in cfg else None
    quad = parse_quad(cfg.get("quad"), args.seed)
    mv = spaces.modular(u, p, weight, float(cfg.get("lambda", 1.0)), quad)
    name = cfg.get("name", "modular")
    _say(args, f"modular {name}: value = {mv.value:.10g}")
    if args.out:
        write_json_report(_out_path(args, f"{name}.modular.json"), {
            "operation": "modular",
            "value": mv.value,
            "error_estimate": mv.error_estimate,
            "node_count": mv.node_count,
            "truncation_radius": mv.truncation_radius,
        })
    return 0


def cmd_norm(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "exponent", "weight", "quad"},
               "norm config")
    u = parse_field(cfg["field"])
    p = parse_exponent(cfg["exponent"])
    weight = parse_field(cfg["weight"]) if "weight" in cfg else None
    quad = parse_quad(cfg.get("quad"), args.seed)
    res = spaces.luxemburg_norm(u, p, weight, quad)
    name = cfg.get("name", "norm")
    _say(args, f"norm {name}: value = {res.value:.10g} "
               f"({res.iterations} bisection iterations)")
    if args.out:
        write_json_report(_out_path(args, f"{name}.norm.json"), {
            "operation": "norm",
            "norm": res.value,
            "modular": res.modular_at_value,
            "bracket_iterations": res.iterations,
            "node_count": res.node_count,
        })
    return 0


def cmd_fracnorm(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "exponent", "s", "quad"},
               "fracnorm config")
    u = parse_field(cfg["field"])
    base = parse_exponent(cfg["exponent"])
    pair = exponents.PairExponentField(base)
    quad = parse_quad(cfg.get("quad"), args.seed)
    res = spaces.frac_seminorm(u, float(cfg["s"]), pair, quad)
    name = cfg.get("name", "fracnorm")
    _say(args, f"fracnorm {name}: value = {res.value:.10g} "
               f"({res.iterations} bisection iterations)")
    if args.out:
        write_json_report(_out_path(args, f"{name}.fracnorm.json"), {
            "operation": "fracnorm",
            "value": res.value,
            "bracket_iterations": res.iterations,
            "node_count": res.node_count,
        })
    return 0


def cmd_maximal(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "points", "r_max", "depth", "omega",
                     "quad"}, "maximal config")
    u = parse_field(cfg["field"])
    profile = maximal.maximal_profile(
        u, cfg["points"], float(cfg.get("r_max", 10.0)),
        int(cfg.get("depth", 3)), cfg.get("omega"))
    name = cfg.get("name", "maximal")
    _say(args, f"maximal {name}: max value = {max(profile.values):.8g} "
               f"over {len(profile.points)} points")
    if args.out:
        write_json_report(_out_path(args, f"{name}.maximal.json"), {
            "operation": "maximal",
            "points": list(profile.points),
            "values": list(profile.values),
            "search_radii": list(profile.search_radii),
            "depth": profile.depth,
        })
    return 0


def cmd_counterexample(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        check_keys(cfg, {"name", "r_values", "quad"}, "counterexample config")
        r_values = cfg["r_values"]
        name = cfg.get("name", "counterexample")
        quad = parse_quad(cfg.get("quad"), args.seed)
    else:
        r_values = [float(t) for t in str(args.r_values).split(",")]
        name = "counterexample"
        quad = QuadratureSpec(seed=args.seed)
    table = maximal.counterexample_experiment(r_values, quad)
    _say(args, f"counterexample: modular(u) = {table.modular_u:.8g}, "
               f"growth exponent fit = {table.growth_exponent_fit:.4f}")
    if args.out:
        rows = [[R, table.modular_u, m, table.growth_exponent_fit]
                for R, m in zip(table.r_values, table.modular_mu)]
        write_csv(_out_path(args, f"{name}.csv"),
                  ["R", "modular_u", "modular_Mu", "growth_exponent_fit"],
                  rows)
    return 0


def cmd_bmo(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "field", "interior", "balls", "quad"},
               "bmo config")
    u = parse_field(cfg["field"])
    res = maximal.bmo_quantity(u, tuple(cfg["interior"]),
                               [tuple(b) for b in cfg["balls"]])
    name = cfg.get("name", "bmo")
    _say(args, f"bmo {name}: sup over {len(res.per_ball)} balls = "
               f"{res.sup:.8g}")
    if args.out:
        write_json_report(_out_path(args, f"{name}.bmo.json"), {
            "operation": "bmo",
            "per_ball": list(res.per_ball),
            "sup": res.sup,
        })
    return 0


def cmd_diagnose_exponent(args) -> int:
    cfg = load_config(args.config)
    check_keys(cfg, {"name", "exponent", "pairs", "n_pairs", "range", "seed"},
               "diagnose config")
    p = parse_exponent(cfg["exponent"])
    if "pairs" in cfg:
        pairs = np.asarray(cfg["pairs"], dtype=float)
    else:
        rng = np.random.default_rng(int(cfg.get("seed", args.seed)))
        lo, hi = cfg.get("range", [-10.0, 10.0])
        m = int(cfg.get("n_pairs", 1000))
        pairs = rng.uniform(lo, hi, size=(m, 2, p.dimension))
    diag = exponents.log_holder_diagnose(p, pairs)
    name = cfg.get("name", "diagnose")
    _say(args, f"diagnose {name}: c_holder = {diag.c_holder_estimate:.6g}, "
               f"c_decay = {diag.c_decay_estimate}, "
               f"satisfied = {diag.satisfied}")
    if args.out:
        write_json_report(_out_path(args, f"{name}.diagnose.json"), {
            "operation": "diagnose-exponent",
            "c_holder_estimate": diag.c_holder_estimate,
            "c_decay_estimate": diag.c_decay_estimate,
            "satisfied": diag.satisfied,
        })
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario config (JSON)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="vexs",
        description="variable-exponent nonlocal functional toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", parents=[common],
                        help="K_{n,p} closed form vs sphere quadrature")
    sp.add_argument("--n", default="1,2,3")
    sp.add_argument("--p", default="2")
    sp.set_defaults(fn=cmd_constants)

    sp = sub.add_parser("lemma41", parents=[common],
                        help="layer-cake exchange identity check")
    sp.add_argument("--preset", default="unit-distance")
    sp.set_defaults(fn=cmd_lemma41)

    for name, fn in (("modular", cmd_modular), ("norm", cmd_norm),
                     ("fracnorm", cmd_fracnorm), ("nguyen", cmd_nguyen),
                     ("eps", cmd_eps), ("bbm", cmd_bbm),
                     ("sweep", cmd_sweep), ("maximal", cmd_maximal),
                     ("bmo", cmd_bmo),
                     ("diagnose-exponent", cmd_diagnose_exponent)):
        sp = sub.add_parser(name, parents=[common])
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("counterexample", parents=[common],
                        help="maximal-function divergence experiment")
    sp.add_argument("--r-values", default="10,100,1000,10000")
    sp.set_defaults(fn=cmd_counterexample)
    return parser


_NEEDS_CONFIG = {cmd_modular, cmd_norm, cmd_fracnorm, cmd_nguyen, cmd_eps,
                 cmd_bbm, cmd_sweep, cmd_maximal, cmd_bmo,
                 cmd_diagnose_exponent}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.fn in _NEEDS_CONFIG and not args.config:
            raise ConfigError(f"{args.command} requires --config")
        return args.fn(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, UnsupportedFieldError, BracketingError) as exc:
        print(f"numerical failure in {args.command}: {exc}", file=sys.stderr)
        return 3
    except VexsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
