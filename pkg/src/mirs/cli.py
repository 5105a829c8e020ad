"""Command-line front end: ``mirs sweep | compare | mmin | oracle-check``.

Exit codes: 0 ok, 1 verification failure, 2 usage or config error, 3 IO error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np
import yaml

from mirs import __version__
from mirs.channel import AngleAssignment, GainMode, random_cascade
from mirs.metrics import AnalyticScenario, m_min, received_power, snr_gain_add_irs
from mirs.optimize import SearchSpaceTooLarge, brute_force, parse_solver, solve_closed_form
from mirs.scenario import Scenario
from mirs.sim import SweepSpec, run_sweep

log = logging.getLogger("mirs")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

SEED_ENV = "MIRS_SEED"


class ConfigError(Exception):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


# config key -> (Scenario field, converter)
_SCALAR_KEYS = {
    "freq_ghz": ("freq_hz", lambda v: float(v) * 1e9),
    "n_bs_antennas": ("N", int),
    "m_elements": ("M", int),
    "k_irs": ("K", int),
    "p_dbm": ("p_dbm", float),
    "noise_dbm": ("noise_dbm", float),
    "d_t_m": ("d_t_m", float),
    "d_irs_m": ("d_irs_m", float),
    "d_r_start_m": ("d_r_start_m", float),
    "d_r_stop_m": ("d_r_stop_m", float),
    "d_r_points": ("d_r_points", int),
    "d_r_m": ("d_r_m", float),
    "pathloss_exponent": ("n", float),
    "pl_d0_db": ("pl_d0_db", lambda v: None if v is None else float(v)),
    "d0_m": ("d0_m", float),
    "gain_mode": ("gain_mode", GainMode),
    "antenna_gains": ("antenna_gains", lambda v: None if v is None else
                      tuple((float(a), float(b)) for a, b in v)),
    "angles_rad": ("angles", lambda v: _parse_angles(v)),
    "trials": ("trials", int),
    "seed": ("seed", int),
    "reducer": ("reducer", str),
    "evaluator": ("evaluator", str),
    "workers": ("workers", int),
}

_SWEEP_KEYS = ("variable", "values", "solvers")

_DEFAULTS = Scenario()
_DEFAULT_CONFIG = {
    "freq_ghz": _DEFAULTS.freq_hz / 1e9,
    "n_bs_antennas": _DEFAULTS.N,
    "m_elements": _DEFAULTS.M,
    "k_irs": _DEFAULTS.K,
    "p_dbm": _DEFAULTS.p_dbm,
    "noise_dbm": _DEFAULTS.noise_dbm,
    "d_t_m": _DEFAULTS.d_t_m,
    "d_irs_m": _DEFAULTS.d_irs_m,
    "d_r_start_m": _DEFAULTS.d_r_start_m,
    "d_r_stop_m": _DEFAULTS.d_r_stop_m,
    "d_r_points": _DEFAULTS.d_r_points,
    "d_r_m": _DEFAULTS.d_r_m,
    "pathloss_exponent": _DEFAULTS.n,
    "pl_d0_db": None,
    "d0_m": _DEFAULTS.d0_m,
    "gain_mode": _DEFAULTS.gain_mode.value,
    "antenna_gains": None,
    "angles_rad": "uniform",
    "trials": _DEFAULTS.trials,
    "seed": _DEFAULTS.seed,
    "reducer": _DEFAULTS.reducer,
    "evaluator": _DEFAULTS.evaluator,
    "workers": 1,
}


def _parse_angles(v):
    if v == "uniform" or v is None:
        return None
    if not isinstance(v, dict) or set(v) != {"aoa", "aod"}:
        raise ValueError("angles_rad must be 'uniform' or a mapping with aoa and aod lists")
    return AngleAssignment(tuple(float(a) for a in v["aoa"]),
                           tuple(float(a) for a in v["aod"]))


@dataclass
class Config:
    scenario: Scenario
    sweep: dict
    resolved: dict
    sweep_line: int | None = None


def load_config(path: str, seed_override: int | None = None) -> Config:
    """Parse a YAML config into a :class:`Scenario` plus raw sweep settings.

    Raises :class:`ConfigError` (with a 1-based line when known) for any
    problem with the document, and ``OSError`` when it cannot be read.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None) from None
    if root is None:
        root_items = []
    elif isinstance(root, yaml.MappingNode):
        root_items = root.value
    else:
        raise ConfigError("top level must be a mapping", root.start_mark.line + 1)

    loader = yaml.SafeLoader("")
    values, lines = {}, {}
    sweep, sweep_line = {}, None
    for key_node, value_node in root_items:
        key = key_node.value
        line = key_node.start_mark.line + 1
        if key in values or (key == "sweep" and sweep_line is not None):
            raise ConfigError(f"duplicate key {key!r}", line)
        raw = loader.construct_object(value_node, deep=True)
        if key == "sweep":
            if not isinstance(raw, dict):
                raise ConfigError("sweep must be a mapping", line)
            for sub_key, _ in value_node.value:
                if sub_key.value not in _SWEEP_KEYS:
                    raise ConfigError(f"unknown sweep key {sub_key.value!r}",
                                      sub_key.start_mark.line + 1)
            sweep, sweep_line = raw, line
            continue
        if key not in _SCALAR_KEYS:
            raise ConfigError(f"unknown key {key!r}", line)
        values[key] = raw
        lines[key] = line

    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env_seed!r} is not an integer") from None
        log.info("seed from %s = %s", SEED_ENV, env_seed)
    if seed_override is not None:
        values["seed"] = seed_override

    resolved, fields = {}, {}
    for key, (field_name, conv) in _SCALAR_KEYS.items():
        if key in values:
            raw = values[key]
        else:
            raw = _DEFAULT_CONFIG[key]
            log.info("default %s = %r", key, raw)
        resolved[key] = raw
        try:
            fields[field_name] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lines.get(key)) from None
    try:
        scenario = Scenario(**fields)
    except ValueError as exc:
        raise ConfigError(f"invalid scenario: {exc}", root.start_mark.line + 1
                          if root is not None else None) from None
    return Config(scenario, sweep, resolved, sweep_line)


def _sweep_spec(cfg: Config, solver_names=None) -> SweepSpec:
    sweep = cfg.sweep
    variable = sweep.get("variable", "d_r")
    if solver_names is None:
        solver_names = sweep.get("solvers", ["closed_form"])
    if isinstance(solver_names, str):
        solver_names = [s for s in solver_names.split(",") if s.strip()]
    values = sweep.get("values")
    if values is None:
        if variable != "d_r":
            raise ConfigError(f"sweep over {variable} needs explicit values", cfg.sweep_line)
        values = [float(x) for x in cfg.scenario.d_r_values()]
    try:
        solvers = tuple(parse_solver(str(s)) for s in solver_names)
        return SweepSpec(variable, tuple(values), solvers)
    except ValueError as exc:
        raise ConfigError(str(exc), cfg.sweep_line) from None


def _log_run(cfg: Config, spec: SweepSpec | None = None):
    log.info("mirs %s", _version_string())
    log.info("resolved config: %s", json.dumps(cfg.resolved, sort_keys=True, default=str))
    if spec is not None:
        log.info("sweep: variable=%s values=%d solvers=%s", spec.variable,
                 len(spec.values), ",".join(s.name for s in spec.solvers))
    log.info("seed = %d", cfg.scenario.seed)


def _version_string() -> str:
    import subprocess
    try:
        rev = subprocess.run(["git", "describe", "--always", "--dirty"],
                             cwd=os.path.dirname(__file__), capture_output=True,
                             text=True, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit_sweep(cfg: Config, spec: SweepSpec, args) -> int:
    _log_run(cfg, spec)
    result = run_sweep(cfg.scenario, spec, args.workers)
    text = result.to_json() if args.format == "json" else result.to_csv()
    _write(text, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.seed)
    return _emit_sweep(cfg, _sweep_spec(cfg), args)


def cmd_compare(args) -> int:
    cfg = load_config(args.config, args.seed)
    names = [s for s in args.solvers.split(",") if s.strip()]
    if not names:
        raise ConfigError("--solvers is empty")
    if cfg.sweep.get("variable", "d_r") != "d_r":
        cfg.sweep = {k: v for k, v in cfg.sweep.items() if k != "values"}
    cfg.sweep = dict(cfg.sweep, variable="d_r")
    return _emit_sweep(cfg, _sweep_spec(cfg, names), args)


def cmd_mmin(args) -> int:
    cfg = load_config(args.config)
    _log_run(cfg)
    s = AnalyticScenario.from_scenario(cfg.scenario)
    report = {
        "d_irs_m": s.d_irs, "pathloss_exponent": s.n, "g0": s.g0,
        "m_elements": s.budget.M, "m_min": m_min(s),
        "gain_ratio_add_irs": snr_gain_add_irs(s),
    }
    if args.format == "json":
        _write(json.dumps(report, indent=2) + "\n", None)
    else:
        _write(f"m_min = {report['m_min']:.6g}\n"
               f"gain_ratio_add_irs(M={s.budget.M}) = {report['gain_ratio_add_irs']:.6g}\n",
               None)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    log.info("mirs %s", _version_string())
    log.info("oracle-check m=%d k=%d n=%d levels=%d trials=%d seed=%d",
             args.m, args.k, args.n, args.levels, args.trials, args.seed)
    rng = np.random.default_rng(args.seed)
    factor = math.cos(math.pi / args.levels) ** (2 * args.k)
    failures = 0
    for i in range(args.trials):
        chain = random_cascade(rng, args.m, args.n, args.k)
        cf = received_power(chain, solve_closed_form(chain, 1.0))
        try:
            bf, _ = brute_force(chain, 1.0, args.levels)
        except SearchSpaceTooLarge as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        upper = bf <= cf * (1 + 1e-9)
        lower = bf >= cf * factor * (1 - 1e-9)
        if not (upper and lower):
            failures += 1
            print(f"trial {i}: FAIL brute={bf!r} closed_form={cf!r} "
                  f"upper={'ok' if upper else 'violated'} lower={'ok' if lower else 'violated'}")
    status = "PASS" if failures == 0 else "FAIL"
    print(f"{status}: {args.trials - failures}/{args.trials} instances within "
          f"[{factor:.6g}, 1] x closed form (m={args.m}, k={args.k}, n={args.n}, "
          f"levels={args.levels})")
    return EXIT_OK if failures == 0 else EXIT_VERIFY


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mirs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mirs {__version__}")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    def output_opts(p):
        p.add_argument("config")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=_positive_int, default=None)

    p = sub.add_parser("sweep", help="run the sweep described by a config file")
    output_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="UE-distance sweep for several solvers")
    output_opts(p)
    p.add_argument("--solvers", required=True,
                   help="comma-separated, e.g. closed_form,greedy_q2,random_phase")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("mmin", help="element threshold for adding one more IRS")
    p.add_argument("config")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_mmin)

    p = sub.add_parser("oracle-check", help="brute force vs closed form on random chains")
    p.add_argument("--m", type=_positive_int, default=2)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--n", type=_positive_int, default=2)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def _configure_logging(level: str):
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(level)
    log.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level)
    if getattr(args, "levels", 16) < 2:
        parser.error("--levels must be >= 2")
    try:
        return args.func(args)
    except ConfigError as exc:
        where = getattr(args, "config", "<config>")
        loc = f"{where}:{exc.line}" if exc.line is not None else where
        print(f"{loc}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
