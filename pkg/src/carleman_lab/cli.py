"""carleman-lab <command> --config <path> [--jobs N] [--out DIR]

Configs are INI files. ``[run]`` holds ``seed`` (overridden by the
CARLEMAN_LAB_SEED environment variable), ``[params]`` the problem parameters,
``[family]`` bump-family overrides, and a section named after the command
holds its own options. Unknown keys and malformed values exit with status 2.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import inspect
import os
import sys
from fractions import Fraction

from . import experiments as ex
from .exponents import AdmissibilityError, ProblemParams, as_exponent
from .report import collect_csvs, summarize, write_rows, write_svg_plot

COMMANDS = ("exponents", "ibp-verify", "carleman-check", "three-ball", "vanishing-order", "caccioppoli",
            "infinity", "report")

SEED_ENV = "CARLEMAN_LAB_SEED"


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# Value coercion
# --------------------------------------------------------------------------

def _exponent(raw: str):
    return as_exponent(raw.strip())


def _optional(parser):
    def parse(raw: str):
        raw = raw.strip()
        return None if raw in ("", "none", "None") else parser(raw)
    return parse


SPECIAL = {"s": _exponent, "eps": _optional(Fraction), "p": _optional(_exponent)}


def _coerce(name: str, raw: str, default):
    if name in SPECIAL:
        return SPECIAL[name](raw)
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError("expected a boolean")
        return low in ("true", "yes", "1")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, (tuple, list)):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        kind = type(default[0]) if default else float
        if kind is str:
            return tuple(items)
        if kind is int:
            return tuple(int(x) for x in items)
        return tuple(float(x) for x in items)
    return raw.strip()


def _apply_dataclass(obj, section: configparser.SectionProxy | dict, where: str):
    names = {f.name: f for f in dataclasses.fields(obj)}
    for key, raw in section.items():
        if key not in names:
            raise ConfigError(f"[{where}] {key}: unknown field (expected one of {sorted(names)})")
        try:
            setattr(obj, key, _coerce(key, raw, getattr(obj, key)))
        except (ValueError, ZeroDivisionError) as err:
            raise ConfigError(f"[{where}] {key} = {raw!r}: {err}") from None
    return obj


def _kwargs_for(fn, section, where: str) -> dict:
    sig = inspect.signature(fn)
    out = {}
    for key, raw in section.items():
        if key not in sig.parameters or key == "jobs":
            raise ConfigError(f"[{where}] {key}: unknown field (expected one of {sorted(p for p in sig.parameters if p != 'jobs')})")
        default = sig.parameters[key].default
        try:
            out[key] = _coerce(key, raw, default)
        except (ValueError, ZeroDivisionError) as err:
            raise ConfigError(f"[{where}] {key} = {raw!r}: {err}") from None
    return out


# --------------------------------------------------------------------------
# Config loading
# --------------------------------------------------------------------------

def load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file {path!r} not found")
        try:
            cp.read(path)
        except configparser.Error as err:
            raise ConfigError(f"cannot parse {path!r}: {err}") from None
    return cp


def resolve_seed(cp: configparser.ConfigParser) -> int:
    raw = os.environ.get(SEED_ENV)
    source = SEED_ENV
    if raw is None:
        raw = cp.get("run", "seed", fallback="0")
        source = "[run] seed"
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{source} = {raw!r}: expected an integer") from None


def _section(cp, name):
    return cp[name] if cp.has_section(name) else {}


def _params(cp) -> ProblemParams:
    cfg = _apply_dataclass(ex.ExponentsConfig(), _section(cp, "params"), "params")
    try:
        return ProblemParams(cfg.n, cfg.m, cfg.alpha0, cfg.s, cfg.eps)
    except AdmissibilityError as err:
        raise ConfigError(f"[params] {err}") from None


def _family(cp, base: ex.FamilyConfig, seed: int) -> ex.FamilyConfig:
    fam = dataclasses.replace(base, seed=seed)
    return _apply_dataclass(fam, _section(cp, "family"), "family")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def run_command(command: str, cp: configparser.ConfigParser, jobs: int, out: str) -> tuple[ex.Outcome, list[str]]:
    seed = resolve_seed(cp)
    sec = _section(cp, command)
    artifacts = []
    if command == "exponents":
        cfg = _apply_dataclass(ex.ExponentsConfig(), _section(cp, "params"), "params")
        _params(cp)
        outcome = ex.exponents_experiment(cfg)
    elif command == "ibp-verify":
        cfg = _apply_dataclass(ex.IbpConfig(), sec, command)
        cfg.family = _family(cp, cfg.family, seed)
        outcome = ex.ibp_experiment(cfg, jobs)
    elif command == "carleman-check":
        cfg = _apply_dataclass(ex.CarlemanConfig(), sec, command)
        params_sec = _section(cp, "params")
        _apply_dataclass(cfg, params_sec, "params")
        base = ex.second_order_family() if cfg.kind == "eq3.38" else cfg.family
        cfg.family = _family(cp, base, seed)
        try:
            cfg.params()
        except AdmissibilityError as err:
            raise ConfigError(f"[params] {err}") from None
        if cfg.tau_min <= 1 or cfg.tau_max / cfg.tau_min < 8:
            raise ConfigError(f"[{command}] tau range must start above 1 and span 3 doublings")
        outcome = ex.carleman_experiment(cfg)
        rep = outcome.extra.get("report")
        ratio_rep = getattr(rep, "direct", rep)
        if ratio_rep is not None:
            series = {f"member {i}": (ratio_rep.taus, ratio_rep.member_ratio[i])
                      for i in range(ratio_rep.member_ratio.shape[0])}
            artifacts.append(write_svg_plot(os.path.join(out, "carleman-check.svg"), series,
                                            f"{ratio_rep.tag}: LHS/RHS", "tau", "ratio"))
    elif command == "three-ball":
        kw = _kwargs_for(ex.three_ball_experiment, sec, command)
        kw.setdefault("seed", seed)
        outcome = ex.three_ball_experiment(**kw)
    elif command == "vanishing-order":
        kw = _kwargs_for(ex.vanishing_order_experiment, sec, command)
        outcome = ex.vanishing_order_experiment(jobs=jobs, **kw)
        ks = [r["k"] for r in outcome.rows if r["family"] == "harmonic"]
        got = [r["measured_order"] for r in outcome.rows if r["family"] == "harmonic"]
        if ks:
            artifacts.append(write_svg_plot(os.path.join(out, "vanishing-order.svg"),
                                            {"measured": (ks, got), "exact": (ks, ks)},
                                            "vanishing order, harmonic family", "k", "order", False, False))
    elif command == "caccioppoli":
        outcome = ex.caccioppoli_experiment(**_kwargs_for(ex.caccioppoli_experiment, sec, command))
    elif command == "infinity":
        if "params" in sec:
            raise ConfigError(f"[{command}] params: set problem parameters in [params]")
        outcome = ex.infinity_experiment(_params(cp), **_kwargs_for(ex.infinity_experiment, sec, command))
    elif command == "report":
        src = sec.get("inputs", out) if sec else out
        paths = collect_csvs(src)
        if not paths:
            raise ConfigError(f"[report] no result CSV files in {src!r}")
        rows = summarize(paths)
        for r in rows:
            r["passed"] = r["all_passed"]
        outcome = ex.Outcome("report", rows, all(r["all_passed"] for r in rows),
                             f"{len(rows)} tags from {len(paths)} CSV files")
        path = write_rows(os.path.join(out, "summary.csv"), rows)
        return outcome, [path]
    else:
        raise ConfigError(f"unknown command {command!r}")
    path = write_rows(os.path.join(out, f"{command}.csv"), outcome.rows)
    return outcome, [path] + artifacts


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carleman-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", default=None, help="INI config; built-in defaults when omitted")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for independent checks")
    ap.add_argument("--out", default="results", help="output directory for CSV and SVG files")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cp = load_config(args.config)
        outcome, paths = run_command(args.command, cp, args.jobs, args.out)
    except ConfigError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return 2
    print(outcome.line())
    if args.command == "report":
        for r in outcome.rows:
            print(f"  {r['tag']:<22} {r['passed_rows']:>5}/{r['rows']:<5} {'ok' if r['all_passed'] else 'FAILED'}")
    for p in paths:
        print(f"  wrote {p}")
    if not outcome.passed:
        print(f"check failed; see {paths[0]}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
