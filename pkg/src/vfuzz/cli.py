"""Command-line front end: ``vfuzz check | eval | dist | verify``.

Exit codes: 0 on success, 1 when a program is rejected or a verified law
fails, 2 on usage errors.  Rationals are printed as ``"p/q"`` strings and
infinity as ``"inf"``; JSON keys are sorted so equal runs give equal bytes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from .distance import MODES, DistanceError, DistQuery, distance
from .effects import MONADS, EffectError, StateMonad, get_monad
from .evaluation import EvalError, Evaluator
from .parser import ParseError, parse_file, parse_type
from .printer import show_type, show_value
from .quantale import QuantaleError, format_scalar, get_quantale, quantale_names
from .relators import RelatorCfg, RelatorError
from .syntax import SyntaxError_
from .typecheck import TypeCheckError, infer
from .verify import SUITES, run_suite

RELATORS = ("auto", "partial", "partial_sym", "hausdorff", "hausdorff_sym",
            "wasserstein", "wasserstein_bot", "wasserstein_full", "state")


class CliError(Exception):
    def __init__(self, code: str, msg: str, status: int = 2):
        super().__init__(msg)
        self.code = code
        self.status = status


@dataclass
class CliConfig:
    command: str
    files: list = field(default_factory=list)
    monad: str = "dist"
    locations: tuple = ("l",)
    quantale: str = "unit"
    relator: str = "auto"
    mode: str = "sim"
    budget: int = 8
    iters: int = 4
    probe_depth: int = 2
    type: Optional[str] = None
    vars: list = field(default_factory=list)
    suite: str = "all"
    seed: int = 0
    json: bool = False

    def validate(self):
        if self.monad not in MONADS:
            raise CliError("usage", f"unknown monad {self.monad!r}")
        if self.relator not in RELATORS:
            raise CliError("usage", f"unknown relator {self.relator!r}")
        if self.mode not in MODES:
            raise CliError("usage", f"unknown mode {self.mode!r}")
        try:
            get_quantale(self.quantale)
        except QuantaleError as err:
            raise CliError("usage", str(err)) from None
        if self.relator.startswith("wasserstein") or (
                self.relator == "auto" and self.monad in ("dist", "state")):
            if self.command == "dist" and self.quantale != "unit":
                raise CliError("usage", "the Wasserstein and state relators need --quantale unit")
        for name, v in (("budget", self.budget), ("iters", self.iters)):
            if v < 1:
                raise CliError("usage", f"--{name} must be positive")
        if self.probe_depth < 0:
            raise CliError("usage", "--probe-depth must be non-negative")
        if self.command == "dist" and self.type is None:
            raise CliError("usage", "dist needs --type")
        if self.command == "verify" and self.suite != "all" and self.suite not in SUITES:
            raise CliError("usage", f"unknown suite {self.suite!r}; expected all or one of "
                           + ", ".join(SUITES))
        try:
            get_monad(self.monad, self.locations)
        except EffectError as err:
            raise CliError("usage", str(err)) from None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vfuzz", description=(
        "Type, evaluate and measure programs of a fuzzy effectful lambda calculus."))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, effects=True):
        sp.add_argument("--json", action="store_true", help="emit JSON")
        if effects:
            sp.add_argument("--monad", default="dist", choices=MONADS,
                            help="effect monad (default dist)")
            sp.add_argument("--locations", default="l",
                            help="comma-separated state locations for --monad state (default l)")

    sp = sub.add_parser("check", help="infer the type and variable sensitivities of a program")
    sp.add_argument("file")
    sp.add_argument("--var", action="append", default=[], metavar="NAME:TYPE",
                    help="declare a free variable (repeatable)")
    common(sp)

    sp = sub.add_parser("eval", help="evaluate a closed term up to a budget")
    sp.add_argument("file")
    sp.add_argument("--budget", type=int, default=8, help="evaluation budget (default 8)")
    common(sp)

    sp = sub.add_parser("dist", help="approximate the behavioural distance of two programs")
    sp.add_argument("lhs")
    sp.add_argument("rhs")
    sp.add_argument("--type", required=True, help="type of both programs")
    sp.add_argument("--quantale", default="unit",
                    help="quantale: " + ", ".join(quantale_names()) + " (default unit)")
    sp.add_argument("--relator", default="auto", choices=RELATORS,
                    help="relator; wasserstein means the truncated variant (default auto)")
    sp.add_argument("--mode", default="sim", choices=MODES, help="default sim")
    sp.add_argument("--budget", type=int, default=8, help="evaluation budget (default 8)")
    sp.add_argument("--iters", type=int, default=4, help="approximant iterations (default 4)")
    sp.add_argument("--probe-depth", type=int, default=2,
                    help="depth of argument probes for function types (default 2)")
    common(sp)

    sp = sub.add_parser("verify", help="run the randomized law suites")
    sp.add_argument("--suite", default="all", help="all or one of " + ", ".join(SUITES))
    sp.add_argument("--seed", type=int, default=0,
                    help="random seed; the VFUZZ_SEED environment variable overrides it")
    common(sp, effects=False)
    return p


def config_from_args(argv) -> CliConfig:
    ns = _parser().parse_args(argv)
    cfg = CliConfig(command=ns.command, json=ns.json)
    for name in ("monad", "quantale", "relator", "mode", "budget", "iters", "type",
                 "probe_depth", "suite", "seed"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "locations"):
        cfg.locations = tuple(x.strip() for x in ns.locations.split(",") if x.strip())
    if ns.command in ("check", "eval"):
        cfg.files = [ns.file]
    elif ns.command == "dist":
        cfg.files = [ns.lhs, ns.rhs]
    cfg.vars = getattr(ns, "var", [])
    if ns.command == "verify" and os.environ.get("VFUZZ_SEED"):
        try:
            cfg.seed = int(os.environ["VFUZZ_SEED"])
        except ValueError:
            raise CliError("usage", "VFUZZ_SEED must be an integer") from None
    return cfg


# -- commands -------------------------------------------------------------

def _load(path):
    try:
        return parse_file(path)
    except OSError as err:
        raise CliError("io", f"{path}: {err.strerror or err}") from None
    except ParseError as err:
        raise CliError("parse", f"{path}:{err}", 1) from None


def _type(text):
    try:
        return parse_type(text)
    except ParseError as err:
        raise CliError("usage", f"bad type {text!r}: {err}") from None


def _scope(decls) -> dict:
    scope = {}
    for d in decls:
        name, sep, ty = d.partition(":")
        if not sep or not name.strip():
            raise CliError("usage", f"--var expects NAME:TYPE, got {d!r}")
        scope[name.strip()] = _type(ty)
    return scope


def cmd_check(cfg: CliConfig) -> dict:
    prog = _load(cfg.files[0])
    monad = get_monad(cfg.monad, cfg.locations)
    try:
        ty, demand = infer(prog, _scope(cfg.vars), None, monad)
    except TypeCheckError as err:
        raise CliError(err.code, str(err), 1) from None
    return {"type": show_type(ty),
            "sensitivities": {x: format_scalar(s) for x, s in sorted(demand.items())}}


def _support(monad, m):
    name = monad.name
    if name == "partial":
        return [[show_value(m.value), "1"]] if m.defined else [], "1" if m.defined else "0"
    if name == "powerset":
        items = sorted(show_value(v) for v in m)
        return [[v, "1"] for v in items], "1" if items else "0"
    rows = sorted((show_value(v), p) for v, p in m.items())
    return [[v, format_scalar(p)] for v, p in rows], format_scalar(m.mass)


def cmd_eval(cfg: CliConfig) -> dict:
    prog = _load(cfg.files[0])
    monad = get_monad(cfg.monad, cfg.locations)
    try:
        res = Evaluator(monad).eval(prog, cfg.budget)
    except EvalError as err:
        raise CliError(err.code, str(err), 1) from None
    out = {"stabilized": res.exact, "budget": res.n}
    if isinstance(monad, StateMonad):
        states = {}
        for b in monad.states:
            rows = sorted((show_value(v), _bits(monad, b2), p) for (b2, v), p in res.value(b).items())
            states[_bits(monad, b)] = {
                "support": [[v, s, format_scalar(p)] for v, s, p in rows],
                "mass": format_scalar(res.value(b).mass)}
        out["states"] = states
    else:
        out["support"], out["mass"] = _support(monad, res.value)
    return out


def _bits(monad, b) -> str:
    return ",".join(f"{l}={x}" for l, x in zip(monad.locations, b))


def cmd_dist(cfg: CliConfig) -> dict:
    ty = _type(cfg.type)
    lhs, rhs = (_load(f) for f in cfg.files)
    q = DistQuery(lhs, rhs, ty, mode=cfg.mode, quantale=cfg.quantale,
                  relator=RelatorCfg(cfg.relator), monad=cfg.monad, locations=cfg.locations,
                  budget=cfg.budget, iters=cfg.iters, probe_depth=cfg.probe_depth)
    try:
        res = distance(q)
    except DistanceError as err:
        raise CliError(err.code, str(err), 2 if err.code == "usage" else 1) from None
    except RelatorError as err:
        raise CliError("usage", str(err)) from None
    return {"value": format_scalar(res.value) if not isinstance(res.value, bool) else res.value,
            "quantale": res.quantale, "stabilized": res.stabilized,
            "iterations": res.iterations,
            "trace": [v if isinstance(v, bool) else format_scalar(v) for v in res.trace]}


def cmd_verify(cfg: CliConfig) -> dict:
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    suites = []
    for name in names:
        rep = run_suite(name, cfg.seed)
        suites.append({"suite": name, "ok": rep.ok, "laws": [
            {"law": r.law, "ok": r.ok, "passed": r.passed, "failed": r.failed,
             "inconclusive": r.inconclusive, "vacuous": r.vacuous, "counterexample": r.counterexample}
            for r in rep.results]})
    return {"seed": cfg.seed, "ok": all(s["ok"] for s in suites), "suites": suites}


COMMANDS = {"check": cmd_check, "eval": cmd_eval, "dist": cmd_dist, "verify": cmd_verify}


def _pretty(cfg: CliConfig, out: dict) -> str:
    c = cfg.command
    if c == "check":
        lines = [out["type"]]
        lines += [f"  {x} : {s}" for x, s in out["sensitivities"].items()]
        return "\n".join(lines)
    if c == "eval":
        flag = "" if out["stabilized"] else "  (not stabilized)"
        if "states" in out:
            lines = []
            for b, row in out["states"].items():
                lines.append(f"from {b}: mass {row['mass']}{flag}")
                lines += [f"  {p}  {v}  -> {s}" for v, s, p in row["support"]]
            return "\n".join(lines)
        lines = [f"mass {out['mass']}{flag}"]
        lines += [f"  {p}  {v}" for v, p in out["support"]]
        return "\n".join(lines)
    if c == "dist":
        flag = "stabilized" if out["stabilized"] else "not stabilized"
        value = out["value"]
        if isinstance(value, bool):
            value = "true" if value else "false"
        trace = " ".join(t if isinstance(t, str) else str(t).lower() for t in out["trace"])
        return f"{value}  ({flag}, {out['iterations']} iterations; trace {trace})"
    lines = []
    for s in out["suites"]:
        for r in s["laws"]:
            status = "PASS" if r["ok"] else "FAIL"
            extra = f", {r['inconclusive']} inconclusive" if r["inconclusive"] else ""
            if r["vacuous"]:
                extra += f", {r['vacuous']} vacuous"
            total = r["passed"] + r["failed"] + r["inconclusive"]
            lines.append(f"{status} {s['suite']}/{r['law']}: {r['passed']}/{total} passed{extra}")
            if r["counterexample"]:
                lines.append(f"    counterexample: {r['counterexample']}")
    lines.append(f"seed {out['seed']}: {'ok' if out['ok'] else 'FAILED'}")
    return "\n".join(lines)


def run(cfg: CliConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        out = COMMANDS[cfg.command](cfg)
    except CliError as err:
        _report(cfg.json, err.code, str(err), stderr)
        return err.status
    except (TypeCheckError, EvalError, DistanceError) as err:
        _report(cfg.json, err.code, str(err), stderr)
        return 1
    except (QuantaleError, EffectError, RelatorError, SyntaxError_) as err:
        _report(cfg.json, "usage", str(err), stderr)
        return 2
    if cfg.json:
        stdout.write(json.dumps(out, sort_keys=True) + "\n")
    else:
        stdout.write(_pretty(cfg, out) + "\n")
    if cfg.command == "verify" and not out["ok"]:
        return 1
    return 0


def _report(as_json: bool, code: str, msg: str, stream):
    if as_json:
        stream.write(json.dumps({"error": {"code": code, "message": msg}}, sort_keys=True) + "\n")
    else:
        stream.write(f"vfuzz: error [{code}]: {msg}\n")


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except CliError as err:
        _report(False, err.code, str(err), sys.stderr)
        return err.status
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
