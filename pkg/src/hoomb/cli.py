"""Command-line front end.

    hoomb verify --model sharp --budget 20000 --seed 1 --output r.json
    hoomb synthesize --model lqr --budget 32000 -p horizon=20
    hoomb sweep --model sharp --budgets 2000,8000,32000 --repeats 5
    hoomb eval --model sharp --point 0.5,0.5 --samples 100000

Every run flag can also come from ``--config file.json`` using the same key
names as the result file's ``config`` block; flags given on the command line
win over the file.  ``HOOVER_THREADS`` caps the number of worker processes
(0 or unset means one per CPU); it never changes the results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .evaluation import budget_sweep, mc_estimate, write_sweep_table
from .exceptions import (
    ConfigurationError,
    ContractViolation,
    NumericalFailureError,
    ObjectiveError,
    PointOutsideDomainError,
    SimulationFault,
    UnknownModelError,
)
from .meta import ParallelHOOMB
from .model import SYNTHESIS, VERIFICATION, get_model

EXIT_OK = 0
EXIT_UNKNOWN_MODEL = 2
EXIT_CONFIG = 3
EXIT_BUDGETS = 4
EXIT_POINT = 5
EXIT_OUTPUT = 6
EXIT_SIMULATION = 7

DEFAULTS = {
    "model": None,
    "model_params": {},
    "budget": None,
    "batch_size": 100,
    "sigma": 0.5,
    "nu_max": 1.0,
    "rho_max": 0.6,
    "instances": 4,
    "eval_samples": 500,
    "seed": 0,
    "time_bound": None,
    "output": None,
    "budgets": None,
    "repeats": 1,
    "point": None,
    "samples": 1000,
}

COMMAND_KEYS = {
    "verify": ("model", "model_params", "budget", "batch_size", "sigma", "nu_max",
               "rho_max", "instances", "eval_samples", "seed", "time_bound", "output"),
    "eval": ("model", "model_params", "point", "samples", "seed", "time_bound"),
}
COMMAND_KEYS["synthesize"] = COMMAND_KEYS["verify"]
COMMAND_KEYS["sweep"] = tuple(k for k in COMMAND_KEYS["verify"] if k != "budget") + (
    "budgets", "repeats")

MODES = {"verify": VERIFICATION, "synthesize": SYNTHESIS}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors, not argparse's generic exit 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _model_param(text):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.replace("-", "_"), value


def build_parser():
    parser = _Parser(prog="hoomb", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON file with run settings")
        p.add_argument("--model")
        p.add_argument("-p", "--param", action="append", type=_model_param, default=None,
                       metavar="KEY=VALUE", help="model parameter, value parsed as JSON")
        p.add_argument("--seed", type=int)
        p.add_argument("--time-bound", dest="time_bound", type=int)

    def run_flags(p):
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--rho-max", dest="rho_max", type=float)
        p.add_argument("--nu-max", dest="nu_max", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--instances", type=int)
        p.add_argument("--eval-samples", dest="eval_samples", type=int)
        p.add_argument("--output")

    for name, help_ in (("verify", "maximize a hitting probability"),
                        ("synthesize", "maximize an expected reward")):
        p = sub.add_parser(name, help=help_)
        common(p)
        run_flags(p)
        p.add_argument("--budget", type=int)

    p = sub.add_parser("sweep", help="median best estimate against budget")
    common(p)
    run_flags(p)
    p.add_argument("--budgets", help="comma separated, strictly increasing")
    p.add_argument("--repeats", type=int)

    p = sub.add_parser("eval", help="Monte-Carlo estimate at one point")
    common(p)
    p.add_argument("--point", help="comma separated coordinates")
    p.add_argument("--samples", type=int)
    return parser


def _load_config(path, command):
    try:
        with open(path) as fp:
            data = json.load(fp)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}", EXIT_CONFIG) from None
    if not isinstance(data, dict):
        raise CliError("config file must hold a JSON object", EXIT_CONFIG)
    data = dict(data)
    # result files echo the mode; accept it back if it agrees
    mode = data.pop("mode", None)
    if mode is not None and mode != MODES.get(command, mode):
        raise CliError(f"config mode {mode!r} does not match command {command!r}", EXIT_CONFIG)
    unknown = sorted(set(data) - set(COMMAND_KEYS[command]))
    if unknown:
        raise CliError(f"unknown config keys for {command}: {', '.join(unknown)}", EXIT_CONFIG)
    return data


def resolve_settings(args):
    """Defaults, then the config file, then explicit flags."""
    keys = COMMAND_KEYS[args.command]
    settings = {k: DEFAULTS[k] for k in keys}
    if args.config:
        settings.update(_load_config(args.config, args.command))
    for k in keys:
        value = getattr(args, k, None)
        if value is not None:
            settings[k] = value
    params = dict(settings.get("model_params") or {})
    params.update(dict(args.param or []))
    settings["model_params"] = params
    if settings["model"] is None:
        raise CliError("--model is required", EXIT_CONFIG)
    return settings


def parse_budgets(text):
    if isinstance(text, list):
        items = text
    else:
        if not text:
            raise CliError("--budgets is required", EXIT_BUDGETS)
        items = text.split(",")
    try:
        budgets = [int(str(b).strip()) for b in items]
    except ValueError:
        raise CliError(f"malformed budget list {text!r}", EXIT_BUDGETS) from None
    if not budgets or any(b <= 0 for b in budgets):
        raise CliError(f"budgets must be positive integers, got {text!r}", EXIT_BUDGETS)
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise CliError(f"budgets must be strictly increasing, got {text!r}", EXIT_BUDGETS)
    return budgets


def parse_point(text):
    items = text if isinstance(text, list) else str(text).split(",")
    try:
        return np.array([float(v) for v in items])
    except ValueError:
        raise CliError(f"malformed point {text!r}", EXIT_POINT) from None


def worker_count():
    raw = os.environ.get("HOOVER_THREADS", "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"HOOVER_THREADS must be an integer, got {raw!r}", EXIT_CONFIG) from None
    if n < 0:
        raise CliError("HOOVER_THREADS must be non-negative", EXIT_CONFIG)
    return n or None


def _make_model(settings):
    params = dict(settings["model_params"])
    if settings.get("time_bound") is not None:
        params["time_bound"] = settings["time_bound"]
    return get_model(settings["model"], **params)


def _check_output(path):
    if path is None:
        return
    parent = Path(path).resolve().parent
    if Path(path).is_dir() or not parent.is_dir() or not os.access(parent, os.W_OK):
        raise CliError(f"cannot write output to {path}", EXIT_OUTPUT)


def _write_text(path, text):
    try:
        with open(path, "w") as fp:
            fp.write(text)
    except OSError as exc:
        raise CliError(f"cannot write output to {path}: {exc}", EXIT_OUTPUT) from None


def _floats(a):
    return [float(v) for v in np.asarray(a).reshape(-1)]


def result_document(command, settings, est, wall_time):
    config = {"mode": MODES[command]}
    config.update({k: v for k, v in settings.items() if k != "output"})
    return {
        "config": config,
        "candidates": [
            {"instance": c.instance, "rho": c.rho, "point": _floats(c.point),
             "estimate": c.estimate, "std_error": c.std_error}
            for c in est.candidates_
        ],
        "best_point": _floats(est.best_point_),
        "best_estimate": est.best_estimate_,
        "best_instance": est.candidates_[est.best_index_].instance,
        "instances": [
            {"instance": i, "nodes": o.n_nodes, "max_depth": o.max_depth,
             "batches": o.batch_count, "queries_used": o.queries_used}
            for i, o in enumerate(est.instances_, start=1)
        ],
        "queries_used": est.total_queries_,
        "optimizer_queries": est.optimizer_queries_,
        "eval_queries": est.eval_queries_,
        "unspent_budget": est.unspent_budget_,
        "clamped_observations": est.n_clamped_,
        "wall_time_s": wall_time,
    }


def cmd_run(args, settings):
    model = _make_model(settings)
    if model.mode != MODES[args.command]:
        raise CliError(f"model {settings['model']!r} is a {model.mode} model; "
                       f"use the matching command", EXIT_CONFIG)
    if settings["budget"] is None:
        raise CliError("--budget is required", EXIT_CONFIG)
    _check_output(settings["output"])
    est = ParallelHOOMB(
        total_budget=settings["budget"], n_instances=settings["instances"],
        nu_max=settings["nu_max"], rho_max=settings["rho_max"], sigma=settings["sigma"],
        batch_size=settings["batch_size"], eval_samples=settings["eval_samples"],
        random_state=settings["seed"], n_jobs=worker_count(),
    )
    start = time.perf_counter()
    est.fit(model)
    doc = result_document(args.command, settings, est, time.perf_counter() - start)
    if settings["output"]:
        _write_text(settings["output"], json.dumps(doc, indent=2) + "\n")
    print(f"best_point: {json.dumps(doc['best_point'])}")
    print(f"best_estimate: {doc['best_estimate']!r}")
    return EXIT_OK


def cmd_sweep(args, settings):
    budgets = parse_budgets(settings["budgets"])
    model = _make_model(settings)
    _check_output(settings["output"])
    rows = budget_sweep(
        model, budgets, repeats=settings["repeats"], seed=settings["seed"],
        n_instances=settings["instances"], nu_max=settings["nu_max"],
        rho_max=settings["rho_max"], sigma=settings["sigma"],
        batch_size=settings["batch_size"], eval_samples=settings["eval_samples"],
        n_jobs=worker_count(),
    )
    if settings["output"]:
        try:
            with open(settings["output"], "w", newline="") as fp:
                write_sweep_table(rows, fp)
        except OSError as exc:
            raise CliError(f"cannot write output: {exc}", EXIT_OUTPUT) from None
    else:
        write_sweep_table(rows, sys.stdout)
    return EXIT_OK


def cmd_eval(args, settings):
    if settings["point"] is None:
        raise CliError("--point is required", EXIT_CONFIG)
    point = parse_point(settings["point"])
    model = _make_model(settings)
    est = mc_estimate(model, point, settings["samples"], settings["seed"])
    print(f"{est.mean!r} ± {est.std_error!r}")
    return EXIT_OK


COMMANDS = {"verify": cmd_run, "synthesize": cmd_run, "sweep": cmd_sweep, "eval": cmd_eval}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args)
        return COMMANDS[args.command](args, settings)
    except CliError as exc:
        code, message = exc.code, str(exc)
    except UnknownModelError as exc:
        code, message = EXIT_UNKNOWN_MODEL, str(exc)
    except PointOutsideDomainError as exc:
        code, message = EXIT_POINT, str(exc)
    except ConfigurationError as exc:
        code, message = EXIT_CONFIG, str(exc)
    except (ObjectiveError, SimulationFault, NumericalFailureError, ContractViolation) as exc:
        code, message = EXIT_SIMULATION, str(exc)
    print(f"hoomb: error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
