"""Command-line driver: ``crcalc verify | apply | list``."""

from __future__ import annotations

import argparse
import fnmatch
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import yaml

from . import catalog
from .report import UnknownIdentity

# suite name -> where its ids live; "identities" and "covariance" are accepted as aliases
SUITES = ("symbolic", "conformal", "tractor", "models")
ALIASES = {"identities": "symbolic", "covariance": "conformal"}
CATALOG_FILES = {"symbolic": "identities", "conformal": "covariance"}

MODEL_KEYS = ("model", "sigma", "f", "u", "degree", "max_degree", "seed")
DEFAULTS = {"suite": "all", "identity": "*", "route": "lemma", "format": "text",
            "fail_fast": False, "jobs": 1, "timings": True}


class ConfigError(ValueError):
    pass


def suite_ids(suite):
    if suite in CATALOG_FILES:
        return list(catalog.load(CATALOG_FILES[suite]))
    if suite == "tractor":
        return list(catalog.anchors("tractor"))
    if suite == "models":
        return list(catalog.anchors("models"))
    raise ConfigError(f"unknown suite {suite!r}")


def _suites(name):
    name = ALIASES.get(name, name)
    if name == "all":
        return SUITES
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return (name,)


def resolve(config):
    """(suite, id) pairs selected by the config, in catalog order.

    Each comma-separated glob in ``identity`` must match something.
    """
    pairs = [(s, i) for s in _suites(config["suite"]) for i in suite_ids(s)]
    patterns = [p.strip() for p in str(config["identity"]).split(",") if p.strip()] or ["*"]
    for p in patterns:
        if not any(fnmatch.fnmatchcase(i, p) for _, i in pairs):
            raise UnknownIdentity(p)
    return [(s, i) for s, i in pairs if any(fnmatch.fnmatchcase(i, p) for p in patterns)]


def run_one(task):
    suite, id, config = task
    if suite in CATALOG_FILES:
        entry = catalog.load(CATALOG_FILES[suite])[id]
        return catalog.verify_entry(entry, route=config["route"])
    if suite == "tractor":
        from .tractor import verify_tractor
        return verify_tractor(id)
    from .models import verify_model_identity
    return verify_model_identity(id, {k: config[k] for k in MODEL_KEYS if config.get(k) is not None})


def _results(tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield run_one(t)
        return
    # map() yields in submission order, so the report order does not depend on scheduling
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        try:
            yield from pool.map(run_one, tasks)
        finally:
            pool.shutdown(cancel_futures=True)


def run_suite(config, out=None):
    """Run the selected checks and write the report; returns the exit status."""
    out = out or sys.stdout
    tasks = [(s, i, config) for s, i in resolve(config)]
    jsonl = config["format"] == "jsonl"
    if jsonl:
        canon = {k: v for k, v in sorted(config.items()) if k not in ("jobs", "format", "timings")}
        out.write(json.dumps({"config": canon}, sort_keys=True) + "\n")
    failed = expected_failures = 0
    count = 0
    for rep in _results(tasks, config["jobs"]):
        count += 1
        if jsonl:
            out.write(rep.to_json(timings=config["timings"]) + "\n")
        else:
            line = rep.line()
            if not rep.verified and rep.as_expected:
                line = line.replace(f"FAIL {rep.id}", f"FAIL {rep.id} (expected)", 1)
            out.write(line + "\n")
        out.flush()
        if not rep.verified:
            failed += 1
            expected_failures += rep.as_expected
            if config["fail_fast"]:
                break
    if not jsonl:
        out.write(f"{count - failed} verified, {failed} failed"
                  f" ({expected_failures} of them expected)\n")
    return 0 if failed == 0 else 1


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    known = set(DEFAULTS) | set(MODEL_KEYS)
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(extra)}")
    return data


def _verify_config(args):
    config = dict(DEFAULTS)
    if args.config:
        config.update(load_config(args.config))
    for key in ("suite", "identity", "route", "format", "jobs") + MODEL_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            config[key] = val
    if args.fail_fast:
        config["fail_fast"] = True
    if args.no_timings:
        config["timings"] = False
    if config["format"] not in ("text", "jsonl"):
        raise ConfigError(f"unknown format {config['format']!r}")
    if config["route"] not in ("lemma", "frame"):
        raise ConfigError(f"unknown route {config['route']!r}")
    return config


def cmd_verify(args):
    return run_suite(_verify_config(args))


def cmd_apply(args):
    from .models import apply_operator, structure
    s = structure(args.model, args.sigma)
    print(apply_operator(args.op, args.f, s))
    return 0


def cmd_list(args):
    for suite in _suites(args.suite):
        if suite in CATALOG_FILES:
            rows = [(i, e.get("anchor", "")) for i, e in catalog.load(CATALOG_FILES[suite]).items()]
        else:
            rows = list(catalog.anchors(suite).items())
        for id, anchor in rows:
            if args.format == "jsonl":
                print(json.dumps({"suite": suite, "id": id, "anchor": anchor}, ensure_ascii=False))
            else:
                print(f"{suite}\t{id}\t{anchor}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="crcalc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--config", help="YAML file with any of the options below")
    v.add_argument("--suite", help="symbolic, conformal, tractor, models or all")
    v.add_argument("--identity", help="glob(s) over identity ids, comma separated")
    v.add_argument("--route", choices=("lemma", "frame"), help="transformation route (conformal suite)")
    v.add_argument("--sigma", help="conformal factor for the models suite, e.g. 'Re(z1)'")
    v.add_argument("--model", choices=("sphere", "heisenberg"))
    v.add_argument("--f", help="test function for the models suite")
    v.add_argument("--u", help="test function for the energy identity")
    v.add_argument("--degree", type=int, help="degree cap for quadratic-form checks")
    v.add_argument("--max-degree", dest="max_degree", type=int, help="degree cap for basis checks")
    v.add_argument("--seed", type=int, help="seed for random model data")
    v.add_argument("--format", choices=("text", "jsonl"))
    v.add_argument("--fail-fast", action="store_true")
    v.add_argument("--no-timings", action="store_true", help="omit durations (byte-stable output)")
    v.add_argument("--jobs", type=int, help="worker processes (default 1)")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("apply", help="apply an operator on a model")
    a.add_argument("--op", required=True)
    a.add_argument("--model", default="sphere")
    a.add_argument("--f", default=None)
    a.add_argument("--sigma", default=None)
    a.set_defaults(func=cmd_apply)

    ls = sub.add_parser("list", help="list identities with their anchors")
    ls.add_argument("--suite", default="all")
    ls.add_argument("--format", choices=("text", "jsonl"), default="text")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None):
    from .models import ModelError
    from .tensor.expr import TensorError
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        args.jobs = os.cpu_count() or 1
    try:
        return args.func(args)
    except UnknownIdentity as exc:
        print(f"crcalc: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ModelError, TensorError, ValueError) as exc:
        print(f"crcalc: error: {exc}", file=sys.stderr)
        return 2
