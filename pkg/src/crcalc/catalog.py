"""YAML identity catalogs and the driver that checks their entries."""

from __future__ import annotations

import fnmatch
import time
from functools import lru_cache
from importlib import resources

import yaml

from .calculus.frame import FrameCalculus, to_text as frame_text
from .calculus.limit import divisibility, limit_n, to_frame
from .calculus.operators import parse_ph
from .calculus.ph import PHCalculus
from .report import UnknownIdentity, VerificationReport
from .tensor.printer import to_text

SUITES = ("identities", "covariance")


@lru_cache(maxsize=None)
def _raw(name):
    text = resources.files("crcalc").joinpath("data", f"{name}.yaml").read_text("utf-8")
    return tuple(yaml.safe_load(text))


def load(name):
    """Entries of one catalog, keyed by id, in file order."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return {e["id"]: dict(e) for e in _raw(name)}


def entries(suite=None):
    out = {}
    for s in (SUITES if suite in (None, "all") else (suite,)):
        out.update(load(s))
    return out


def select(pattern, suite=None):
    """Entries whose id matches the glob ``pattern``."""
    cat = entries(suite)
    hits = [e for k, e in cat.items() if fnmatch.fnmatchcase(k, pattern)]
    if not hits:
        raise UnknownIdentity(pattern)
    return hits


@lru_cache(maxsize=None)
def _anchors():
    text = resources.files("crcalc").joinpath("data", "anchors.yaml").read_text("utf-8")
    return yaml.safe_load(text)


def anchors(group):
    """id -> anchor for the checks implemented in code ("tractor" or "models")."""
    return dict(_anchors()[group])


def anchor(id):
    for group in _anchors().values():
        if id in group:
            return group[id]
    for entry in entries().values():
        if entry["id"] == id:
            return entry.get("anchor", "")
    raise UnknownIdentity(id)


def _constraints(entry, override):
    if override is not None:
        return (override,) if isinstance(override, str) else tuple(override)
    return tuple(entry.get("constraint") or ("general",))


def _with_sigma(text, sigma):
    return text if sigma == "sigma" else text.replace("sigma", sigma)


def _residual(entry, route, constraints, sigma):
    """Residual of one entry (zero object means verified) and its printed form."""
    kind = entry["kind"]
    cons = _constraints(entry, constraints)
    if kind == "transformation":
        from .conformal import check_transformation
        res = check_transformation(entry["lhs"], entry["rhs"], cons, route=route, sigma=sigma)
        return res, frame_text, {}
    if kind == "identity":
        diff = parse_ph(_with_sigma(entry["lhs"], sigma)) - parse_ph(_with_sigma(entry["rhs"], sigma))
        if str(entry.get("dimension", "n")) == "1":
            calc = FrameCalculus(cons)
            res = calc.nf(to_frame(diff))
            if res.is_zero() and entry.get("also"):
                res = calc.nf(to_frame(parse_ph(_with_sigma(entry["also"], sigma))))
            return res, frame_text, {}
        calc = PHCalculus(cons)
        res = calc.nf(diff)
        if res.is_zero() and entry.get("also"):
            res = calc.nf(parse_ph(_with_sigma(entry["also"], sigma)))
        return res, to_text, {}
    if kind == "limit":
        calc = PHCalculus(cons)
        scaled = calc.nf(parse_ph(entry["expr"]) * parse_ph(entry["scale"]))
        raw = calc.nf(parse_ph(entry["expr"]))
        order = divisibility(raw)
        details = {"divisibility": order}
        if order < entry.get("divisible", 0):
            # the n = 1 value would not be a limit at all; report the raw expression
            return raw, to_text, details
        res = FrameCalculus(cons).nf(to_frame(limit_n(scaled, 1)) - to_frame(parse_ph(entry["rhs"])))
        return res, frame_text, details
    raise ValueError(f"unknown entry kind {kind!r}")


def verify_entry(entry, route="lemma", constraints=None, sigma="sigma"):
    t = time.time()
    res, show, details = _residual(entry, route, constraints, sigma)
    ok = res.is_zero()
    return VerificationReport(
        entry["id"], entry.get("anchor", ""), "verified" if ok else "failed",
        residual=None if ok else show(res),
        expected="failed" if entry.get("expect") == "fails" else "verified",
        duration=time.time() - t, details=details)


def verify_identity(id, route="lemma", constraints=None, sigma="sigma", suite=None):
    cat = entries(suite)
    if id not in cat:
        raise UnknownIdentity(id)
    return verify_entry(cat[id], route=route, constraints=constraints, sigma=sigma)


def verify_suite(suite="all", pattern="*", route="lemma", sigma="sigma"):
    for entry in select(pattern, suite):
        yield verify_entry(entry, route=route, sigma=sigma)
