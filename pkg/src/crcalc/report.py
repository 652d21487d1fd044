"""Verification records shared by the catalog drivers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class UnknownIdentity(KeyError):
    def __str__(self):
        return f"unknown identity {self.args[0]!r}"


@dataclass
class VerificationReport:
    id: str
    anchor: str
    status: str                  # "verified" or "failed"
    residual: str | None = None
    exact_value: str | None = None
    expected: str = "verified"
    duration: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def verified(self):
        return self.status == "verified"

    @property
    def as_expected(self):
        """True when the outcome matches the catalog's expectation (errata fail on purpose)."""
        return self.status == self.expected

    def record(self, timings=True):
        out = {"id": self.id, "anchor": self.anchor, "status": self.status}
        if self.expected != "verified":
            out["expected"] = self.expected
        if self.residual is not None:
            out["residual"] = self.residual
        if self.exact_value is not None:
            out["exact_value"] = self.exact_value
        if timings:
            out["duration"] = round(self.duration, 3)
        return out

    def to_json(self, timings=True):
        return json.dumps(self.record(timings), sort_keys=True, ensure_ascii=False)

    def line(self):
        mark = "PASS" if self.verified else "FAIL"
        note = "" if self.as_expected else "  (unexpected)"
        out = f"{mark} {self.id} [{self.anchor}]{note}"
        if self.exact_value is not None:
            out += f"  value={self.exact_value}"
        if self.residual is not None:
            out += f"\n    residual: {self.residual}"
        return out
