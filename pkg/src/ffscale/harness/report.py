"""Verification reports and CSV/JSON writers."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field


@dataclass
class CheckRecord:
    name: str
    residual: float
    tolerance: float
    passed: bool
    location: dict = field(default_factory=dict)
    note: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        loc = ", ".join(f"{k}={_fmt(v)}" for k, v in self.location.items())
        extra = f" at {loc}" if loc else ""
        note = f" ({self.note})" if self.note else ""
        return f"[{status}] {self.name}: residual {_fmt(self.residual)}, tolerance {_fmt(self.tolerance)}{extra}{note}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


@dataclass
class VerificationReport:
    scenario: str
    checks: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, record):
        if any(c.name == record.name for c in self.checks):
            raise ValueError(f"check {record.name!r} recorded twice")
        self.checks.append(record)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self):
        head = f"verification of {self.scenario}: {'PASS' if self.passed else 'FAIL'}"
        return [head] + ["  " + c.line() for c in self.checks]

    def to_json(self):
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return None
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, list):
                return [clean(x) for x in v]
            return v

        return json.dumps(clean(asdict(self) | {"passed": self.passed}), indent=2)


def _num(x):
    # shortest decimal that round-trips to the same double
    return repr(float(x))


def csv_header(result, dim):
    cols = ["t", "s", "ds_dt"]
    cols += [f"p_ref_{n}" for n in range(dim)]
    cols += [f"p_ff_{n}" for n in range(dim)]
    cols += [f"f_{n}" for n in range(dim)]
    if result.decomposition is not None:
        labels = result.decomposition["labels"]
        cols += [f"cd_{lab}" for lab in labels]
        cols += [f"nad_{lab}" for lab in labels]
        cols += ["cd_residual", "nad_residual"]
    return cols


def write_trajectory_csv(result, path, stride=1):
    """One row per sampled grid point; the final point is always written."""
    dim = result.phases.shape[1]
    n = result.times.size
    rows = list(range(0, n, stride))
    if rows[-1] != n - 1:
        rows.append(n - 1)
    dec = result.decomposition
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(result, dim))
        for k in rows:
            row = [result.times[k], result.s[k], result.rates[k]]
            row += list(result.reference.populations[k])
            row += list(result.fast_forward.populations[k])
            row += list(result.phases[k])
            if dec is not None:
                row += list(dec["cd"][k]) + list(dec["nad"][k])
                row += [dec["cd_residual"][k], dec["nad_residual"][k]]
            w.writerow([_num(x) for x in row])


SWEEP_COLUMNS = ("t_ref", "t_ff", "rate", "infidelity", "diabatic_error", "nad_norm_mean",
                 "nad_mean_norm", "min_gap", "phase_bound", "final_phase_spread", "error")


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([r.get(c, "") if c == "error" else _num(r[c]) if r.get(c) is not None else ""
                        for c in SWEEP_COLUMNS])
