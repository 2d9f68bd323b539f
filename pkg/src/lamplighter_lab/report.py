"""Experiment reports: versioned JSON, CSV curves, a gnuplot script and figures."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from .errors import SchemaError

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "experiment", "spec", "instances", "assertions", "records", "curves",
             "passed", "timestamp"}
_ASSERTION_KEYS = {"name", "anchor", "instance", "lhs_label", "lhs", "op", "rhs_label", "rhs", "slack",
                   "passed"}
_RECORD_KEYS = {"name", "instance", "value", "band", "in_band", "note"}
_QUANTITY_KEYS = {"kind", "value", "se", "n", "reliable"}


def _clean(x):
    """JSON-safe floats: infinities and NaN become strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        return _clean(x.item())
    return x


@dataclass
class Assertion:
    name: str
    anchor: str
    instance: str
    lhs_label: str
    lhs: float
    op: str
    rhs_label: str
    rhs: float
    slack: float = 0.0
    passed: bool = False

    def __post_init__(self):
        lhs, rhs, s = float(self.lhs), float(self.rhs), float(self.slack)
        if self.op == "<=":
            self.passed = lhs <= rhs + s
        elif self.op == ">=":
            self.passed = lhs >= rhs - s
        elif self.op == "==":
            self.passed = abs(lhs - rhs) <= s
        else:
            raise ValueError(f"unknown comparison {self.op!r}")
        self.passed = bool(self.passed)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] {self.instance}: {self.lhs_label}={self.lhs:.6g} {self.op} "
                f"{self.rhs_label}={self.rhs:.6g} (slack {self.slack:.3g}; {self.anchor})")


@dataclass
class Record:
    """A measured trend, checked against a documented band but never fatal."""

    name: str
    instance: str
    value: Any
    band: Optional[list] = None
    in_band: Optional[bool] = None
    note: str = ""


@dataclass
class Instance:
    name: str
    quantities: dict = field(default_factory=dict)

    def exact(self, key: str, value) -> None:
        self.quantities[key] = {"kind": "exact", "value": value}

    def mc(self, key: str, est) -> None:
        self.quantities[key] = {"kind": "mc", "value": est.value, "se": est.se, "n": est.n,
                                "reliable": est.reliable}


@dataclass
class MixingReport:
    experiment: str
    spec: dict
    instances: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    records: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)  # name -> {column: values}, "t" first
    timestamp: str = ""

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def instance(self, name: str) -> Instance:
        for inst in self.instances:
            if inst.name == name:
                return inst
        inst = Instance(name)
        self.instances.append(inst)
        return inst

    def check(self, *args, **kw) -> Assertion:
        a = Assertion(*args, **kw)
        self.assertions.append(a)
        return a

    def record(self, name: str, instance: str, value, band=None, note: str = "") -> Record:
        in_band = None
        if band is not None:
            lo, hi = band
            in_band = bool((lo is None or value >= lo) and (hi is None or value <= hi))
        r = Record(name, instance, value, None if band is None else list(band), in_band, note)
        self.records.append(r)
        return r

    def find_record(self, name: str, instance: Optional[str] = None) -> Record:
        for r in self.records:
            if r.name == name and (instance is None or r.instance == instance):
                return r
        raise KeyError((name, instance))

    def to_dict(self) -> dict:
        return _clean({
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "spec": self.spec,
            "instances": [{"name": i.name, "quantities": i.quantities} for i in self.instances],
            "assertions": [asdict(a) for a in self.assertions],
            "records": [asdict(r) for r in self.records],
            "curves": sorted(f"curves/{name}.csv" for name in self.curves),
            "passed": self.passed,
            "timestamp": self.timestamp,
        })


def _require(obj: dict, keys: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    extra, missing = set(obj) - keys, keys - set(obj)
    if extra:
        raise SchemaError(f"{where}: unknown fields {sorted(extra)}")
    if missing:
        raise SchemaError(f"{where}: missing fields {sorted(missing)}")


def validate_report(data: dict) -> dict:
    _require(data, _TOP_KEYS, "report")
    if data["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {data['schema_version']!r}")
    for i, inst in enumerate(data["instances"]):
        _require(inst, {"name", "quantities"}, f"instances[{i}]")
        for key, q in inst["quantities"].items():
            if not isinstance(q, dict) or not {"kind", "value"} <= set(q) or set(q) - _QUANTITY_KEYS:
                raise SchemaError(f"instances[{i}].{key}: bad quantity")
            if q["kind"] == "exact" and set(q) != {"kind", "value"}:
                raise SchemaError(f"instances[{i}].{key}: exact values carry no error")
    for i, a in enumerate(data["assertions"]):
        _require(a, _ASSERTION_KEYS, f"assertions[{i}]")
    for i, r in enumerate(data["records"]):
        _require(r, _RECORD_KEYS, f"records[{i}]")
    return data


def load_report(path) -> dict:
    with open(path) as fh:
        return validate_report(json.load(fh))


def write_curve_csv(path: Path, columns: dict) -> None:
    names = list(columns)
    if names[0] != "t":
        raise ValueError("curves must have 't' as their first column")
    rows = zip(*(list(columns[c]) for c in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v) -> str:
    f = float(v)
    return str(int(f)) if f.is_integer() and abs(f) < 2**53 else repr(f)


def read_curve_csv(path: Path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [float(r[i]) for r in body] for i, name in enumerate(header)}


def gnuplot_script(curves: dict) -> str:
    lines = [
        "# gnuplot 5 script; run from the output directory: gnuplot plot.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 900,600",
        "set key outside",
        "set grid",
    ]
    for name, cols in sorted(curves.items()):
        ys = [i + 1 for i, c in enumerate(cols) if c != "t" and not c.endswith("_se")]
        if not ys:
            continue
        lines.append(f"set output 'figures/{name}.gp.png'")
        lines.append(f"set title '{name}' noenhanced")
        lines.append("set xlabel 't'")
        plots = ", ".join(f"'curves/{name}.csv' using 1:{i} with lines title columnhead({i}) noenhanced"
                          for i in ys)
        lines.append(f"plot {plots}")
    return "\n".join(lines) + "\n"


def write_outputs(report: MixingReport, out_dir, figures: bool = True, stamp: bool = True) -> Path:
    """Write ``report.json``, ``curves/*.csv``, ``plot.gp`` and (optionally) PNG figures."""
    out = Path(out_dir)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    if stamp:
        report.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    for name, cols in report.curves.items():
        write_curve_csv(out / "curves" / f"{name}.csv", cols)
    (out / "plot.gp").write_text(gnuplot_script({k: list(v) for k, v in report.curves.items()}))
    path = out / "report.json"
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    if figures and report.curves:
        from .plotting import render_curves
        render_curves(report.curves, out / "figures")
    return path


def strip_timestamp(path) -> dict:
    data = json.loads(Path(path).read_text())
    data.pop("timestamp", None)
    return data


def summary_lines(data: dict) -> list[str]:
    lines = [f"experiment {data['experiment']}: {'PASS' if data['passed'] else 'FAIL'}"]
    for a in data["assertions"]:
        flag = "PASS" if a["passed"] else "FAIL"
        lines.append(f"  [{flag}] {a['instance']}: {a['lhs_label']}={a['lhs']} {a['op']} "
                     f"{a['rhs_label']}={a['rhs']}")
    for r in data["records"]:
        band = "" if r["band"] is None else f" band={r['band']} in_band={r['in_band']}"
        lines.append(f"  [rec] {r['instance']}: {r['name']}={r['value']}{band}")
    return lines
