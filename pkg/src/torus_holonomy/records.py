"""Serializable output records and deterministic file emission.

Floats are rounded to 12 significant digits when a record is built, so a
record survives a JSON round trip with equality and identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, fields
from typing import Optional

SIG_DIGITS = 12


def r12(x) -> Optional[float]:
    """Round to 12 significant digits; non-finite values become None."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def fmt(x) -> str:
    return "" if x is None else f"{x:.{SIG_DIGITS}g}"


class _Record:
    @classmethod
    def from_dict(cls, data: dict):
        kwargs = {}
        for f in fields(cls):
            value = data[f.name]
            if isinstance(value, list):
                value = tuple(value)
            kwargs[f.name] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class TransportRecord(_Record):
    method: str
    steps: Optional[int]
    p_final: tuple
    sigma: Optional[float]
    norm_drift: float

    @classmethod
    def from_result(cls, result) -> "TransportRecord":
        return cls(
            method=result.method,
            steps=result.steps,
            p_final=tuple(r12(v) for v in result.p_final),
            sigma=r12(result.sigma),
            norm_drift=r12(result.norm_drift),
        )


@dataclass(frozen=True)
class TransportComparisonRecord(_Record):
    closed: TransportRecord
    numeric: TransportRecord
    difference: tuple

    @classmethod
    def from_results(cls, closed, numeric) -> "TransportComparisonRecord":
        diff = tuple(r12(abs(x - y)) for x, y in zip(closed.p_final, numeric.p_final))
        return cls(TransportRecord.from_result(closed), TransportRecord.from_result(numeric), diff)

    @classmethod
    def from_dict(cls, data: dict):
        return cls(
            TransportRecord.from_dict(data["closed"]),
            TransportRecord.from_dict(data["numeric"]),
            tuple(data["difference"]),
        )


@dataclass(frozen=True)
class HannayRecord(_Record):
    framework: str
    line_integral_coeffs: tuple
    loop_length: float
    delta_s: float
    delta_theta: float

    @classmethod
    def from_report(cls, report) -> "HannayRecord":
        return cls(
            framework=report.framework,
            line_integral_coeffs=tuple(r12(g) for g in report.line_integral_coeffs),
            loop_length=r12(report.loop_length),
            delta_s=r12(report.delta_s),
            delta_theta=r12(report.delta_theta),
        )


@dataclass(frozen=True)
class HannayRunRecord(_Record):
    """All requested framework reports for one loop and profile."""

    reports: tuple

    @classmethod
    def from_dict(cls, data: dict):
        return cls(tuple(HannayRecord.from_dict(d) for d in data["reports"]))


@dataclass(frozen=True)
class ComparisonRecord(_Record):
    reports: tuple
    delta_theta: dict
    differences: dict
    knot_reference: Optional[float]
    knot_ratio: Optional[float]

    @classmethod
    def from_comparison(cls, comp) -> "ComparisonRecord":
        return cls(
            reports=tuple(HannayRecord.from_report(r) for r in comp.reports.values()),
            delta_theta={k: r12(v) for k, v in comp.delta_theta.items()},
            differences={k: r12(v) for k, v in comp.differences.items()},
            knot_reference=r12(comp.knot_reference),
            knot_ratio=r12(comp.knot_ratio),
        )

    @classmethod
    def from_dict(cls, data: dict):
        return cls(
            reports=tuple(HannayRecord.from_dict(d) for d in data["reports"]),
            delta_theta=dict(data["delta_theta"]),
            differences=dict(data["differences"]),
            knot_reference=data["knot_reference"],
            knot_ratio=data["knot_ratio"],
        )


@dataclass(frozen=True)
class KnotLengthRecord(_Record):
    p: float
    q: float
    a: float
    c: float
    panels: Optional[int]
    quadrature: Optional[float]
    approximation: Optional[float]


def sweep_csv(rows) -> str:
    """CSV text with header ``theta0,n,sigma,divergent``; sigma empty when divergent."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta0", "n", "sigma", "divergent"])
    for row in rows:
        writer.writerow([fmt(r12(row.theta0)), fmt(r12(row.n)), fmt(r12(row.sigma)), int(row.divergent)])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[dict]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        out.append(
            {
                "theta0": float(rec["theta0"]),
                "n": float(rec["n"]),
                "sigma": float(rec["sigma"]) if rec["sigma"] else None,
                "divergent": rec["divergent"] == "1",
            }
        )
    return out


def write_atomic(path: str, text: str) -> None:
    """Write UTF-8 text via a temporary file in the target directory and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
