"""Report rows and their JSON / CSV serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import List, Optional

FIELDS = ("check_id", "value", "reference", "ref_source", "tol", "pass", "quad_error", "seconds")
REF_SOURCES = ("closed-form", "fixture", "analytic-limit")
# rows that only report a number (no reference exists) are labelled "none"


def _relation_ok(value, reference, tol, relation):
    if value is None or not math.isfinite(value):
        return False
    if relation == "report":
        return True
    if relation == "abs":
        return abs(value - reference) <= tol
    if relation == "rel":
        return abs(value - reference) <= tol * abs(reference)
    if relation == "le":
        return value <= reference + tol
    if relation == "ge":
        return value >= reference - tol
    if relation == "lt":
        return value < reference
    if relation == "gt":
        return value > reference
    raise ValueError(f"unknown relation {relation!r}")


@dataclass
class Row:
    check_id: str
    value: Optional[float]
    reference: Optional[float]
    ref_source: str
    tol: Optional[float]
    passed: bool
    quad_error: Optional[float] = None
    seconds: Optional[float] = None
    relation: str = "abs"

    def as_dict(self):
        def num(v):
            if v is None:
                return None
            v = float(v)
            return v if math.isfinite(v) else None
        return {"check_id": self.check_id, "value": num(self.value), "reference": num(self.reference),
                "ref_source": self.ref_source, "tol": num(self.tol), "pass": bool(self.passed),
                "quad_error": num(self.quad_error), "seconds": num(self.seconds)}

    def describe(self) -> str:
        sym = {"abs": "|v - ref| <=", "rel": "|v - ref| / |ref| <=", "le": "v <= ref +",
               "ge": "v >= ref -", "lt": "v < ref", "gt": "v > ref", "report": "nothing"}[self.relation]
        tol = "" if self.relation in ("lt", "gt", "report") else f" {self.tol!r}"
        return (f"{self.check_id}: value={self.value!r} reference={self.reference!r} "
                f"({self.ref_source}) requires {sym}{tol}")


class Report:
    def __init__(self, command: str, timing: bool = True):
        self.command = command
        self.timing = timing
        self.rows: List[Row] = []

    @contextmanager
    def timed(self):
        """Yields a dict that holds the elapsed seconds once the block exits."""
        t0 = time.perf_counter()
        box = {}
        yield box
        box["seconds"] = time.perf_counter() - t0

    def add(self, check_id, value, reference, ref_source, tol, relation="abs", quad_error=None,
            seconds=None) -> Row:
        if ref_source not in REF_SOURCES and not (ref_source == "none" and reference is None):
            raise ValueError(f"unlabelled reference source {ref_source!r}")
        ok = _relation_ok(None if value is None else float(value), reference, tol, relation)
        row = Row(check_id, value, reference, ref_source, tol, ok, quad_error,
                  seconds if self.timing else None, relation)
        self.rows.append(row)
        return row

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> List[Row]:
        return [r for r in self.rows if not r.passed]

    def to_json(self, config: Optional[dict] = None) -> str:
        doc = {"command": self.command, "config": config or {}, "passed": self.passed,
               "rows": [r.as_dict() for r in self.rows]}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            d = r.as_dict()
            w.writerow({k: ("" if d[k] is None else repr(d[k]) if isinstance(d[k], float) else d[k])
                        for k in FIELDS})
        return buf.getvalue()
