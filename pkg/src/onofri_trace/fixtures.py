"""Pinned reference values for quantities without a closed form.

The shipped file data/fixtures.json was produced by independent oracles
(dense scipy cubature in Cartesian or polar coordinates, see
tests/oracles.py) and then frozen.  `verify` recomputes each value with
the library and compares against the pinned number; `pin` writes the
library's own values to a new file, which is how a regression baseline
for a modified build is recorded.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional

from . import functionals, limit_study, pde_checks
from .extremals import LiouvilleSolution
from .fields import compact_bump, gaussian_bump
from .quadrature import QuadratureSpec, default_spec

DEFAULT_PATH = "data/fixtures.json"


def seeded_bump_3d():
    """The compact bump used for the p -> n quotient study."""
    return compact_bump(3, [0.2, 0.0, 0.0], 1.0, 0.5)


def seeded_gaussian_2d():
    return gaussian_bump(2, [0.3, 0.5], 1.0, 1.0)


@dataclass(frozen=True)
class FixtureDef:
    compute: Callable[[QuadratureSpec], float]
    tol: float          # relative
    params: dict
    note: str


def _spec(n, **kw):
    return default_spec(n).with_(**kw)


def _second_order(R):
    def f(spec):
        return pde_checks.second_order_ratio(LiouvilleSolution(2, 1.0), 1.0, [R], spec)[0]
    return f


DEFS: Dict[str, FixtureDef] = {
    "quotient_target.cbump3": FixtureDef(
        lambda s: limit_study.quotient_target(seeded_bump_3d(), s), 1e-6,
        {"n": 3, "center": [0.2, 0.0, 0.0], "radius": 1.0, "amplitude": 0.5},
        "int w dmu_3 + alpha_3 int K_3(x, grad w) for the seeded compact bump"),
    "kn_energy.gauss2": FixtureDef(
        lambda s: functionals.kn_energy(seeded_gaussian_2d(), s), 1e-6,
        {"n": 2, "center": [0.3, 0.5], "width": 1.0, "amplitude": 1.0},
        "int K_2(x, grad w) over the half-plane"),
    "onofri_lhs.gauss2": FixtureDef(
        lambda s: functionals.onofri_lhs(seeded_gaussian_2d(), s), 1e-6,
        {"n": 2, "center": [0.3, 0.5], "width": 1.0, "amplitude": 1.0},
        "log int e^w dmu_2 - int w dmu_2"),
}
for _R in (2.0, 4.0, 8.0, 16.0):
    DEFS[f"second_order_ratio.n2.gamma1.R{int(_R)}"] = FixtureDef(
        _second_order(_R), 1e-6, {"n": 2, "lam": 1.0, "gamma": 1.0, "R": _R},
        "R^{(gamma+1) n} int over B_2R^+ minus B_R^+ of |grad a(grad u)|^2 e^{gamma u}")


def _fixture_spec(fid: str) -> QuadratureSpec:
    n = DEFS[fid].params["n"]
    return _spec(n, rel_tol=1e-10, abs_tol=1e-13, max_evals=5e7)


def load(path: Optional[str] = None) -> dict:
    if path is None:
        text = resources.files("onofri_trace").joinpath(DEFAULT_PATH).read_text()
    else:
        text = Path(path).read_text()
    doc = json.loads(text)
    if "fixtures" not in doc:
        raise ValueError(f"{path or DEFAULT_PATH}: no 'fixtures' table")
    return doc["fixtures"]


def value(fid: str, path: Optional[str] = None) -> float:
    return float(load(path)[fid]["value"])


def compute(fid: str, spec: Optional[QuadratureSpec] = None) -> float:
    return float(DEFS[fid].compute(spec or _fixture_spec(fid)))


def pin(path: str, ids: Optional[List[str]] = None, threads: int = 1) -> dict:
    out = {}
    for fid in ids or sorted(DEFS):
        d = DEFS[fid]
        out[fid] = {"value": compute(fid, _fixture_spec(fid).with_(threads=threads)), "tol": d.tol,
                    "params": d.params, "oracle": "library recomputation (regression pin)",
                    "quantity": d.note}
    doc = {"version": 1, "fixtures": out}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def verify(path: Optional[str] = None, ids: Optional[List[str]] = None, threads: int = 1):
    """[(id, computed, pinned, rel_tol, ok)] for every pinned fixture."""
    table = load(path)
    rows = []
    for fid in ids or sorted(table):
        if fid not in DEFS:
            raise KeyError(f"no definition for pinned fixture {fid!r}")
        entry = table[fid]
        got = compute(fid, _fixture_spec(fid).with_(threads=threads))
        ref = float(entry["value"])
        tol = float(entry.get("tol", DEFS[fid].tol))
        rows.append((fid, got, ref, tol, abs(got - ref) <= tol * abs(ref)))
    return rows
