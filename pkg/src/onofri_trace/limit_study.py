"""p -> n limit of the L^p Sobolev trace inequality: convergence of the
constants, the homogeneity limit of R_p along h = u_*(1 + delta w), and the
log-quotient of the gradient energies of h and u_*.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import kernels
from .extremals import SobolevTraceExtremal, h_gradient_parts, sobolev_delta, sobolev_u_star
from .fields import ScalarField
from .functionals import DivergenceError, _on_boundary, kn_energy_detail
from .quadrature import (QuadratureSpec, integrate_boundary, integrate_flat_disk, integrate_half_ball,
                         integrate_halfspace)


def default_p_sequence(n: int, k_max: int = 5) -> List[float]:
    """p = n - 10^-k, k = 1..k_max.  Beyond k = 5 the delta^(1/delta) cancellation
    eats most of the double precision budget."""
    return [n - 10.0 ** (-k) for k in range(1, k_max + 1)]


@dataclass
class LimitTable:
    p_values: List[float]
    columns: Dict[str, List[float]] = field(default_factory=dict)

    def __post_init__(self):
        p = list(self.p_values)
        if any(b <= a for a, b in zip(p, p[1:])):
            raise ValueError("p_values must be strictly increasing")
        for k, v in self.columns.items():
            if len(v) != len(p):
                raise ValueError(f"column {k} has {len(v)} entries for {len(p)} p values")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        w.writerow(["p"] + names)
        for i, p in enumerate(self.p_values):
            w.writerow([repr(float(p))] + [repr(float(self.columns[k][i])) for k in names])
        return buf.getvalue()


def _check_p_sequence(n, ps):
    ps = [float(p) for p in ps]
    for p in ps:
        if not (1.0 < p < n):
            raise kernels.DomainError(f"p must lie in (1, {n}), got {p}")
    return ps


def constants_limit(n: int, p_sequence: Optional[Sequence[float]] = None) -> LimitTable:
    ps = _check_p_sequence(n, p_sequence if p_sequence is not None else default_p_sequence(n))
    c0, c1 = kernels.c0_limit(n), kernels.c1_limit(n)
    C0p = [kernels.c0p(n, p) for p in ps]
    C1p = [kernels.c1p(n, p) for p in ps]
    return LimitTable(ps, {
        "C0p": C0p, "C1p": C1p,
        "gap_C0": [abs(v - c0) for v in C0p], "gap_C1": [abs(v - c1) for v in C1p],
        "delta": [sobolev_delta(n, p) for p in ps],
    })


def rp_homogeneity_limit(x, w_grad, n: int, p_sequence: Optional[Sequence[float]] = None,
                         w_value: float = 0.0) -> List[float]:
    """delta^-p R_p(X_delta, Y_delta) = R_p(X_delta/delta, Y_delta/delta) along p -> n.

    X_delta = grad u_* (1 + delta w) and Y_delta = delta u_* grad w at the point x,
    with w(x) = w_value and grad w(x) = w_grad; the limit is k_n(x, grad w).
    """
    ps = _check_p_sequence(n, p_sequence if p_sequence is not None else default_p_sequence(n))
    x = np.asarray(x, dtype=float)
    g = np.asarray(w_grad, dtype=float)
    point = ScalarField(n, lambda z: np.full(np.shape(z)[:-1], float(w_value)),
                        lambda z: np.broadcast_to(g, np.shape(z)).copy())
    out = []
    for p in ps:
        d = sobolev_delta(n, p)
        us = sobolev_u_star(SobolevTraceExtremal(n, p))
        xd, yd = h_gradient_parts(us, point, d, x)
        out.append(float(kernels.r_p(xd / d, yd / d, p)))
    return out


# -- the perturbed-field quotient -------------------------------------------------

@dataclass(frozen=True)
class QuotientParts:
    """All entries carry a factor delta^-p, which keeps the absolute tolerance meaningful."""
    energy_gap: float            # int |grad h|^p - |grad u_*|^p
    energy_gap_error: float
    ustar_energy: float          # int |grad u_*|^p = delta^{p-1} C_{1,p}
    boundary_term: float         # int_bd u_* |grad u_*|^{p-2} d_nu u_* ((1 + delta w)^p - 1)
    remainder_term: float        # int R_p(X_delta, Y_delta)


def _require_compact(w: ScalarField) -> float:
    if w.tail is None or w.tail.support_radius is None:
        raise DivergenceError(f"{w.name}: the p -> n quotient is set up for compactly supported w")
    return w.tail.support_radius


def _powm1(base_m1, p):
    """(1 + y)^p - 1 without cancellation."""
    return np.expm1(p * np.log1p(base_m1))


def quotient_parts(w: ScalarField, n: int, p: float, spec: QuadratureSpec,
                   with_split: bool = False) -> QuotientParts:
    kernels._check_sobolev_p(n, p)
    R = _require_compact(w)
    d = sobolev_delta(n, p)
    us = sobolev_u_star(SobolevTraceExtremal(n, p))

    def gap(x):
        a = us.gradient(x) / d
        xd, yd = h_gradient_parts(us, w, d, x)
        xd, yd = xd / d, yd / d
        dd = xd + yd - a
        aa = np.einsum("...i,...i->...", a, a)
        q = (2.0 * np.einsum("...i,...i->...", a, dd) + np.einsum("...i,...i->...", dd, dd)) / aa
        return aa ** (p / 2.0) * _powm1(q, p / 2.0)

    res = integrate_half_ball(gap, R, spec, n=n)
    res.require("int |grad h|^p - |grad u_*|^p")
    G = kernels.c1p(n, p) / d
    bnd = rem = math.nan
    if with_split:
        def fb(xp):
            x = _on_boundary(xp)
            a = us.gradient(x) / d
            an = np.einsum("...i,...i->...", a, a) ** ((p - 2.0) / 2.0) * (-a[..., -1])
            return us.value(x) * an * _powm1(d * w.value(x), p) / d

        def fr(x):
            xd, yd = h_gradient_parts(us, w, d, x)
            return kernels.r_p(xd / d, yd / d, p)

        bnd = integrate_flat_disk(fb, R, spec, n=n).require("boundary term")
        rem = integrate_half_ball(fr, R, spec, n=n).require("int R_p(X_delta, Y_delta)")
    return QuotientParts(res.value, res.error_estimate, G, bnd, rem)


def sobolev_quotient_log(w: ScalarField, n: int, p: float, spec: QuadratureSpec) -> float:
    """(1/p) log( int |grad h|^p / int |grad u_*|^p )^{1/delta}."""
    parts = quotient_parts(w, n, p, spec)
    d = sobolev_delta(n, p)
    return math.log1p(parts.energy_gap / parts.ustar_energy) / (p * d)


def quotient_target(w: ScalarField, spec: QuadratureSpec) -> float:
    """int w dmu_n + alpha_n int K_n(x, grad w), the p -> n limit of the quotient."""
    n = w.n
    R = _require_compact(w)
    m = integrate_flat_disk(lambda xp: w.value(_on_boundary(xp)) * kernels.boundary_weight(xp, n),
                            R, spec, n=n).require("int w dmu")
    return m + kernels.alpha_n(n) * kn_energy_detail(w, spec).value


def quotient_limit_table(w: ScalarField, p_sequence: Optional[Sequence[float]], spec: QuadratureSpec
                         ) -> LimitTable:
    n = w.n
    ps = _check_p_sequence(n, p_sequence if p_sequence is not None else default_p_sequence(n))
    target = quotient_target(w, spec)
    if spec.threads > 1:
        with ThreadPoolExecutor(spec.threads) as pool:
            vals = list(pool.map(lambda p: sobolev_quotient_log(w, n, p, spec.with_(threads=1)), ps))
    else:
        vals = [sobolev_quotient_log(w, n, p, spec) for p in ps]
    return LimitTable(ps, {
        "delta": [sobolev_delta(n, p) for p in ps],
        "C0p": [kernels.c0p(n, p) for p in ps],
        "C1p": [kernels.c1p(n, p) for p in ps],
        "quotient_log": vals,
        "target": [target] * len(ps),
        "gap": [abs(v - target) for v in vals],
    })


# -- the L^p trace inequality itself ---------------------------------------------

def sobolev_trace_deficit(u: ScalarField, n: int, p: float, spec: QuadratureSpec, center=None) -> float:
    """(1/S(n,p)) ||grad u||_{L^p} - ||u||_{L^{p(n-1)/(n-p)}(boundary)}."""
    S = kernels.sobolev_trace_constant(n, p)
    q = p * (n - 1) / (n - p)
    tail = u.tail
    supp = None if tail is None else tail.support_radius
    if tail is not None and supp is None:
        if not -q * tail.abs_rate > n - 1:
            raise DivergenceError(f"int |{u.name}|^{q:g} over the boundary diverges")
        if not p * tail.grad_decay > n:
            raise DivergenceError(f"int |grad {u.name}|^{p:g} diverges")

    def fb(xp):
        return np.abs(u.value(_on_boundary(xp))) ** q

    def fi(x):
        g = u.gradient(x)
        return np.einsum("...i,...i->...", g, g) ** (p / 2.0)

    if supp is not None:
        b = integrate_flat_disk(fb, supp, spec, n=n).require("boundary norm")
        e = integrate_half_ball(fi, supp, spec, n=n).require("gradient energy")
    else:
        bc = None if center is None else np.asarray(center, dtype=float)[:-1]
        b = integrate_boundary(fb, spec, n=n, center=bc).require("boundary norm")
        e = integrate_halfspace(fi, spec, n=n, center=center).require("gradient energy")
    return e ** (1.0 / p) / S - b ** (1.0 / q)
