"""Deterministic adaptive cubature on boxes, with wrappers for half-balls,
the boundary hyperplane, hemispheres, the whole half-space and R^n.

Each box carries an embedded pair of tensor Gauss-Legendre rules (k and 2k
points per axis); |Q_2k - Q_k| is the box error.  The worst boxes are
bisected along the axis whose high-order Legendre coefficients are largest.
Box values are summed with math.fsum, so the total does not depend on the
order of evaluation, and evaluation chunks have a fixed size so thread count
never changes the arrays handed to the integrand.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .kernels import DomainError, sigma


class ConvergenceError(RuntimeError):
    """Raised by higher-level callers when a quadrature did not converge."""

    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


@dataclass(frozen=True)
class QuadratureSpec:
    truncation_radius: float = 8.0   # R0: inner ball radius before compactification
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_evals: int = 10_000_000
    rule_order: int = 5
    threads: int = 1

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.truncation_radius <= 0:
            raise ValueError("truncation radius must be positive")
        if self.rule_order < 1:
            raise ValueError("rule order must be >= 1")

    def with_(self, **kw) -> "QuadratureSpec":
        return replace(self, **kw)


def default_spec(n: int, lam: float = 1.0, **overrides) -> QuadratureSpec:
    """Defaults by dimension: tight for n <= 3, relaxed for n = 4, 5."""
    if n <= 3:
        base = QuadratureSpec(4.0 * (1.0 + lam), 1e-8, 1e-10, 10_000_000, 5)
    elif n <= 5:
        base = QuadratureSpec(4.0 * (1.0 + lam), 1e-6, 1e-8, 100_000_000, 4)
    else:
        raise DomainError("quadrature supports n <= 5")
    return replace(base, **overrides)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    n_evals: int
    converged: bool

    def require(self, what: str = "integral") -> float:
        if not self.converged:
            raise ConvergenceError(
                f"{what}: not converged (value {self.value!r}, error {self.error_estimate:.3g}, "
                f"{self.n_evals} evaluations)", self)
        return self.value


# ---------------------------------------------------------------------------
# tensor rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gl(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


@lru_cache(maxsize=None)
def _rule(d: int, k: int):
    def tensor(m):
        x, w = _gl(m)
        nodes = np.array(list(itertools.product(x, repeat=d)))
        weights = np.array([math.prod(c) for c in itertools.product(w, repeat=d)])
        return nodes, weights

    lo_nodes, lo_w = tensor(k)
    hi_nodes, hi_w = tensor(2 * k)
    # Legendre analysis matrix on the 2k-point grid: c_l = (2l+1)/2 sum_i w_i P_l(x_i) g_i
    x, w = _gl(2 * k)
    vander = np.polynomial.legendre.legvander(x, 2 * k - 1)      # (2k, 2k): P_l(x_i)
    analysis = (vander * w[:, None]).T * ((2 * np.arange(2 * k) + 1) / 2.0)[:, None]
    # only the top half of the spectrum drives the split direction
    return lo_nodes, lo_w, hi_nodes, hi_w, analysis[k:, :], w


_CHUNK_POINTS = 1 << 16


class _BoxIntegrator:
    def __init__(self, f: Callable, d: int, spec: QuadratureSpec):
        self.f = f
        self.d = d
        self.spec = spec
        k = spec.rule_order
        (self.lo_nodes, self.lo_w, self.hi_nodes, self.hi_w,
         self.high_analysis, self.w1d) = _rule(d, k)
        self.k = k
        self.n_hi = len(self.hi_w)
        self.n_lo = len(self.lo_w)
        self.cost = self.n_hi + self.n_lo
        self.boxes_per_chunk = max(1, _CHUNK_POINTS // self.cost)

    def _work(self, C, H):
        b, d = C.shape
        pts_hi = (C[:, None, :] + H[:, None, :] * self.hi_nodes[None]).reshape(-1, d)
        pts_lo = (C[:, None, :] + H[:, None, :] * self.lo_nodes[None]).reshape(-1, d)
        vals = np.asarray(self.f(np.concatenate([pts_hi, pts_lo])), dtype=float)
        if vals.shape != (b * self.cost,):
            raise ValueError(f"integrand returned shape {vals.shape}, expected {(b * self.cost,)}")
        vhi = vals[: b * self.n_hi].reshape(b, self.n_hi)
        vlo = vals[b * self.n_hi:].reshape(b, self.n_lo)
        vol = np.prod(H, axis=1)
        qhi = vol * (vhi * self.hi_w).sum(axis=1)
        qlo = vol * (vlo * self.lo_w).sum(axis=1)
        finite = np.isfinite(qhi) & np.isfinite(qlo)
        axis = self._split_axis(vhi, H)
        return qhi, qlo, axis, finite

    def _split_axis(self, vhi, H):
        b = vhi.shape[0]
        d = self.d
        m = 2 * self.k
        if d == 1:
            return np.zeros(b, dtype=int)
        grid = vhi.reshape((b,) + (m,) * d)
        scores = np.empty((b, d))
        absw = self.w1d
        for j in range(d):
            g = np.moveaxis(grid, j + 1, -1)                       # (b, m, .., m, m_j)
            coef = np.abs(np.einsum("...i,li->...l", g, self.high_analysis)).sum(axis=-1)
            for _ in range(d - 1):                                  # weight the other axes
                coef = np.einsum("...i,i->...", coef, absw)
            scores[:, j] = coef
        scores = np.where(np.isfinite(scores), scores, np.inf)
        # ties (e.g. flat integrand) go to the widest axis
        scores = scores + 1e-300 * H
        return np.argmax(scores, axis=1)

    def evaluate(self, C, H, pool=None):
        B = C.shape[0]
        step = self.boxes_per_chunk
        slices = [(i, min(i + step, B)) for i in range(0, B, step)]
        if pool is not None and len(slices) > 1:
            parts = list(pool.map(lambda s: self._work(C[s[0]:s[1]], H[s[0]:s[1]]), slices))
        else:
            parts = [self._work(C[a:b], H[a:b]) for a, b in slices]
        qhi = np.concatenate([p[0] for p in parts])
        qlo = np.concatenate([p[1] for p in parts])
        axis = np.concatenate([p[2] for p in parts])
        finite = np.concatenate([p[3] for p in parts])
        return qhi, qlo, axis, finite


def integrate_box(f: Callable, lower: Sequence[float], upper: Sequence[float],
                  spec: QuadratureSpec, splits: Optional[Sequence[int]] = None) -> QuadratureResult:
    """Adaptive cubature of f over the box [lower, upper].

    f takes an (m, d) array of points and returns m values.  `splits` gives
    an initial uniform subdivision count per axis.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = lower.size
    integ = _BoxIntegrator(f, d, spec)
    if spec.max_evals < spec.rule_order ** d:
        raise ValueError("max_evals must be at least rule_order^d")

    splits = [1] * d if splits is None else list(splits)
    edges = [np.linspace(lower[j], upper[j], splits[j] + 1) for j in range(d)]
    cells = list(itertools.product(*[range(s) for s in splits]))
    C = np.array([[0.5 * (edges[j][c[j]] + edges[j][c[j] + 1]) for j in range(d)] for c in cells])
    H = np.array([[0.5 * (edges[j][c[j] + 1] - edges[j][c[j]]) for j in range(d)] for c in cells])

    pool = ThreadPoolExecutor(spec.threads) if spec.threads > 1 else None
    try:
        qhi, qlo, axis, finite = integ.evaluate(C, H, pool)
        evals = len(C) * integ.cost
        if not finite.all():
            return QuadratureResult(math.nan, math.inf, evals, False)
        E = np.abs(qhi - qlo)
        Q = qhi
        while True:
            total = math.fsum(Q)
            err = math.fsum(E)
            target = max(spec.abs_tol, spec.rel_tol * abs(total))
            if err <= target:
                return QuadratureResult(total, err, evals, True)
            budget_boxes = (spec.max_evals - evals) // (2 * integ.cost)
            if budget_boxes < 1:
                return QuadratureResult(total, err, evals, False)
            order = np.lexsort((np.arange(len(E)), -E))
            csum = np.cumsum(E[order])
            # split the worst boxes that carry half of the excess error
            need = 0.5 * (err - target) if err > target else 0.0
            m = int(np.searchsorted(csum, need, side="left")) + 1
            m = max(1, min(m, budget_boxes, len(order), 4096))
            pick = np.sort(order[:m])
            keep = np.ones(len(E), dtype=bool)
            keep[pick] = False

            Cp, Hp, ax = C[pick], H[pick].copy(), axis[pick]
            rows = np.arange(m)
            Hp[rows, ax] *= 0.5
            Ca, Cb = Cp.copy(), Cp.copy()
            Ca[rows, ax] -= Hp[rows, ax]
            Cb[rows, ax] += Hp[rows, ax]
            Cn = np.concatenate([Ca, Cb])
            Hn = np.concatenate([Hp, Hp])
            nhi, nlo, nax, nfin = integ.evaluate(Cn, Hn, pool)
            evals += len(Cn) * integ.cost
            if not nfin.all():
                return QuadratureResult(math.nan, math.inf, evals, False)
            C = np.concatenate([C[keep], Cn])
            H = np.concatenate([H[keep], Hn])
            Q = np.concatenate([Q[keep], nhi])
            E = np.concatenate([E[keep], np.abs(nhi - nlo)])
            axis = np.concatenate([axis[keep], nax])
    finally:
        if pool is not None:
            pool.shutdown()


def integrate_interval(f: Callable, a: float, b: float, spec: QuadratureSpec,
                       splits: int = 1) -> QuadratureResult:
    """1-D adaptive Gauss-Legendre; f maps an (m,) array to (m,)."""
    return integrate_box(lambda p: f(p[:, 0]), [a], [b], spec, [splits])


# ---------------------------------------------------------------------------
# coordinate maps
# ---------------------------------------------------------------------------

def _sphere(angles, d):
    """Unit vectors on S^{d-1} (d >= 2) and the surface Jacobian.

    d = 2: angles[:, 0] in [0, 2pi].  d >= 3: angles[:, 0] in [0, pi] is the
    polar angle from the last axis, the rest parametrise S^{d-2}.
    """
    if d == 2:
        th = angles[:, 0]
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.ones(len(th))
    phi = angles[:, 0]
    sub, jac = _sphere(angles[:, 1:], d - 1)
    s = np.sin(phi)
    u = np.concatenate([s[:, None] * sub, np.cos(phi)[:, None]], axis=1)
    return u, jac * s ** (d - 2)


def _sphere_box(d):
    if d == 2:
        return [0.0], [2 * math.pi]
    lo, hi = _sphere_box(d - 1)
    return [0.0] + lo, [math.pi] + hi


def _hemisphere(angles, n):
    """Unit vectors on the upper hemisphere of S^{n-1} (last coordinate >= 0)."""
    if n == 2:
        th = angles[:, 0]
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.ones(len(th))
    return _sphere(angles, n)


def _hemisphere_box(n):
    if n == 2:
        return [0.0], [math.pi]
    lo, hi = _sphere_box(n)
    hi = list(hi)
    hi[0] = 0.5 * math.pi
    return lo, hi


def _radial(rho, R0):
    """rho in [0, 1]: r = R0 rho;  rho in (1, 2): r = R0 / (2 - rho)."""
    inner = rho <= 1.0
    with np.errstate(divide="ignore"):
        r = np.where(inner, R0 * rho, R0 / (2.0 - rho))
        dr = np.where(inner, R0, R0 / (2.0 - rho) ** 2)
    return r, dr


def _angle_splits(nang):
    return [2] * nang


# ---------------------------------------------------------------------------
# domain wrappers
# ---------------------------------------------------------------------------

def integrate_half_ball(f: Callable, R: float, spec: QuadratureSpec, *, n: int,
                        center=None, r_min: float = 0.0) -> QuadratureResult:
    """Integral of f over B_R^+ = {|x - c| < R, t > 0}, c a boundary point.

    With r_min > 0 the inner half-ball of that radius is left out.
    """
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    lo, hi = _hemisphere_box(n)

    def g(p):
        r = p[:, 0]
        u, jac = _hemisphere(p[:, 1:], n)
        x = c + r[:, None] * u
        return f(x) * jac * r ** (n - 1)

    return integrate_box(g, [r_min] + lo, [R] + hi, spec, [2] + _angle_splits(n - 1))


def integrate_halfspace(f: Callable, spec: QuadratureSpec, *, n: int, center=None) -> QuadratureResult:
    """Integral of f over the open upper half-space via radial compactification."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    lo, hi = _hemisphere_box(n)
    R0 = spec.truncation_radius

    def g(p):
        r, dr = _radial(p[:, 0], R0)
        u, jac = _hemisphere(p[:, 1:], n)
        x = c + r[:, None] * u
        return f(x) * jac * r ** (n - 1) * dr

    return integrate_box(g, [0.0] + lo, [2.0] + hi, spec, [4] + _angle_splits(n - 1))


def integrate_fullspace(f: Callable, spec: QuadratureSpec, *, n: int, center=None) -> QuadratureResult:
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    R0 = spec.truncation_radius
    lo, hi = _sphere_box(n)

    def g(p):
        r, dr = _radial(p[:, 0], R0)
        u, jac = _sphere(p[:, 1:], n)
        return f(c + r[:, None] * u) * jac * r ** (n - 1) * dr

    return integrate_box(g, [0.0] + lo, [2.0] + hi, spec, [4] + _angle_splits(n - 1))


def integrate_boundary(f: Callable, spec: QuadratureSpec, *, n: int, center=None) -> QuadratureResult:
    """Integral over the boundary hyperplane R^{n-1}; f takes (m, n-1) arrays."""
    d = n - 1
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    R0 = spec.truncation_radius
    if d == 1:
        def g(p):
            r, dr = _radial(p[:, 0], R0)
            return (f((c + r)[:, None]) + f((c - r)[:, None])) * dr

        return integrate_box(g, [0.0], [2.0], spec, [4])
    lo, hi = _sphere_box(d)

    def g(p):
        r, dr = _radial(p[:, 0], R0)
        u, jac = _sphere(p[:, 1:], d)
        return f(c + r[:, None] * u) * jac * r ** (d - 1) * dr

    return integrate_box(g, [0.0] + lo, [2.0] + hi, spec, [4] + _angle_splits(d - 1))


def integrate_flat_disk(f: Callable, R: float, spec: QuadratureSpec, *, n: int, center=None) -> QuadratureResult:
    """Integral over Sigma_R = {|x'| < R, t = 0}; f takes (m, n-1) arrays."""
    d = n - 1
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    if d == 1:
        return integrate_box(lambda p: f(c + p), [-R], [R], spec, [2])
    lo, hi = _sphere_box(d)

    def g(p):
        r = p[:, 0]
        u, jac = _sphere(p[:, 1:], d)
        return f(c + r[:, None] * u) * jac * r ** (d - 1)

    return integrate_box(g, [0.0] + lo, [R] + hi, spec, [2] + _angle_splits(d - 1))


def integrate_hemisphere(f: Callable, R: float, spec: QuadratureSpec, *, n: int,
                         center=None) -> QuadratureResult:
    """Surface integral over the hemisphere {|x - c| = R, t > 0}.

    f receives (points, outward unit normals) when it accepts two arguments,
    otherwise just the points.
    """
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    lo, hi = _hemisphere_box(n)
    two_args = _arity(f) >= 2

    def g(p):
        u, jac = _hemisphere(p, n)
        x = c + R * u
        val = f(x, u) if two_args else f(x)
        return val * jac * R ** (n - 1)

    return integrate_box(g, lo, hi, spec, _angle_splits(n - 1))


def _arity(f):
    import inspect
    try:
        params = inspect.signature(f).parameters.values()
    except (TypeError, ValueError):
        return 1
    return sum(1 for p in params if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)
               and p.default is p.empty)


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------

def tail_bound(decay_exponent: float, prefactor: float, R: float, n: int,
               region: str = "interior") -> float:
    """Bound on int_{|x|>R} prefactor |x|^{-q}: half-space, boundary plane or R^n."""
    q = float(decay_exponent)
    if region == "interior":
        dim, area = n, 0.5 * sigma(n)
    elif region == "boundary":
        dim, area = n - 1, sigma(n - 1)
    elif region == "fullspace":
        dim, area = n, sigma(n)
    else:
        raise ValueError(f"unknown region {region!r}")
    if not q > dim:
        raise DomainError(f"decay exponent {q} is not integrable in dimension {dim}")
    return prefactor * area * R ** (dim - q) / (q - dim)
