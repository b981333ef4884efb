"""Behaviour at infinity of the classified solutions and the radial barrier
used to pin the decay rate: profile deviation, gradient decay, logarithmic
upper bound, max/min ratio on spheres, and the supersolution
u_bar(x) = C1^{1/(n-1)} phi(|x| + t |x|^{-delta}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .extremals import LiouvilleSolution, liouville_u
from .quadrature import QuadratureSpec, integrate_interval
from .sampling import hemisphere_directions


@dataclass(frozen=True)
class ProfileReport:
    radii: list
    sup_deviation: list
    grad_decay: list


def _dirs(n, directions):
    if directions is None:
        return hemisphere_directions(n, 256)
    d = np.asarray(directions, dtype=float)
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def sharp_profile(params: LiouvilleSolution, radii: Sequence[float], directions=None) -> ProfileReport:
    """sup over directions of |u + n log|x| - log(n^{n-1} lam)| at each radius."""
    n = params.n
    u = liouville_u(params)
    dirs = _dirs(n, directions)
    limit = math.log(n ** (n - 1) * params.lam)
    dev, grad = [], []
    for R in radii:
        x = R * dirs
        dev.append(float(np.max(np.abs(u.value(x) + n * math.log(R) - limit))))
        g = u.gradient(x) + n * x / R ** 2
        grad.append(float(R * np.max(np.linalg.norm(g, axis=1))))
    return ProfileReport(list(radii), dev, grad)


def gradient_decay(params: LiouvilleSolution, radii: Sequence[float], directions=None) -> ProfileReport:
    """|x| |grad(u + n log|x|)| maximised over directions at each radius."""
    return sharp_profile(params, radii, directions)


def log_upper_bound(params: LiouvilleSolution, samples, exponent: Optional[float] = None) -> float:
    """Empirical sup of u(x) + k log|x| over the samples; k = n - 1 by default."""
    n = params.n
    k = n - 1 if exponent is None else exponent
    x = np.asarray(samples, dtype=float)
    r = np.linalg.norm(x, axis=1)
    if np.any(r == 0):
        raise ValueError("samples must exclude the origin")
    return float(np.max(liouville_u(params).value(x) + k * np.log(r)))


def sup_u(params: LiouvilleSolution) -> float:
    """max u = log(n^{n-1} lam^{1-n}), attained at (x0', 0)."""
    n = params.n
    return math.log(n ** (n - 1) * params.lam ** (1 - n))


def sphere_harnack_ratio(params: LiouvilleSolution, U0: Optional[float], kappas: Sequence[float],
                         directions=None) -> List[Optional[float]]:
    """max/min of U0 - u on {|x| = kappa} in the closed half-space.

    Spheres where min(U0 - u) <= 0 are flagged by a None entry.
    """
    n = params.n
    u = liouville_u(params)
    if U0 is None:
        U0 = sup_u(params)
    dirs = _dirs(n, directions)
    out: List[Optional[float]] = []
    for k in kappas:
        uh = U0 - u.value(k * dirs)
        lo = float(np.min(uh))
        out.append(None if lo <= 0 else float(np.max(uh)) / lo)
    return out


# ---------------------------------------------------------------------------
# supersolution
# ---------------------------------------------------------------------------

class InfeasibleParameters(ValueError):
    pass


@dataclass(frozen=True)
class SupersolutionParams:
    n: int
    gamma: float
    delta: float
    R1: float
    a_eps: float
    b: float
    C1: float

    @property
    def beta(self) -> float:
        return float(self.n)

    @property
    def c_phi(self) -> float:
        """((gamma - n)/2)^{1/(1-n)}."""
        return ((self.gamma - self.n) / 2.0) ** (1.0 / (1.0 - self.n))

    def violations(self) -> List[str]:
        n, g, d = self.n, self.gamma, self.delta
        out = []
        lo = (g - n) / 2.0
        hi = min(1.0, (self.beta - (n - 1)) / 2.0)
        if not (0 < lo < d < hi):
            out.append(f"need 0 < (gamma-n)/2 = {lo:g} < delta = {d:g} < {hi:g}")
        if not self.a_eps >= 2.0 * self.R1 ** ((n - g) / 2.0):
            out.append(f"a_eps = {self.a_eps:g} < 2 R1^((n-gamma)/2) = {2.0 * self.R1 ** ((n - g) / 2.0):g}")
        if self.C1 <= 0:
            out.append("C1 must be positive")
        if self.b < 0:
            out.append("b must be >= 0")
        return out

    def validate(self):
        v = self.violations()
        if v:
            raise InfeasibleParameters("; ".join(v))
        return self


def solve_supersolution_params(n: int = 3, gamma: float = 3.5, delta: float = 0.3, R1: float = 1e3,
                               C1: Optional[float] = None, eps: float = 0.5,
                               u_sup_on_R1: Optional[float] = None):
    """Pick C1, then a_eps, C0 and b from the parameter constraints.

    C1 defaults to 3/4 of the largest value allowed by
    (n-1)^{n-1} (gamma-n) / (2 C1) >= 2 R1^{(n-gamma)/2}.
    C0 is the largest value the constraint chain admits,
    [(n-1)^{n-1} - 2 C1 (gamma-n)^{-1} R1^{(n-gamma)/2}] R1^{(beta-(n-1))/2 - delta}.
    Returns (params, C0); raises InfeasibleParameters instead of guessing.
    """
    beta = float(n)
    if not (0.0 < eps < beta - n + 1):
        raise InfeasibleParameters(f"eps must lie in (0, {beta - n + 1:g})")
    power = R1 ** ((n - gamma) / 2.0)
    c1_max = (n - 1) ** (n - 1) * (gamma - n) / (4.0 * power) if gamma > n else -1.0
    if C1 is None:
        C1 = 0.75 * c1_max
    if not (0 < C1 <= c1_max):
        raise InfeasibleParameters(f"C1 = {C1:g} outside (0, {c1_max:g}]")
    a_eps = (beta - eps) ** (n - 1) * (gamma - n) / (2.0 * C1)
    C0 = ((n - 1) ** (n - 1) - 2.0 * C1 / (gamma - n) * power) * R1 ** ((beta - (n - 1)) / 2.0 - delta)
    if not C0 > 0:
        raise InfeasibleParameters(f"constraint chain leaves no positive C0 ({C0:g})")
    b = 0.0
    if u_sup_on_R1 is not None:
        b = max(0.0, u_sup_on_R1 + beta * math.log(2.0)) / C1 ** (1.0 / (n - 1))
    sp = SupersolutionParams(n, gamma, delta, R1, a_eps, b, C1).validate()
    return sp, C0


def _check_r(r, sp: SupersolutionParams, below_R1: bool = False):
    r = np.asarray(r, dtype=float)
    if not below_R1 and np.any(r < sp.R1 * (1 - 1e-12)):
        raise ValueError("phi is defined for r >= R1")
    if np.any(sp.a_eps - r ** ((sp.n - sp.gamma) / 2.0) < 0):
        raise InfeasibleParameters("a_eps - r^{(n-gamma)/2} < 0")
    return r


def phi_prime(r, sp: SupersolutionParams):
    """-((gamma-n)/2)^{1/(1-n)} (a_eps - r^{(n-gamma)/2})^{1/(n-1)} / r."""
    r = _check_r(r, sp, below_R1=True)
    n = sp.n
    return -sp.c_phi * (sp.a_eps - r ** ((n - sp.gamma) / 2.0)) ** (1.0 / (n - 1)) / r


def phi(r, sp: SupersolutionParams, spec: Optional[QuadratureSpec] = None):
    """phi(r) = -c int_{R1}^r (a_eps - s^{(n-gamma)/2})^{1/(n-1)} ds / s + b, by adaptive
    quadrature in the variable log s."""
    scalar = np.ndim(r) == 0
    rs = np.atleast_1d(_check_r(r, sp))
    n = sp.n
    spec = spec or QuadratureSpec(rel_tol=1e-13, abs_tol=1e-15, rule_order=8)
    out = np.empty_like(rs)
    lo = math.log(sp.R1)
    for i, ri in enumerate(rs):
        hi = math.log(ri)
        if hi <= lo:
            out[i] = sp.b
            continue
        res = integrate_interval(
            lambda v: (sp.a_eps - np.exp(v * (n - sp.gamma) / 2.0)) ** (1.0 / (n - 1)), lo, hi, spec)
        out[i] = -sp.c_phi * res.require("phi integral") + sp.b
    return float(out[0]) if scalar else out


def phi_sandwich(r, sp: SupersolutionParams):
    """(lower, -phi', upper) of the two-sided bound on -phi'."""
    r = _check_r(r, sp)
    n = sp.n
    lower = sp.c_phi * (sp.a_eps - r ** ((n - sp.gamma) / 2.0)) ** (1.0 / (n - 1)) / r
    upper = sp.c_phi * sp.a_eps ** (1.0 / (n - 1)) / r
    return lower, -phi_prime(r, sp), upper


def phi_ode_residual(r, sp: SupersolutionParams, rel_step: float = 1e-5):
    """Relative residual of [(-phi')^{n-1}]' + (n-1)(-phi')^{n-1}/r = r^{-(n+gamma)/2}.

    The derivative is a central difference with step rel_step * r; the
    residual is divided by the right-hand side.
    """
    r = _check_r(r, sp)
    n = sp.n
    F = lambda s: (-phi_prime(s, sp)) ** (n - 1)
    # the closed-form phi' stays defined a step below R1
    h = rel_step * r
    dF = (F(r + h) - F(r - h)) / (2 * h)
    rhs = r ** (-(n + sp.gamma) / 2.0)
    return (dF + (n - 1) * F(r) / r - rhs) / rhs


# -- the barrier in the half-space ---------------------------------------------

def _radius(x, delta):
    x = np.asarray(x, dtype=float)
    rho = np.linalg.norm(x, axis=-1)
    t = x[..., -1]
    return rho, t, rho + t / rho ** delta


def barrier_X(x, delta):
    """X = grad(|x| + t |x|^{-delta})."""
    x = np.asarray(x, dtype=float)
    rho, t, _ = _radius(x, delta)
    f = 1.0 - delta * t / rho ** (delta + 1)
    X = x / rho[..., None] * f[..., None]
    X[..., -1] += rho ** (-delta)
    return X


def barrier_A(x, delta):
    rho, t, _ = _radius(x, delta)
    return (2 * (1 - delta) * t / rho ** (delta + 1) + (delta ** 2 - 2 * delta) * t ** 2 / rho ** (2 * delta + 2)
            + rho ** (-2 * delta))


def barrier_grad_A(x, delta):
    """Closed-form gradient of A, componentwise as written out by hand."""
    x = np.asarray(x, dtype=float)
    rho, t, _ = _radius(x, delta)
    d = delta
    bracket = ((d * d - 1) * t / rho - (d + 1) * (d * d - 2 * d) * t ** 2 / rho ** (d + 2)
               - d / rho ** d)
    g = 2.0 * x / rho[..., None] ** (d + 2) * bracket[..., None]
    g[..., -1] += 2.0 / rho ** (d + 1) * (1 - d + (d * d - 2 * d) * t / rho ** (d + 1))
    return g


def barrier_grad_A_hessian_route(x, delta):
    """grad A = 2 Hess(r) X, with r = |x| + t |x|^{-delta}; independent of barrier_grad_A."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    rho, t, _ = _radius(x, delta)
    xh = x / rho[..., None]
    eye = np.eye(n)
    outer = xh[..., :, None] * xh[..., None, :]
    hess = (eye - outer) / rho[..., None, None]
    gpow = -delta * rho[..., None] ** (-delta - 2) * x               # grad |x|^{-delta}
    hpow = (-delta * rho[..., None, None] ** (-delta - 2) * eye
            + delta * (delta + 2) * rho[..., None, None] ** (-delta - 4) * x[..., :, None] * x[..., None, :])
    et = np.zeros(n)
    et[-1] = 1.0
    hess = hess + et[:, None] * gpow[..., None, :] + gpow[..., :, None] * et[None, :] + t[..., None, None] * hpow
    return 2.0 * np.einsum("...ij,...j->...i", hess, barrier_X(x, delta))


def barrier_div_X(x, delta):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    rho, t, _ = _radius(x, delta)
    return (n - 1) / rho - delta * (n - delta) * t / rho ** (delta + 2)


def barrier_gradient(x, sp: SupersolutionParams):
    _, _, r = _radius(x, sp.delta)
    return (sp.C1 ** (1.0 / (sp.n - 1)) * phi_prime(r, sp))[..., None] * barrier_X(x, sp.delta)


def barrier_terms(x, sp: SupersolutionParams):
    """The three terms of -Delta_n u_bar / C1 (leading, grad-A term, div-X term)."""
    n, d = sp.n, sp.delta
    _, _, r = _radius(x, d)
    F = (-phi_prime(r, sp)) ** (n - 1)
    dF = sp.c_phi ** (n - 1) * (
        -((n - sp.gamma) / 2.0) * r ** ((n - sp.gamma) / 2.0 - 1.0) * r ** (1 - n)
        + (1 - n) * (sp.a_eps - r ** ((n - sp.gamma) / 2.0)) * r ** (-n))
    A = barrier_A(x, d)
    X = barrier_X(x, d)
    gA = barrier_grad_A(x, d)
    t1 = dF * (1 + A) ** (n / 2.0)
    t2 = (n - 2) / 2.0 * F * (1 + A) ** (n / 2.0 - 2) * np.einsum("...i,...i->...", gA, X)
    t3 = F * (1 + A) ** ((n - 2) / 2.0) * barrier_div_X(x, d)
    return t1, t2, t3


def minus_n_laplacian_barrier(x, sp: SupersolutionParams):
    t1, t2, t3 = barrier_terms(x, sp)
    return sp.C1 * (t1 + t2 + t3)


def boundary_flux_barrier(xp_norm, sp: SupersolutionParams):
    """|grad u_bar|^{n-2} d_t u_bar at t = 0 as a function of |x|, closed form."""
    r = np.asarray(xp_norm, dtype=float)
    n, d = sp.n, sp.delta
    dp = phi_prime(r, sp)
    return sp.C1 * (-dp) ** (n - 2) * dp * (1 + r ** (-2 * d)) ** ((n - 2) / 2.0) * r ** (-d)


@dataclass(frozen=True)
class SignReport:
    passed: bool
    min_margin: float
    n_samples: int
    worst_point: tuple


def supersolution_checks(sp: SupersolutionParams, C0: float, samples, boundary_radii=None):
    """(boundary, interior) sign checks of the barrier.

    boundary: |grad u_bar|^{n-2} d_t u_bar <= -C0 |x|^{-(n-1+beta)/2} at t = 0,
              margin = (-value) / (C0 |x|^{-(n-1+beta)/2}) - 1.
    interior: -Delta_n u_bar > 0, margin = value / (C1 r^{-(n+gamma)/2}).
    """
    n = sp.n
    x = np.asarray(samples, dtype=float)
    rho = np.linalg.norm(x, axis=1)
    if np.any(rho < sp.R1 * (1 - 1e-12)):
        raise ValueError("samples must satisfy |x| >= R1")
    if boundary_radii is None:
        bnd = rho[x[:, -1] == 0.0]
        boundary_radii = np.concatenate([[sp.R1], bnd])
    br = np.asarray(boundary_radii, dtype=float)
    bval = boundary_flux_barrier(br, sp)
    bmargin = -bval / (C0 * br ** (-(n - 1 + sp.beta) / 2.0)) - 1.0
    i = int(np.argmin(bmargin))
    boundary = SignReport(bool(np.all(bmargin >= 0)), float(bmargin[i]), len(br), (float(br[i]),))

    _, _, r = _radius(x, sp.delta)
    ival = minus_n_laplacian_barrier(x, sp)
    imargin = ival / (sp.C1 * r ** (-(n + sp.gamma) / 2.0))
    j = int(np.argmin(imargin))
    interior = SignReport(bool(np.all(imargin > 0)), float(imargin[j]), len(x),
                          tuple(float(v) for v in x[j]))
    return boundary, interior


def supersolution_samples(sp: SupersolutionParams, m: int = 1000, seed: int = 0, span: float = 100.0):
    """Seeded points with R1 <= |x| <= span R1, a share of them on t = 0."""
    n = sp.n
    rng = np.random.default_rng(seed)
    radii = sp.R1 * span ** rng.random(m)
    radii[0] = sp.R1
    d = rng.normal(size=(m, n))
    d[:, -1] = np.abs(d[:, -1])
    d[: m // 4, -1] = 0.0
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return radii[:, None] * d


def halve_a(sp: SupersolutionParams) -> SupersolutionParams:
    """Negative control: a_eps halved, everything else kept."""
    return replace(sp, a_eps=0.5 * sp.a_eps)
