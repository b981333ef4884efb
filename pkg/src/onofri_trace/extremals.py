"""Closed-form extremals and classified solutions with analytic derivatives.

Half-space points are (x', t); every family below is built from logarithms of
squared distances to a center placed below the boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .fields import ScalarField, Tail


def _vec(x0p, n):
    if x0p is None:
        return np.zeros(n - 1)
    v = np.atleast_1d(np.asarray(x0p, dtype=float))
    if v.size == 1 and n - 1 > 1:
        # a scalar shift is applied to the first boundary coordinate
        out = np.zeros(n - 1)
        out[0] = v[0]
        return out
    if v.shape != (n - 1,):
        raise ValueError(f"x0_prime must have {n - 1} components")
    return v


def _check_lambda(lam):
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")


@dataclass(frozen=True)
class OnofriTraceExtremal:
    n: int
    lam: float = 1.0
    x0_prime: Optional[np.ndarray] = None
    c_tilde: float = 0.0

    def __post_init__(self):
        _check_lambda(self.lam)
        object.__setattr__(self, "x0_prime", _vec(self.x0_prime, self.n))

    @property
    def center(self):
        return np.append(self.x0_prime, -self.lam)


@dataclass(frozen=True)
class LiouvilleSolution:
    n: int
    lam: float = 1.0
    x0_prime: Optional[np.ndarray] = None

    def __post_init__(self):
        _check_lambda(self.lam)
        object.__setattr__(self, "x0_prime", _vec(self.x0_prime, self.n))

    @property
    def center(self):
        """x0 = (x0', -lambda), strictly below the boundary."""
        return np.append(self.x0_prime, -self.lam)


@dataclass(frozen=True)
class FullSpaceLiouville:
    n: int
    lam: float = 1.0
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        _check_lambda(self.lam)
        x0 = np.zeros(self.n) if self.x0 is None else np.asarray(self.x0, dtype=float)
        object.__setattr__(self, "x0", x0)


@dataclass(frozen=True)
class SobolevTraceExtremal:
    n: int
    p: float
    lam: float = 1.0
    x0_prime: Optional[np.ndarray] = None

    def __post_init__(self):
        _check_lambda(self.lam)
        if not (1.0 < self.p < self.n):
            raise kernels.DomainError(f"p must lie in (1, {self.n})")
        object.__setattr__(self, "x0_prime", _vec(self.x0_prime, self.n))

    @property
    def center(self):
        return np.append(self.x0_prime, -self.lam)


def onofri_normalization(n: int) -> float:
    """The additive constant log(n^{n-1} sigma_{n-1} / 2) that turns w into u."""
    return math.log(n ** (n - 1) * kernels.sigma(n) / 2.0)


# -- log|x - c|^2 building block --------------------------------------------

def _sq(z):
    return np.einsum("...i,...i->...", z, z)


def _log_dist_hessian(z):
    """Hessian of log|z|^2: 2 (I/|z|^2 - 2 z z^T / |z|^4)."""
    n = z.shape[-1]
    q = _sq(z)[..., None, None]
    outer = z[..., :, None] * z[..., None, :]
    return 2.0 * (np.eye(n) / q - 2.0 * outer / q ** 2)


# -- families -------------------------------------------------------------------

def onofri_w(params: OnofriTraceExtremal) -> ScalarField:
    n, lam = params.n, params.lam
    c_ref = np.zeros(n)
    c_ref[-1] = -1.0
    x0 = params.center
    x0p = params.x0_prime
    const = math.log(lam) + params.c_tilde

    def value(x):
        x = np.asarray(x, dtype=float)
        q0 = _sq(x - x0)
        # numerator minus denominator of the ratio, expanded so that the
        # log stays accurate far out where both are huge
        xp = x[..., :-1]
        t = x[..., -1]
        diff = 2.0 * (xp @ x0p) - x0p @ x0p + (1.0 - lam) * (1.0 + lam + 2.0 * t)
        return 0.5 * n * np.log1p(diff / q0) + const

    def gradient(x):
        x = np.asarray(x, dtype=float)
        z_ref = x - c_ref
        z0 = x - x0
        return n * (z_ref / _sq(z_ref)[..., None] - z0 / _sq(z0)[..., None])

    def hessian(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * n * (_log_dist_hessian(x - c_ref) - _log_dist_hessian(x - x0))

    tail = Tail(exp_rate=0.0, abs_rate=0.0, grad_decay=2.0)
    scale = lam + float(np.linalg.norm(x0p))
    return ScalarField(n, value, gradient, hessian, tail, scale,
                       f"onofri_w(n={n},lam={lam},x0={x0p.tolist()},c={params.c_tilde})")


def liouville_u(params: LiouvilleSolution) -> ScalarField:
    n, lam = params.n, params.lam
    x0 = params.center
    const = math.log(n ** (n - 1) * lam)

    def value(x):
        z = np.asarray(x, dtype=float) - x0
        return const - 0.5 * n * np.log(_sq(z))

    def gradient(x):
        z = np.asarray(x, dtype=float) - x0
        return -n * z / _sq(z)[..., None]

    def hessian(x):
        z = np.asarray(x, dtype=float) - x0
        return -0.5 * n * _log_dist_hessian(z)

    tail = Tail(exp_rate=-float(n), abs_rate=0.0, grad_decay=1.0)
    return ScalarField(n, value, gradient, hessian, tail, lam + float(np.linalg.norm(params.x0_prime)),
                       f"liouville_u(n={n},lam={lam},x0={params.x0_prime.tolist()})")


def liouville_flux(params: LiouvilleSolution, x):
    """a(grad u) = -n^{n-1} (x - x0) / |x - x0|^n."""
    n = params.n
    z = np.asarray(x, dtype=float) - params.center
    return -(n ** (n - 1)) * z / _sq(z)[..., None] ** (n / 2.0)


def liouville_flux_jacobian(params: LiouvilleSolution, x):
    """d_j a_i(grad u) = -n^{n-1} [delta_ij / |z|^n - n z_i z_j / |z|^{n+2}]."""
    n = params.n
    z = np.asarray(x, dtype=float) - params.center
    q = _sq(z)[..., None, None]
    outer = z[..., :, None] * z[..., None, :]
    return -(n ** (n - 1)) * (np.eye(n) / q ** (n / 2.0) - n * outer / q ** (n / 2.0 + 1.0))


def fullspace_u(params: FullSpaceLiouville) -> ScalarField:
    n, lam = params.n, params.lam
    x0 = params.x0
    e = n / (n - 1.0)
    const = math.log(n * (n * n / (n - 1.0)) ** (n - 1) * lam ** n)
    lam_e = lam ** e

    def value(x):
        z = np.asarray(x, dtype=float) - x0
        rho = np.sqrt(_sq(z))
        return const - n * np.log1p(lam_e * rho ** e)

    def gradient(x):
        z = np.asarray(x, dtype=float) - x0
        rho = np.sqrt(_sq(z))
        with np.errstate(divide="ignore", invalid="ignore"):
            pref = -n * e * lam_e * rho ** (e - 2.0) / (1.0 + lam_e * rho ** e)
        pref = np.where(rho > 0, pref, 0.0)
        return pref[..., None] * z

    tail = Tail(exp_rate=-n * e, abs_rate=0.0, grad_decay=1.0)
    return ScalarField(n, value, gradient, None, tail, 1.0 / lam + float(np.linalg.norm(x0)),
                       f"fullspace_u(n={n},lam={lam})")


def sobolev_u_star(params: SobolevTraceExtremal) -> ScalarField:
    n, p, lam = params.n, params.p, params.lam
    x0 = params.center
    k = (n - p) / (2.0 * (p - 1.0))
    amp = lam ** (2.0 * k / p)

    def value(x):
        z = np.asarray(x, dtype=float) - x0
        return amp * _sq(z) ** (-k)

    def gradient(x):
        z = np.asarray(x, dtype=float) - x0
        q = _sq(z)
        return (-2.0 * k * amp * q ** (-k - 1.0))[..., None] * z

    tail = Tail(exp_rate=0.0, abs_rate=-2.0 * k, grad_decay=2.0 * k + 1.0)
    return ScalarField(n, value, gradient, None, tail, lam + float(np.linalg.norm(params.x0_prime)),
                       f"u_star(n={n},p={p},lam={lam})")


# -- w <-> u ----------------------------------------------------------------------

def _log_mu_hessian(x):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    z = x.copy()
    z[..., -1] += 1.0
    return -0.5 * n * _log_dist_hessian(z)


def u_from_w(w: ScalarField) -> ScalarField:
    hess = None
    if w.hessian is not None:
        def hess(x):
            return _log_mu_hessian(x) + w.hessian(x)
    tail = None
    if w.tail is not None:
        tail = Tail(exp_rate=w.tail.exp_rate - w.n, abs_rate=max(w.tail.abs_rate, 0.0),
                    grad_decay=min(w.tail.grad_decay, 1.0))
    return ScalarField(w.n, lambda x: kernels.log_weight_mu_n(x) + w.value(x),
                       lambda x: kernels.x_field(x) + w.gradient(x), hess, tail, w.scale,
                       f"u_from({w.name})")


def w_from_u(u: ScalarField) -> ScalarField:
    hess = None
    if u.hessian is not None:
        def hess(x):
            return u.hessian(x) - _log_mu_hessian(x)
    return ScalarField(u.n, lambda x: u.value(x) - kernels.log_weight_mu_n(x),
                       lambda x: u.gradient(x) - kernels.x_field(x), hess, None, u.scale,
                       f"w_from({u.name})")


def sobolev_delta(n: int, p: float) -> float:
    return (n - p) / (p * (n - 1.0))


def perturbed_h(w: ScalarField, p: float) -> ScalarField:
    """h = u_* (1 + delta w) with u_* the centred Sobolev trace extremal."""
    n = w.n
    ustar = sobolev_u_star(SobolevTraceExtremal(n, p))
    d = sobolev_delta(n, p)

    def value(x):
        return ustar.value(x) * (1.0 + d * w.value(x))

    def gradient(x):
        xd, yd = h_gradient_parts(ustar, w, d, x)
        return xd + yd

    return ScalarField(n, value, gradient, None, None, w.scale, f"h(p={p},{w.name})")


def h_gradient_parts(ustar: ScalarField, w: ScalarField, delta: float, x):
    """(X_delta, Y_delta) = (grad u_* (1 + delta w), delta u_* grad w)."""
    x = np.asarray(x, dtype=float)
    wv = w.value(x)
    xd = ustar.gradient(x) * (1.0 + delta * wv)[..., None]
    yd = delta * ustar.value(x)[..., None] * w.gradient(x)
    return xd, yd
