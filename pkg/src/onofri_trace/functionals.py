"""Both sides of the half-space trace inequality and of the full-space
inequality, the deficit, the quotient Q, weighted norms and mass integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .fields import ScalarField
from .quadrature import (ConvergenceError, QuadratureResult, QuadratureSpec, integrate_boundary,
                         integrate_flat_disk, integrate_fullspace, integrate_half_ball,
                         integrate_halfspace)


class DivergenceError(ValueError):
    """The integrand is not integrable according to the field's tail data."""


class UndefinedQuotient(ValueError):
    pass


@dataclass(frozen=True)
class Integral:
    value: float
    error: float
    tail_verified: bool


@dataclass(frozen=True)
class DeficitReport:
    lhs: float
    rhs: float
    deficit: float
    quad_errors: tuple
    tail_verified: bool = True

    @property
    def error(self) -> float:
        return float(sum(self.quad_errors))


# ---------------------------------------------------------------------------
# integrability from tail data
# ---------------------------------------------------------------------------

def _tail_ok(w: ScalarField, decay: Optional[float], dim: int, what: str) -> bool:
    """True if verified, False if the field carries no tail data."""
    if w.tail is None:
        return False
    if decay is None or not decay > dim:
        raise DivergenceError(f"{what} diverges for {w.name}: decay exponent {decay} <= {dim}")
    return True


def _kernel_decay(w: ScalarField) -> Optional[float]:
    if w.tail is None:
        return None
    gd = w.tail.grad_decay
    n = w.n
    return min(n * gd, 2 * gd + n - 2)


def _support(w: ScalarField) -> Optional[float]:
    return None if w.tail is None else w.tail.support_radius


def _on_boundary(xp):
    xp = np.asarray(xp, dtype=float)
    return np.concatenate([xp, np.zeros(xp.shape[:-1] + (1,))], axis=-1)


def _project_center(center, n):
    """(interior centre (c', 0), boundary centre c') for a point c of R^n.

    The integrators place their radial map at a boundary point, so the family
    centres (x0', -lam) that sit below the boundary are projected onto it.
    """
    if center is None:
        return None, None
    c = np.asarray(center, dtype=float)
    if c.shape[-1] == n - 1:
        c = np.concatenate([c, [0.0]])
    ci = c.copy()
    ci[-1] = 0.0
    return ci, ci[:-1]


def _interior(f, w: ScalarField, spec: QuadratureSpec, what: str, center=None) -> QuadratureResult:
    center = _project_center(center, w.n)[0]
    R = _support(w)
    if R is not None:
        res = integrate_half_ball(f, R, spec, n=w.n)
    else:
        res = integrate_halfspace(f, spec, n=w.n, center=center)
    res.require(what)
    return res


def _boundary(f, w: ScalarField, spec: QuadratureSpec, what: str, center=None) -> QuadratureResult:
    center = _project_center(center, w.n)[1]
    R = _support(w)
    if R is not None:
        # outside the support the integrand vanishes
        inner = integrate_flat_disk(f, R, spec, n=w.n)
        inner.require(what)
        return inner
    res = integrate_boundary(f, spec, n=w.n, center=center)
    res.require(what)
    return res


# ---------------------------------------------------------------------------
# half-space trace inequality
# ---------------------------------------------------------------------------

def _reference_level(w: ScalarField) -> float:
    return float(w.value(np.zeros((1, w.n)))[0])


def lhs_terms(w: ScalarField, spec: QuadratureSpec, center=None):
    """(log int e^w dmu_n - int w dmu_n, error, tail_verified).

    Both integrals are taken of w - w(0) so that adding a constant to w leaves
    the computation unchanged, and the exponential is integrated as
    expm1(.) against the probability measure mu_n so w = const gives 0.
    """
    n = w.n
    ok = _tail_ok(w, None if w.tail is None else n - max(w.tail.exp_rate, 0.0), n - 1, "int e^w dmu")
    if w.tail is not None:
        _tail_ok(w, n - max(w.tail.abs_rate, 0.0), n - 1, "int w dmu")
    supp = _support(w)
    ref = 0.0 if supp is not None else _reference_level(w)

    def fexp(xp):
        x = _on_boundary(xp)
        return np.expm1(w.value(x) - ref) * kernels.boundary_weight(xp, n)

    def flin(xp):
        x = _on_boundary(xp)
        return (w.value(x) - ref) * kernels.boundary_weight(xp, n)

    if supp is not None:
        a = _boundary(fexp, w, spec, "int (e^w - 1) dmu", center)
        m = _boundary(flin, w, spec, "int w dmu", center)
    else:
        bc = _project_center(center, n)[1]
        a = integrate_boundary(fexp, spec, n=n, center=bc)
        a.require("int (e^w - 1) dmu")
        m = integrate_boundary(flin, spec, n=n, center=bc)
        m.require("int w dmu")
    value = math.log1p(a.value) - m.value
    err = a.error_estimate / (1.0 + a.value) + m.error_estimate
    return value, err, ok


def onofri_lhs(w: ScalarField, spec: QuadratureSpec, center=None) -> float:
    return lhs_terms(w, spec, center)[0]


def kn_energy_detail(w: ScalarField, spec: QuadratureSpec, center=None) -> Integral:
    n = w.n
    ok = _tail_ok(w, _kernel_decay(w), n, "int K_n(x, grad w)")

    def f(x):
        return kernels.k_n(x, w.gradient(x))

    res = _interior(f, w, spec, "int K_n(x, grad w)", center)
    return Integral(res.value, res.error_estimate, ok)


def kn_energy(w: ScalarField, spec: QuadratureSpec, center=None) -> float:
    """int_{R^n_+} K_n(x, grad w) dx (without the constant alpha_n)."""
    return kn_energy_detail(w, spec, center).value


def deficit(w: ScalarField, spec: QuadratureSpec, center=None) -> DeficitReport:
    """alpha_n int K_n(x, grad w) - (log int e^w dmu - int w dmu)."""
    lhs, lhs_err, ok1 = lhs_terms(w, spec, center)
    kn = kn_energy_detail(w, spec, center)
    a = kernels.alpha_n(w.n)
    rhs = a * kn.value
    return DeficitReport(lhs, rhs, rhs - lhs, (lhs_err, a * kn.error), ok1 and kn.tail_verified)


def quotient_Q(w: ScalarField, spec: QuadratureSpec, center=None) -> float:
    lhs, lhs_err, _ = lhs_terms(w, spec, center)
    if lhs == 0.0 or abs(lhs) <= 10.0 * lhs_err:
        raise UndefinedQuotient(f"denominator {lhs:.3g} is not resolved (error {lhs_err:.3g})")
    return kn_energy(w, spec, center) / lhs


def weighted_norm(w: ScalarField, spec: QuadratureSpec, center=None):
    """(int |w| dmu_n, ||grad w||_{L^n}, (int |grad w|^2 |grad log mu_n|^{n-2})^{1/2})."""
    n = w.n
    if w.tail is not None:
        _tail_ok(w, n - max(w.tail.abs_rate, 0.0), n - 1, "int |w| dmu")
        _tail_ok(w, n * w.tail.grad_decay, n, "int |grad w|^n")
        _tail_ok(w, 2 * w.tail.grad_decay + n - 2, n, "cross term")

    def fabs(xp):
        return np.abs(w.value(_on_boundary(xp))) * kernels.boundary_weight(xp, n)

    def fgrad(x):
        g = w.gradient(x)
        return np.einsum("...i,...i->...", g, g) ** (n / 2.0)

    def fcross(x):
        g = w.gradient(x)
        X = kernels.x_field(x)
        return np.einsum("...i,...i->...", g, g) * np.einsum("...i,...i->...", X, X) ** ((n - 2) / 2.0)

    b1 = _boundary(fabs, w, spec, "int |w| dmu", center).value
    gn = _interior(fgrad, w, spec, "int |grad w|^n", center).value
    cross = _interior(fcross, w, spec, "cross term", center).value
    return b1, max(gn, 0.0) ** (1.0 / n), max(cross, 0.0) ** 0.5


def energy_exp_interior(w: ScalarField, spec: QuadratureSpec, center=None) -> float:
    """int e^{n w/(n-1)} mu_n^{n/(n-1)} dx."""
    n = w.n
    e = n / (n - 1.0)
    if w.tail is not None:
        _tail_ok(w, e * (n - w.tail.exp_rate), n, "int e^{nw/(n-1)} mu^{n/(n-1)}")

    def f(x):
        return np.exp(e * (w.value(x) + kernels.log_weight_mu_n(x)))

    return integrate_halfspace(f, spec, n=n, center=_project_center(center, n)[0]).require("exponential energy")


def finite_mass(u: ScalarField, spec: QuadratureSpec, center=None):
    """(int e^{n u/(n-1)} dx over the half-space, int e^u dx' over the boundary)."""
    n = u.n
    e = n / (n - 1.0)
    if u.tail is not None:
        _tail_ok(u, -e * u.tail.exp_rate, n, "interior mass")
        _tail_ok(u, -u.tail.exp_rate, n - 1, "boundary mass")
    ci, bpts = _project_center(center, n)
    interior = integrate_halfspace(lambda x: np.exp(e * u.value(x)), spec, n=n, center=ci)
    boundary = integrate_boundary(lambda xp: np.exp(u.value(_on_boundary(xp))), spec, n=n,
                                  center=bpts)
    return interior.require("interior mass"), boundary.require("boundary mass")


# ---------------------------------------------------------------------------
# full-space inequality
# ---------------------------------------------------------------------------

def fullspace_lhs_detail(w: ScalarField, spec: QuadratureSpec):
    n = w.n
    ok = True
    if w.tail is None:
        ok = False
    else:
        _tail_ok(w, n * n / (n - 1.0) - max(w.tail.exp_rate, 0.0), n, "int e^w dnu")
    ref = _reference_level(w)
    a = integrate_fullspace(lambda x: np.expm1(w.value(x) - ref) * kernels.weight_nu_n(x), spec, n=n)
    m = integrate_fullspace(lambda x: (w.value(x) - ref) * kernels.weight_nu_n(x), spec, n=n)
    a.require("int (e^w - 1) dnu")
    m.require("int w dnu")
    return math.log1p(a.value) - m.value, a.error_estimate + m.error_estimate, ok


def fullspace_lhs(w: ScalarField, spec: QuadratureSpec) -> float:
    return fullspace_lhs_detail(w, spec)[0]


def hn_energy(w: ScalarField, spec: QuadratureSpec) -> float:
    n = w.n
    if w.tail is not None:
        _tail_ok(w, _kernel_decay(w), n, "int H_n(x, grad w)")
    res = integrate_fullspace(lambda x: kernels.h_n(x, w.gradient(x)), spec, n=n)
    return res.require("int H_n(x, grad w)")


def fullspace_deficit(w: ScalarField, spec: QuadratureSpec) -> DeficitReport:
    lhs, lerr, ok = fullspace_lhs_detail(w, spec)
    n = w.n
    res = integrate_fullspace(lambda x: kernels.h_n(x, w.gradient(x)), spec, n=n)
    res.require("int H_n(x, grad w)")
    b = kernels.beta_n_fullspace(n)
    rhs = b * res.value
    return DeficitReport(lhs, rhs, rhs - lhs, (lerr, b * res.error_estimate), ok)


__all__ = [
    "ConvergenceError", "DeficitReport", "DivergenceError", "Integral", "UndefinedQuotient",
    "deficit", "energy_exp_interior", "finite_mass", "fullspace_deficit", "fullspace_lhs",
    "hn_energy", "kn_energy", "lhs_terms", "onofri_lhs", "quotient_Q", "weighted_norm",
]
