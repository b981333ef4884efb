"""Residuals and integral identities for the n-Laplace Liouville problem

    -div(|grad u|^{n-2} grad u) = 0 in R^n_+,   |grad u|^{n-2} d_t u = -e^u on t = 0,

and for the equivalent Euler-Lagrange system in the w = u - log mu_n picture.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .extremals import (LiouvilleSolution, OnofriTraceExtremal, _log_mu_hessian, liouville_flux,
                        liouville_flux_jacobian, liouville_u, onofri_w)
from .fields import ScalarField
from .quadrature import (QuadratureSpec, integrate_flat_disk, integrate_half_ball,
                         integrate_hemisphere)


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    mean_abs: float
    n_samples: int
    worst_point: tuple

    @staticmethod
    def from_values(res, points) -> "ResidualReport":
        res = np.abs(np.asarray(res, dtype=float)).reshape(len(points), -1).max(axis=1)
        i = int(np.argmax(res))
        return ResidualReport(float(res[i]), float(res.mean()), len(res),
                              tuple(float(v) for v in np.asarray(points)[i]))


def _as_boundary(points, n):
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] == n - 1:
        pts = np.concatenate([pts, np.zeros(pts.shape[:-1] + (1,))], axis=-1)
    if np.any(pts[..., -1] != 0.0):
        raise ValueError("boundary points must have t = 0")
    return pts


def n_laplacian(grad, hess):
    """div(|grad u|^{n-2} grad u) from a gradient and Hessian (chain rule)."""
    J = np.einsum("...ij,...jk->...ik", kernels.flux_derivative(grad), hess)
    return np.trace(J, axis1=-2, axis2=-1)


# ---------------------------------------------------------------------------
# pointwise residuals
# ---------------------------------------------------------------------------

def interior_residual_closed(params: LiouvilleSolution, points) -> ResidualReport:
    """Trace of the closed-form flux Jacobian at the sample points."""
    pts = np.asarray(points, dtype=float)
    J = liouville_flux_jacobian(params, pts)
    return ResidualReport.from_values(np.trace(J, axis1=-2, axis2=-1), pts)


def interior_residual_fd(params: LiouvilleSolution, points, h: float = 1e-4) -> ResidualReport:
    """Divergence of the closed-form flux by central differences (second opinion)."""
    pts = np.asarray(points, dtype=float)
    n = params.n
    div = np.zeros(len(pts))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        div += (liouville_flux(params, pts + e)[:, i] - liouville_flux(params, pts - e)[:, i]) / (2 * h)
    return ResidualReport.from_values(div, pts)


def interior_residual_field(u: ScalarField, points) -> ResidualReport:
    """n-Laplacian of an arbitrary field with an analytic Hessian."""
    pts = np.asarray(points, dtype=float)
    if u.hessian is None:
        raise ValueError(f"{u.name} carries no Hessian")
    return ResidualReport.from_values(n_laplacian(u.gradient(pts), u.hessian(pts)), pts)


def laplacian_5pt(u: ScalarField, points, h: float = 1e-3) -> ResidualReport:
    """Five-point Laplacian of a planar field (the n = 2 case)."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError("five-point stencil is planar")
    ex, et = np.array([h, 0.0]), np.array([0.0, h])
    lap = (u.value(pts + ex) + u.value(pts - ex) + u.value(pts + et) + u.value(pts - et)
           - 4.0 * u.value(pts)) / h ** 2
    return ResidualReport.from_values(lap, pts)


def neumann_residual(params: LiouvilleSolution, boundary_points) -> ResidualReport:
    """|grad u|^{n-2} d_t u + e^u at t = 0 from the closed-form flux."""
    pts = _as_boundary(boundary_points, params.n)
    u = liouville_u(params)
    res = liouville_flux(params, pts)[:, -1] + np.exp(u.value(pts))
    return ResidualReport.from_values(res, pts)


def neumann_residual_field(u: ScalarField, boundary_points) -> ResidualReport:
    pts = _as_boundary(boundary_points, u.n)
    res = kernels.flux_a(u.gradient(pts))[:, -1] + np.exp(u.value(pts))
    return ResidualReport.from_values(res, pts)


def el_residual_w(params: OnofriTraceExtremal, points, boundary_points,
                  L: Optional[float] = None):
    """Euler-Lagrange residuals in the w picture.

    Interior: div[a(X + grad w)] through closed-form Hessians of log mu_n and w.
    Boundary: a(X + grad w).(-e_t) - (n^{n-1} sigma_{n-1}/2) L e^w mu_n, where
    L = e^{-c_tilde} by default (L = 1 exactly when c_tilde is the
    normalizing constant).
    """
    n = params.n
    w = onofri_w(params)
    pts = np.asarray(points, dtype=float)
    xi = kernels.x_field(pts) + w.gradient(pts)
    hess = _log_mu_hessian(pts) + w.hessian(pts)
    interior = ResidualReport.from_values(n_laplacian(xi, hess), pts)

    if L is None:
        L = math.exp(-params.c_tilde)
    bpts = _as_boundary(boundary_points, n)
    xi_b = kernels.x_field(bpts) + w.gradient(bpts)
    flux_out = -kernels.flux_a(xi_b)[:, -1]
    target = 0.5 * n ** (n - 1) * kernels.sigma(n) * L * np.exp(w.value(bpts)) * kernels.weight_mu_n(bpts)
    boundary = ResidualReport.from_values(flux_out - target, bpts)
    return interior, boundary


# ---------------------------------------------------------------------------
# integral identities
# ---------------------------------------------------------------------------

def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def pohozaev_terms(params: LiouvilleSolution, R: float, y, spec: QuadratureSpec):
    """The three boundary contributions of the Pohozaev identity on B_R^+.

    hemisphere:  int <a(grad u), nu> <x - y, grad u>
    flat:        int_{Sigma_R} e^u <x - y, grad u> dx'
    gradient:    -(1/n) int_{d(B_R^+)} |grad u|^n <x - y, nu>, over both the
                 hemisphere and the flat part (where nu = -e_t).
    """
    n = params.n
    u = liouville_u(params)
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"y must have {n} components")

    def hemi_flux(x, nu):
        g = u.gradient(x)
        return _dot(kernels.flux_a(g), nu) * _dot(x - y, g)

    def hemi_grad(x, nu):
        g = u.gradient(x)
        return _dot(g, g) ** (n / 2.0) * _dot(x - y, nu)

    def flat_exp(xp):
        x = _as_boundary(xp, n)
        return np.exp(u.value(x)) * _dot(x - y, u.gradient(x))

    def flat_grad(xp):
        x = _as_boundary(xp, n)
        g = u.gradient(x)
        # <x - y, -e_t> = y_t on t = 0
        return _dot(g, g) ** (n / 2.0) * y[-1]

    r1 = integrate_hemisphere(hemi_flux, R, spec, n=n)
    r2 = integrate_flat_disk(flat_exp, R, spec, n=n)
    r3 = integrate_hemisphere(hemi_grad, R, spec, n=n)
    terms = {"hemisphere": r1.require("Pohozaev hemisphere term"),
             "flat": r2.require("Pohozaev flat term"),
             "gradient": -(r3.require("Pohozaev gradient term")) / n}
    err = r1.error_estimate + r2.error_estimate + r3.error_estimate / n
    if y[-1] != 0.0:
        r4 = integrate_flat_disk(flat_grad, R, spec, n=n)
        terms["gradient"] -= r4.require("Pohozaev flat gradient term") / n
        err += r4.error_estimate / n
    return terms, err


def pohozaev_check(params: LiouvilleSolution, R: float, y, spec: QuadratureSpec):
    """(lhs, rhs, gap): lhs is 0 for p = n and f = 0, rhs sums the boundary terms."""
    terms, _ = pohozaev_terms(params, R, y, spec)
    rhs = math.fsum(terms.values())
    lhs = 0.0
    return lhs, rhs, rhs - lhs


def flux_identity(params: LiouvilleSolution, R: float, spec: QuadratureSpec):
    """(int_{Sigma_R} e^u dx', int_{hemisphere} <a(grad u), -nu>)."""
    n = params.n
    u = liouville_u(params)
    mass = integrate_flat_disk(lambda xp: np.exp(u.value(_as_boundary(xp, n))), R, spec, n=n)
    flux = integrate_hemisphere(lambda x, nu: -_dot(liouville_flux(params, x), nu), R, spec, n=n)
    return mass.require("boundary mass on Sigma_R"), flux.require("hemisphere flux")


def beta_from_mass(boundary_mass: float, n: int) -> float:
    if not boundary_mass > 0:
        raise ValueError("boundary mass must be positive")
    return (2.0 * boundary_mass / (n * kernels.omega(n))) ** (1.0 / (n - 1))


def boundary_mass_exact(n: int) -> float:
    """n^n omega_n / 2."""
    return 0.5 * n ** n * kernels.omega(n)


# ---------------------------------------------------------------------------
# stress tensor and the auxiliary function v
# ---------------------------------------------------------------------------

def _stress(grad, jac):
    n = grad.shape[-1]
    s = _dot(grad, grad)
    outer = grad[..., :, None] * grad[..., None, :]
    target = s[..., None, None] ** ((n - 2) / 2.0) * outer - (s ** (n / 2.0) / n)[..., None, None] * np.eye(n)
    return jac - target


def stress_tensor_E(params: LiouvilleSolution, x):
    """E_ij = d_j(|grad u|^{n-2} u_i) - (|grad u|^{n-2} u_i u_j - |grad u|^n delta_ij / n)."""
    x = np.asarray(x, dtype=float)
    u = liouville_u(params)
    return _stress(u.gradient(x), liouville_flux_jacobian(params, x))


def stress_tensor_field(u: ScalarField, x):
    """Same tensor for any field with a Hessian (used for negative controls)."""
    x = np.asarray(x, dtype=float)
    g = u.gradient(x)
    jac = np.einsum("...ij,...jk->...ik", kernels.flux_derivative(g), u.hessian(x))
    return _stress(g, jac)


def auxiliary_v(params: LiouvilleSolution):
    """v = e^{-u/(n-1)} = |x - x0|^{n/(n-1)} / (n lam^{1/(n-1)}) with gradient and Hessian."""
    n, lam = params.n, params.lam
    x0 = params.center
    e = n / (n - 1.0)
    c = 1.0 / (n * lam ** (1.0 / (n - 1)))

    def value(x):
        z = np.asarray(x, dtype=float) - x0
        return c * _dot(z, z) ** (e / 2.0)

    def gradient(x):
        z = np.asarray(x, dtype=float) - x0
        return (c * e * _dot(z, z) ** (e / 2.0 - 1.0))[..., None] * z

    def hessian(x):
        z = np.asarray(x, dtype=float) - x0
        q = _dot(z, z)[..., None, None]
        outer = z[..., :, None] * z[..., None, :]
        return c * e * q ** (e / 2.0 - 1.0) * (np.eye(n) + (e - 2.0) * outer / q)

    return ScalarField(n, value, gradient, hessian, None, lam, f"v(n={n},lam={lam})")


def auxiliary_v_check(params: LiouvilleSolution, points, boundary_points):
    """(interior, boundary) residuals of
    Delta_n v = (n-1)|grad v|^n / v  and  |grad v|^{n-2} d_t v = (n-1)^{1-n}."""
    n = params.n
    v = auxiliary_v(params)
    pts = np.asarray(points, dtype=float)
    g = v.gradient(pts)
    lhs = n_laplacian(g, v.hessian(pts))
    rhs = (n - 1) * _dot(g, g) ** (n / 2.0) / v.value(pts)
    interior = ResidualReport.from_values(lhs - rhs, pts)
    bpts = _as_boundary(boundary_points, n)
    gb = v.gradient(bpts)
    boundary = ResidualReport.from_values(kernels.flux_a(gb)[:, -1] - float(n - 1) ** (1 - n), bpts)
    return interior, boundary


# ---------------------------------------------------------------------------
# second-order integrability (reported only)
# ---------------------------------------------------------------------------

def second_order_ratio(params: LiouvilleSolution, gamma: float, radii, spec: QuadratureSpec):
    """R^{(gamma+1) n} int_{B_2R^+ minus B_R^+} |grad a(grad u)|^2 e^{gamma u} dx per radius."""
    n = params.n
    u = liouville_u(params)

    def f(x):
        J = liouville_flux_jacobian(params, x)
        return np.einsum("...ij,...ij->...", J, J) * np.exp(gamma * u.value(x))

    out = []
    for R in radii:
        res = integrate_half_ball(f, 2.0 * R, spec, n=n, r_min=R)
        out.append(res.require("second-order integral") * R ** ((gamma + 1) * n))
    return out
