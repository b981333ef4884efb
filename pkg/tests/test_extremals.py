import math

import numpy as np
import pytest
from scipy import integrate

from onofri_trace import kernels as K
from onofri_trace.extremals import (FullSpaceLiouville, LiouvilleSolution, OnofriTraceExtremal,
                                    SobolevTraceExtremal, fullspace_u, h_gradient_parts, liouville_flux,
                                    liouville_flux_jacobian, liouville_u, onofri_normalization, onofri_w,
                                    perturbed_h, sobolev_delta, sobolev_u_star, u_from_w, w_from_u)
from onofri_trace.fields import constant, fd_gradient, gaussian_bump
from onofri_trace.sampling import sample_boundary, sample_halfspace


def _bounded_points(n, m=1000, seed=0):
    return sample_halfspace(n, m, seed=seed, scale=3.0)


def _fd_check(field, pts, h=1e-5, tol=1e-6):
    fd = fd_gradient(field.value, pts, h)
    g = field.gradient(pts)
    err = np.linalg.norm(fd - g, axis=-1) / np.maximum(np.linalg.norm(g, axis=-1), 1e-3)
    assert err.max() < tol


# ---- onofri_w -------------------------------------------------------------------

def test_w_unit_family_is_zero():
    for n in (2, 3, 4):
        w = onofri_w(OnofriTraceExtremal(n, 1.0))
        assert np.all(w.value(_bounded_points(n, 200)) == 0.0)
        w5 = onofri_w(OnofriTraceExtremal(n, 1.0, c_tilde=5.0))
        np.testing.assert_allclose(w5.value(_bounded_points(n, 200)), 5.0, rtol=1e-15)


def test_w_plug_in():
    w = onofri_w(OnofriTraceExtremal(2, 2.0))
    assert w.value(np.array([0.0, 0.0])) == pytest.approx(math.log(0.5), rel=1e-15)


def test_w_limit_at_infinity():
    p = OnofriTraceExtremal(3, 2.5, [0.4, -1.0], c_tilde=0.7)
    w = onofri_w(p)
    d = np.array([[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.0, 0.0, 1.0]])
    assert np.max(np.abs(w.value(1e4 * d) - 0.7 - math.log(2.5))) < 1e-3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_w_gradient_fd(n):
    p = OnofriTraceExtremal(n, 1.7, np.full(n - 1, 0.3), 0.2)
    _fd_check(onofri_w(p), _bounded_points(n))


# ---- liouville ---------------------------------------------------------------------

def test_u_plug_in_and_gradient():
    u = liouville_u(LiouvilleSolution(2, 1.0))
    assert u.value(np.array([0.0, 0.0])) == pytest.approx(math.log(2.0), rel=1e-15)
    np.testing.assert_allclose(u.gradient(np.array([0.0, 0.0])), [0.0, -2.0], atol=1e-15)


def test_u_log_identity(rng):
    for n in (2, 3, 4):
        p = LiouvilleSolution(n, 0.8, rng.normal(size=n - 1))
        x = _bounded_points(n, 300)
        z = x - p.center
        lhs = liouville_u(p).value(x) + n * np.log(np.linalg.norm(z, axis=1))
        np.testing.assert_allclose(lhs, math.log(n ** (n - 1) * 0.8), rtol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_u_gradient_fd(n):
    p = LiouvilleSolution(n, 0.6, np.full(n - 1, -0.5))
    _fd_check(liouville_u(p), _bounded_points(n))


def test_flux_closed_form():
    p = LiouvilleSolution(2, 1.0)
    np.testing.assert_allclose(liouville_flux(p, np.array([0.0, 0.0])), [0.0, -2.0], atol=1e-15)
    for n in (2, 3, 4):
        p = LiouvilleSolution(n, 1.3, np.full(n - 1, 0.2))
        x = _bounded_points(n, 200)
        z = x - p.center
        r = np.linalg.norm(z, axis=1)
        np.testing.assert_allclose(np.linalg.norm(liouville_flux(p, x), axis=1), n ** (n - 1) / r ** (n - 1),
                                   rtol=1e-13)
        g = liouville_u(p).gradient(x)
        np.testing.assert_allclose(liouville_flux(p, x), K.flux_a(g), rtol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_flux_normal_component_is_minus_exp_u(n):
    p = LiouvilleSolution(n, 0.9, np.full(n - 1, 0.4))
    xb = sample_boundary(n, 1000, seed=3)
    got = liouville_flux(p, xb)[:, -1]
    ref = -np.exp(liouville_u(p).value(xb))
    assert np.max(np.abs(got - ref)) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_flux_jacobian(n):
    p = LiouvilleSolution(n, 1.1, np.full(n - 1, 0.1))
    x = _bounded_points(n, 1000)
    J = liouville_flux_jacobian(p, x)
    scale = np.abs(J).max(axis=(1, 2))
    assert np.all(np.abs(np.trace(J, axis1=1, axis2=2)) <= 1e-13 * scale + 1e-300)
    assert np.array_equal(J, np.swapaxes(J, 1, 2)) or np.allclose(J, np.swapaxes(J, 1, 2), rtol=1e-15)
    h = 1e-5
    fd = np.empty_like(J)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fd[:, :, j] = (liouville_flux(p, x + e) - liouville_flux(p, x - e)) / (2 * h)
    err = np.abs(fd - J).max(axis=(1, 2)) / scale
    assert err.max() < 1e-6


# ---- full space -------------------------------------------------------------------

def test_fullspace_u_value_and_max():
    u = fullspace_u(FullSpaceLiouville(2, 1.0))
    assert u.value(np.zeros(2)) == pytest.approx(math.log(8.0), rel=1e-15)
    p = FullSpaceLiouville(3, 2.0, np.array([0.5, -1.0, 0.2]))
    u = fullspace_u(p)
    top = u.value(p.x0)
    rng = np.random.default_rng(1)
    pts = p.x0 + rng.normal(scale=2.0, size=(500, 3))
    assert np.all(u.value(pts) < top)
    _fd_check(u, pts)


def test_fullspace_mass_planar():
    u = fullspace_u(FullSpaceLiouville(2, 1.0))
    ref, _ = integrate.quad(lambda r: 8.0 / (1 + r * r) ** 2 * 2 * math.pi * r, 0, np.inf, epsabs=1e-13)
    assert ref == pytest.approx(8 * math.pi, rel=1e-12)
    from onofri_trace.quadrature import default_spec, integrate_fullspace
    got = integrate_fullspace(lambda x: np.exp(u.value(x)), default_spec(2), n=2)
    assert got.value == pytest.approx(8 * math.pi, rel=1e-8)


# ---- Sobolev extremal ----------------------------------------------------------------

def test_u_star_values():
    assert sobolev_u_star(SobolevTraceExtremal(3, 2.0)).value(np.zeros(3)) == pytest.approx(1.0)
    assert sobolev_u_star(SobolevTraceExtremal(3, 2.0)).value(np.array([0, 0, 1.0])) == pytest.approx(0.5)
    with pytest.raises(K.DomainError):
        SobolevTraceExtremal(3, 3.0)


@pytest.mark.parametrize("n,p", [(3, 2.0), (3, 2.7), (4, 1.6)])
def test_u_star_gradient_power(n, p):
    us = sobolev_u_star(SobolevTraceExtremal(n, p))
    x = _bounded_points(n, 200)
    g = us.gradient(x)
    q = (1 + x[:, -1]) ** 2 + np.sum(x[:, :-1] ** 2, axis=1)
    ref = ((n - p) / (p - 1)) ** p * q ** (-p * (n - 1) / (2 * (p - 1)))
    np.testing.assert_allclose(np.linalg.norm(g, axis=1) ** p, ref, rtol=1e-12)
    _fd_check(us, x)


def test_u_star_general_lambda_is_rescaled_translate():
    n, p, lam = 3, 2.0, 2.0
    x0 = np.array([0.5, -0.3])
    us = sobolev_u_star(SobolevTraceExtremal(n, p, lam, x0))
    x = _bounded_points(n, 50)
    q = np.sum((x[:, :-1] - x0) ** 2, axis=1) + (x[:, -1] + lam) ** 2
    ref = (lam ** (2 / p) / q) ** ((n - p) / (2 * (p - 1)))
    np.testing.assert_allclose(us.value(x), ref, rtol=1e-13)
    _fd_check(us, x)


# ---- transformations --------------------------------------------------------------------

def test_u_from_w_of_zero_is_log_mu():
    for n in (2, 3):
        u = u_from_w(constant(n, 0.0))
        x = _bounded_points(n, 100)
        np.testing.assert_allclose(u.value(x), np.log(K.weight_mu_n(x)), rtol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_normalized_w_maps_to_liouville(n):
    lam, x0 = 1.4, np.full(n - 1, 0.25)
    w = onofri_w(OnofriTraceExtremal(n, lam, x0, onofri_normalization(n)))
    u = liouville_u(LiouvilleSolution(n, lam, x0))
    x = _bounded_points(n, 1000)
    assert np.max(np.abs(u_from_w(w).value(x) - u.value(x))) < 1e-12
    np.testing.assert_allclose(u_from_w(w).gradient(x), u.gradient(x), rtol=1e-11, atol=1e-13)
    assert onofri_normalization(2) == pytest.approx(math.log(2 * math.pi), rel=1e-15)


def test_round_trip_and_gradient_shift(rng):
    n = 3
    w = gaussian_bump(n, [0.3, -0.2, 0.5], 1.2, 0.8)
    x = _bounded_points(n, 500)
    back = w_from_u(u_from_w(w))
    np.testing.assert_allclose(back.value(x), w.value(x), rtol=1e-13, atol=1e-14)
    u = u_from_w(w)
    np.testing.assert_allclose(u.gradient(x), K.x_field(x) + w.gradient(x), rtol=1e-13, atol=1e-15)
    _fd_check(u, x)


# ---- perturbed h ------------------------------------------------------------------------

def test_delta_and_h():
    assert sobolev_delta(3, 2.0) == pytest.approx(0.25, rel=1e-15)
    n, p = 3, 2.0
    us = sobolev_u_star(SobolevTraceExtremal(n, p))
    x = _bounded_points(n, 300)
    h0 = perturbed_h(constant(n, 0.0), p)
    np.testing.assert_allclose(h0.value(x), us.value(x), rtol=1e-15)
    w = gaussian_bump(n, [0.2, 0.1, 0.4], 1.0, 1.3)
    h = perturbed_h(w, p)
    d = sobolev_delta(n, p)
    xd, yd = h_gradient_parts(us, w, d, x)
    np.testing.assert_allclose(xd + yd, h.gradient(x), rtol=1e-13)
    _fd_check(h, x)
    with pytest.raises(K.DomainError):
        perturbed_h(w, 3.0)
