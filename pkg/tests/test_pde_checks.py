import math

import numpy as np
import pytest

import oracles
from onofri_trace import fixtures
from onofri_trace import kernels as K
from onofri_trace import pde_checks as P
from onofri_trace.extremals import (LiouvilleSolution, OnofriTraceExtremal, liouville_u, onofri_normalization,
                                    onofri_w, u_from_w)
from onofri_trace.fields import ScalarField, shift
from onofri_trace.quadrature import default_spec
from onofri_trace.sampling import sample_boundary, sample_halfspace


def _pts(n, m=1000, seed=0):
    return sample_halfspace(n, m, seed=seed, scale=4.0, t_min=1e-3)


# ---- interior ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_interior_closed_form(n):
    r = P.interior_residual_closed(LiouvilleSolution(n, 1.3, np.full(n - 1, 0.2)), _pts(n))
    assert r.n_samples == 1000
    assert r.max_abs < 1e-12
    assert r.max_abs >= r.mean_abs >= 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_interior_fd_second_order(n):
    p = LiouvilleSolution(n, 1.0)
    x = _pts(n, 200)
    e1 = P.interior_residual_fd(p, x, h=2e-2).max_abs
    e2 = P.interior_residual_fd(p, x, h=1e-2).max_abs
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)
    assert P.interior_residual_fd(p, x, h=1e-4).max_abs < 1e-5


def test_planar_five_point_laplacian():
    u = liouville_u(LiouvilleSolution(2, 1.0))
    x = _pts(2, 500)
    r1 = P.laplacian_5pt(u, x, h=1e-2).max_abs
    r2 = P.laplacian_5pt(u, x, h=5e-3).max_abs
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)
    # negative control: the five-point stencil sees the Laplacian of |x|^2 (= 4)
    quad = ScalarField(2, lambda x: np.sum(np.asarray(x) ** 2, axis=-1), lambda x: 2 * np.asarray(x))
    assert P.laplacian_5pt(quad, x).max_abs == pytest.approx(4.0, rel=1e-6)


def test_interior_negative_control():
    n = 3
    p = LiouvilleSolution(n, 1.0)
    u = liouville_u(p)
    eps = 1e-3
    pert = ScalarField(n, lambda x: u.value(x) + eps * np.sum(x * x, axis=-1),
                       lambda x: u.gradient(x) + 2 * eps * x,
                       lambda x: u.hessian(x) + 2 * eps * np.eye(n))
    assert P.interior_residual_field(u, _pts(n)).max_abs < 1e-12
    assert P.interior_residual_field(pert, _pts(n)).max_abs > 1e-6


# ---- Neumann ------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_neumann(n):
    r = P.neumann_residual(LiouvilleSolution(n, 1.0), sample_boundary(n, 1000, seed=1))
    assert r.max_abs < 1e-12


def test_neumann_far_points():
    for n in (2, 3):
        xb = sample_boundary(n, 100, seed=2, scale=1.0)
        xb[:, :-1] *= 1e6 / np.linalg.norm(xb[:, :-1], axis=1, keepdims=True)
        assert P.neumann_residual(LiouvilleSolution(n, 1.0), xb).max_abs < 1e-12


def test_neumann_negative_control():
    n = 3
    u = liouville_u(LiouvilleSolution(n, 1.0))
    xb = sample_boundary(n, 200, seed=3, scale=1.0)
    c = 0.2
    r = P.neumann_residual_field(shift(u, c), xb)
    ref = np.abs(math.exp(c) - 1) * np.exp(u.value(xb))
    assert r.max_abs == pytest.approx(ref.max(), rel=1e-12)
    assert P.neumann_residual_field(u, xb).max_abs < 1e-12


def test_boundary_points_must_be_on_boundary():
    with pytest.raises(ValueError):
        P.neumann_residual(LiouvilleSolution(2, 1.0), np.array([[0.0, 0.5]]))


# ---- Euler-Lagrange in the w picture -----------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_el_residual_matches_liouville(n):
    p = OnofriTraceExtremal(n, 1.7, np.full(n - 1, 0.3), onofri_normalization(n))
    x, xb = _pts(n, 300), sample_boundary(n, 300, seed=4)
    inner, bnd = P.el_residual_w(p, x, xb)
    assert inner.max_abs < 1e-12 and bnd.max_abs < 1e-12
    # transformation identity: the same field through u = log mu + w
    u = u_from_w(onofri_w(p))
    assert P.neumann_residual_field(u, xb).max_abs < 1e-12


def test_el_boundary_planar_lambda3():
    p = OnofriTraceExtremal(2, 3.0, None, onofri_normalization(2))
    _, bnd = P.el_residual_w(p, _pts(2, 10), sample_boundary(2, 1000, seed=5))
    assert bnd.max_abs < 1e-12


def test_el_other_normalisations():
    # any c_tilde works with the multiplier L = 1 / int e^w dmu = e^{-c_tilde}
    n = 2
    xb = sample_boundary(n, 200, seed=6)
    for c in (0.0, 0.8, -1.5):
        _, ok = P.el_residual_w(OnofriTraceExtremal(n, 2.0, None, c), _pts(n, 10), xb)
        assert ok.max_abs < 1e-12
    # the unscaled identity flux = e^w mu_n (the multiplier of the normalized field)
    # holds at the normalizing c_tilde and fails for c_tilde = 0
    L_norm = math.exp(-onofri_normalization(n))
    _, good = P.el_residual_w(OnofriTraceExtremal(n, 2.0, None, onofri_normalization(n)), _pts(n, 10), xb,
                              L=L_norm)
    assert good.max_abs < 1e-12
    _, bad = P.el_residual_w(OnofriTraceExtremal(n, 2.0, None, 0.0), _pts(n, 10), xb, L=L_norm)
    assert bad.max_abs > 1e-2


# ---- Pohozaev, flux, mass ----------------------------------------------------------------

def test_pohozaev_examples():
    assert abs(P.pohozaev_check(LiouvilleSolution(2, 1.0), 5.0, [0.0, 0.0], default_spec(2))[2]) < 1e-6
    assert abs(P.pohozaev_check(LiouvilleSolution(3, 1.0), 2.0, [1.0, 0.0, 0.0], default_spec(3))[2]) < 1e-5


def test_pohozaev_y_independence():
    p = LiouvilleSolution(2, 1.0)
    g0 = P.pohozaev_check(p, 5.0, [0.0, 0.0], default_spec(2))[2]
    g1 = P.pohozaev_check(p, 5.0, [10.0, 0.0], default_spec(2))[2]
    assert abs(g0) < 1e-10 and abs(g1) < 1e-10


def test_pohozaev_terms_are_nontrivial():
    # the identity is a balance of sizeable terms, not three zeros
    terms, err = P.pohozaev_terms(LiouvilleSolution(3, 1.0), 3.0, [0.5, 0.0, 0.2], default_spec(3))
    assert max(abs(v) for v in terms.values()) > 1.0
    assert err < 1e-6


def test_pohozaev_gap_tracks_error_estimate():
    p = LiouvilleSolution(3, 0.7, [0.4, -0.3])
    for tol in (1e-4, 1e-6, 1e-9):
        spec = default_spec(3).with_(rel_tol=tol, abs_tol=tol * 1e-2)
        terms, err = P.pohozaev_terms(p, 4.0, [0.2, 0.1, 0.3], spec)
        gap = math.fsum(terms.values())
        assert abs(gap) <= 10 * err + 1e-13


def test_pohozaev_shape_error():
    with pytest.raises(ValueError):
        P.pohozaev_check(LiouvilleSolution(3, 1.0), 2.0, [0.0, 0.0], default_spec(3))


def test_pohozaev_translation_invariance():
    s = np.array([3.0, -1.0])
    a = P.pohozaev_check(LiouvilleSolution(3, 1.0), 3.0, [0.2, 0.0, 0.1], default_spec(3))[2]
    b = P.pohozaev_check(LiouvilleSolution(3, 1.0, s), 3.0, np.append(s + [0.2, 0.0], 0.1), default_spec(3))[2]
    assert abs(a) < 1e-9 and abs(b) < 1e-9


def test_flux_identity_planar():
    mass, flux = P.flux_identity(LiouvilleSolution(2, 1.0), 10.0, default_spec(2))
    assert abs(mass - flux) < 1e-8


@pytest.mark.parametrize("n,lam", [(2, 1.0), (3, 2.0)])
def test_flux_identity_finite_radius_closed_form(n, lam):
    # for x0' = 0 the truncated boundary mass has a closed form;
    # n = 3: 18 pi (1 - lam / sqrt(R^2 + lam^2)); n = 2: 4 arctan(R / lam)
    R = 50.0
    mass, flux = P.flux_identity(LiouvilleSolution(n, lam), R, default_spec(n))
    exact = 4 * math.atan(R / lam) if n == 2 else 18 * math.pi * (1 - lam / math.hypot(R, lam))
    assert mass == pytest.approx(exact, rel=1e-10)
    assert flux == pytest.approx(exact, rel=1e-10)
    # the limit is approached like 1/R
    limit = P.boundary_mass_exact(n)
    slope = 18 * math.pi * lam if n == 3 else 4 * lam
    assert (limit - flux) * R == pytest.approx(slope, rel=2e-3)


@pytest.mark.xfail(strict=True, reason="at R = 50 the truncation gap is 18 pi lam / sqrt(R^2 + lam^2), about 4%")
def test_flux_identity_within_one_percent_of_limit():
    _, flux = P.flux_identity(LiouvilleSolution(3, 2.0), 50.0, default_spec(3))
    assert abs(flux - 18 * math.pi) <= 0.01 * 18 * math.pi


def test_beta_from_mass():
    assert P.beta_from_mass(2 * math.pi, 2) == pytest.approx(2.0, rel=1e-15)
    assert P.beta_from_mass(18 * math.pi, 3) == pytest.approx(3.0, rel=1e-15)
    for n in range(2, 7):
        assert P.beta_from_mass(n ** n * K.omega(n) / 2, n) == pytest.approx(n, rel=1e-14)
    with pytest.raises(ValueError):
        P.beta_from_mass(0.0, 2)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("shifted", [False, True])
def test_beta_recovered_from_quadrature_mass(n, lam, shifted):
    from onofri_trace.functionals import finite_mass
    p = LiouvilleSolution(n, lam, np.ones(n - 1) if shifted else None)
    _, mass = finite_mass(liouville_u(p), default_spec(n, lam), center=p.center)
    assert mass == pytest.approx(P.boundary_mass_exact(n), rel=1e-6)
    assert abs(P.beta_from_mass(mass, n) - n) < 1e-6


# ---- stress tensor and auxiliary v -----------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_stress_tensor_vanishes(n):
    p = LiouvilleSolution(n, 0.8, np.full(n - 1, -0.4))
    x = sample_halfspace(n, 100, seed=7, scale=3.0)
    E = P.stress_tensor_E(p, x)
    assert np.abs(E).max() < 1e-10
    assert np.array_equal(E, np.swapaxes(E, -1, -2)) or np.allclose(E, np.swapaxes(E, -1, -2), atol=1e-15)
    # trace identity: trace of the subtracted part is (|grad u|^n - |grad u|^n) = 0 like div a(grad u)
    g = liouville_u(p).gradient(x)
    s = np.sum(g * g, axis=-1)
    sub = s[:, None, None] ** ((n - 2) / 2) * g[:, :, None] * g[:, None, :] - s[:, None, None] ** (n / 2) / n * np.eye(n)
    assert np.abs(np.trace(sub, axis1=1, axis2=2)).max() < 1e-12 * np.max(s ** (n / 2))


def test_stress_tensor_negative_control():
    n = 3
    u = liouville_u(LiouvilleSolution(n, 1.0))
    x = sample_halfspace(n, 100, seed=8, scale=3.0)
    sizes = []
    for eps in (1e-2, 1e-3, 1e-4):
        pert = ScalarField(n, lambda z: u.value(z) + eps * np.sum(z * z, axis=-1),
                           lambda z: u.gradient(z) + 2 * eps * z,
                           lambda z: u.hessian(z) + 2 * eps * np.eye(n))
        sizes.append(np.abs(P.stress_tensor_field(pert, x)).max())
    assert sizes[-1] > 1e-8
    # O(eps): each factor-10 step shrinks the defect by about 10
    assert sizes[0] / sizes[1] == pytest.approx(10, rel=0.2)
    assert sizes[1] / sizes[2] == pytest.approx(10, rel=0.05)


@pytest.mark.parametrize("n", [2, 3])
def test_auxiliary_v(n):
    p = LiouvilleSolution(n, 1.5, np.full(n - 1, 0.5))
    x = sample_halfspace(n, 500, seed=9, scale=3.0)
    inner, bnd = P.auxiliary_v_check(p, x, sample_boundary(n, 500, seed=10))
    assert bnd.max_abs < 1e-13
    assert inner.max_abs < 1e-10
    v = P.auxiliary_v(p)
    assert np.all(v.value(x) > 0)
    # closed form against u: v = e^{-u/(n-1)}
    np.testing.assert_allclose(v.value(x), np.exp(-liouville_u(p).value(x) / (n - 1)), rtol=1e-13)


# ---- second-order integrability (reported) ------------------------------------------------

def test_second_order_ratio_against_oracle():
    spec = default_spec(2).with_(rel_tol=1e-10, abs_tol=1e-13)
    got = P.second_order_ratio(LiouvilleSolution(2, 1.0), 1.0, [2.0, 8.0], spec)
    assert got[0] == pytest.approx(oracles.second_order_ratio_n2(2.0), rel=1e-8)
    assert got[1] == pytest.approx(fixtures.value("second_order_ratio.n2.gamma1.R8"), rel=1e-6)


def test_second_order_ratio_bounded():
    # only boundedness of the scaled sequence is claimed; it converges to a finite limit
    vals = [fixtures.value(f"second_order_ratio.n2.gamma1.R{R}") for R in (2, 4, 8, 16)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    incr = [b - a for a, b in zip(vals, vals[1:])]
    assert all(d2 < d1 for d1, d2 in zip(incr, incr[1:]))
