"""Pointwise formulas: convexity remainders, half-space/full-space kernels,
weights and the sharp constants.

Points are arrays of shape (..., n) with the last coordinate the normal
variable t >= 0.  Every function broadcasts over leading axes.
"""
from __future__ import annotations

import math

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of a formula."""


def _check_dim(n):
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n}")
    return int(n)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def gamma(x: float) -> float:
    return math.gamma(x)


def log_gamma(x: float) -> float:
    return math.lgamma(x)


def beta(a: float, b: float) -> float:
    """Euler Beta function B(a, b) for a, b > 0."""
    if a <= 0 or b <= 0:
        raise DomainError("beta needs positive arguments")
    if a + b < 150.0:
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def sigma(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    if n <= 0:
        raise DomainError("sigma needs n >= 1")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def omega(n: int) -> float:
    """Volume of the unit ball in R^n."""
    if n <= 0:
        raise DomainError("omega needs n >= 1")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def alpha_n(n: int) -> float:
    """Best constant of the half-space Onofri trace inequality, 2/(n^n sigma_{n-1})."""
    n = _check_dim(n)
    return 2.0 / (n ** n * sigma(n))


def beta_n_fullspace(n: int) -> float:
    n = _check_dim(n)
    return n ** (1 - n) * math.gamma(n / 2.0) / (2.0 * (n - 1) * math.pi ** (n / 2.0))


def _check_sobolev_p(n, p):
    n = _check_dim(n)
    if not (1.0 < p < n):
        raise DomainError(f"p must lie in (1, {n}), got {p}")
    return n


def _trace_beta_factor(n, p):
    # 1/2 sigma_{n-2} B((n-1)/2, (n-1)/(2(p-1)))
    # sigma(n - 1) is |S^{n-2}|
    return 0.5 * sigma(n - 1) * beta((n - 1) / 2.0, (n - 1) / (2.0 * (p - 1.0)))


def sobolev_trace_constant(n: int, p: float) -> float:
    """Sharp constant S(n, p) of the L^p Sobolev trace inequality."""
    n = _check_sobolev_p(n, p)
    first = ((n - p) / (p - 1.0)) ** ((p - 1.0) / p)
    return first * _trace_beta_factor(n, p) ** ((p - 1.0) / (p * (n - 1)))


def c0p(n: int, p: float) -> float:
    n = _check_sobolev_p(n, p)
    return _trace_beta_factor(n, p)


def c1p(n: int, p: float) -> float:
    n = _check_sobolev_p(n, p)
    return (p * (n - 1) / (p - 1.0)) ** (p - 1.0) * _trace_beta_factor(n, p)


def c0_limit(n: int) -> float:
    return 0.5 * sigma(n)


def c1_limit(n: int) -> float:
    return 0.5 * n ** (n - 1) * sigma(n)


# ---------------------------------------------------------------------------
# convexity remainder and kernels
# ---------------------------------------------------------------------------

_SERIES_CUT = 0.25
_SERIES_TERMS = 32


def _phi_remainder(q, m):
    """(1+q)^m - 1 - m q by its binomial series, for |q| < _SERIES_CUT."""
    q = np.asarray(q, dtype=float)
    coef = m * (m - 1.0) / 2.0
    acc = coef * q * q
    for k in range(3, _SERIES_TERMS):
        coef = coef * (m - k + 1.0) / k
        if coef == 0.0:
            break
        acc = acc + coef * q ** k
    return acc


def r_p(X, Y, p: float):
    """Convexity remainder |X+Y|^p - |X|^p - p|X|^{p-2} X.Y.

    Evaluated through the expansion around X so that small |Y|/|X| does not
    lose digits to cancellation.  At X = 0 the last term is taken as 0.
    """
    if p <= 1:
        raise DomainError("r_p needs p > 1")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != Y.shape[-1]:
        raise DomainError(f"dimension mismatch {X.shape[-1]} vs {Y.shape[-1]}")
    X, Y = np.broadcast_arrays(X, Y)
    a = np.einsum("...i,...i->...", X, X)
    yy = np.einsum("...i,...i->...", Y, Y)
    xy = np.einsum("...i,...i->...", X, Y)
    m = 0.5 * p
    a_arr = np.atleast_1d(a)
    yy_arr = np.atleast_1d(yy)
    xy_arr = np.atleast_1d(xy)
    out = np.empty_like(a_arr)
    zero = a_arr == 0.0
    out[zero] = yy_arr[zero] ** m
    nz = ~zero
    if np.any(nz):
        an = a_arr[nz]
        q = (2.0 * xy_arr[nz] + yy_arr[nz]) / an
        q = np.maximum(q, -1.0)
        near = np.abs(q) < _SERIES_CUT
        vals = np.empty_like(an)
        # |Y| small against |X|: expansion about X, no cancellation
        vals[near] = (an[near] ** m * _phi_remainder(q[near], m)
                      + m * an[near] ** (m - 1.0) * yy_arr[nz][near])
        # otherwise the definition itself is well conditioned; the last term is
        # written as |X|^{p-1} (X.Y/|X|) so that |X| -> 0 cannot overflow
        far = ~near
        s2 = np.atleast_1d(np.einsum("...i,...i->...", X + Y, X + Y))[nz][far]
        af = an[far]
        vals[far] = s2 ** m - af ** m - p * af ** (m - 0.5) * (xy_arr[nz][far] / np.sqrt(af))
        out[nz] = vals
    if np.ndim(a) == 0:
        return float(out[0])
    return out


def x_field(x):
    """Drift X = grad log mu_n = -n (x', 1+t) / ((1+t)^2 + |x'|^2)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    shifted = x.copy()
    shifted[..., -1] += 1.0
    q = np.einsum("...i,...i->...", shifted, shifted)
    return -n * shifted / q[..., None]


def k_n(x, y):
    """Half-space kernel K_n(x, y) = R_n(X(x), y)."""
    x = np.asarray(x, dtype=float)
    return r_p(x_field(x), y, x.shape[-1])


def fullspace_drift(y):
    """-n |y|^{-(n-2)/(n-1)} y / (1 + |y|^{n/(n-1)}), the first argument of H_n."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    r = np.sqrt(np.einsum("...i,...i->...", y, y))
    if n >= 3 and np.any(r == 0.0):
        raise DomainError("H_n is undefined at y = 0 for n >= 3")
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = -n * r ** (-(n - 2.0) / (n - 1.0)) / (1.0 + r ** (n / (n - 1.0)))
    if n == 2:
        pref = -2.0 / (1.0 + r * r)
    return pref[..., None] * y


def h_n(y, z):
    """Full-space kernel H_n(y, z)."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    n = y.shape[-1]
    return r_p(fullspace_drift(y), (n - 1.0) / n * z, n)


def weight_mu_n(x):
    """Boundary/interior weight 2 / (sigma_{n-1} ((1+t)^2 + |x'|^2)^{n/2})."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    q = np.einsum("...i,...i->...", x[..., :-1], x[..., :-1]) + (1.0 + x[..., -1]) ** 2
    return 2.0 / (sigma(n) * q ** (n / 2.0))


def log_weight_mu_n(x):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    q = np.einsum("...i,...i->...", x[..., :-1], x[..., :-1]) + (1.0 + x[..., -1]) ** 2
    return math.log(2.0 / sigma(n)) - 0.5 * n * np.log(q)


def boundary_weight(xp, n: int):
    """mu_n(x', 0) for boundary points xp of shape (..., n-1)."""
    xp = np.asarray(xp, dtype=float)
    q = 1.0 + np.einsum("...i,...i->...", xp, xp)
    return 2.0 / (sigma(n) * q ** (n / 2.0))


def weight_mu_tilde(x):
    """mu_{n+1} applied to the same (x', t): exponent (n+1)/2 and sigma_n."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    q = np.einsum("...i,...i->...", x[..., :-1], x[..., :-1]) + (1.0 + x[..., -1]) ** 2
    return 2.0 / (sigma(n + 1) * q ** ((n + 1) / 2.0))


def mu_tilde_sandwich_constants(n: int) -> tuple[float, float]:
    """(C1, C2) bracketing int_0^inf mu_{n+1}(x', t) dt against (1+|x'|^2)^{-n/2}."""
    n = _check_dim(n)
    # int_0^{pi/2} cos^{n-1}
    cos_int = 0.5 * beta(n / 2.0, 0.5)
    c2 = 2.0 / sigma(n + 1) * cos_int
    return 2.0 ** (-(n + 1) / 2.0) * c2, c2


def weight_nu_n(x):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    r = np.sqrt(np.einsum("...i,...i->...", x, x))
    return n / sigma(n) / (1.0 + r ** (n / (n - 1.0))) ** n


def regularized_flux_a_eps(x, eps: float):
    """(|x|^2 + eps^2)^{(n-2)/2} x; eps = 0 gives the n-Laplace flux |x|^{n-2} x."""
    if eps < 0:
        raise DomainError("eps must be >= 0")
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    s = np.einsum("...i,...i->...", x, x) + eps * eps
    return s[..., None] ** ((n - 2) / 2.0) * x


def flux_a(xi):
    xi = np.asarray(xi, dtype=float)
    return regularized_flux_a_eps(xi, 0.0)


def flux_derivative(xi):
    """Jacobian of xi -> |xi|^{n-2} xi: |xi|^{n-2} (I + (n-2) xi xi^T / |xi|^2)."""
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    s = np.einsum("...i,...i->...", xi, xi)
    eye = np.eye(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        outer = np.where(s[..., None, None] > 0,
                         xi[..., :, None] * xi[..., None, :] / s[..., None, None], 0.0)
    return s[..., None, None] ** ((n - 2) / 2.0) * (eye + (n - 2) * outer)


def fit_remainder_constant(n: int, m: int = 20000, seed: int = 0) -> float:
    """Empirical sup of R_n(X, Y) / (|Y|^n + |Y|^2 |X|^{n-2}) over seeded pairs.

    Reported as a lower estimate of the constant C(n); no value is asserted.
    Pairs are drawn with log-uniform length ratios so both regimes |Y| << |X|
    and |Y| >> |X| are visited.
    """
    n = _check_dim(n)
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(m, n))
    Y = rng.normal(size=(m, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    Y *= (10.0 ** rng.uniform(-4, 4, size=m) / np.linalg.norm(Y, axis=1))[:, None]
    ny = np.linalg.norm(Y, axis=1)
    ratio = r_p(X, Y, n) / (ny ** n + ny ** 2)
    return float(np.max(ratio))
