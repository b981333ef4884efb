"""ScalarField evaluation contract plus a few generic test-field builders.

A field is a pair of vectorized callables (value, gradient) acting on point
arrays of shape (..., n).  Tail metadata describes the behaviour at infinity
and is what the functionals use to decide integrability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class Tail:
    """Power-law behaviour of a field w at infinity.

    exp_rate:   e^w = O(|x|^exp_rate)          (inf for faster-than-log growth)
    abs_rate:   |w| = O(|x|^abs_rate), up to log factors (0 for log growth)
    grad_decay: |grad w| = O(|x|^-grad_decay)
    """
    exp_rate: float = 0.0
    abs_rate: float = 0.0
    grad_decay: float = 1.0
    support_radius: Optional[float] = None


COMPACT = Tail(exp_rate=0.0, abs_rate=-math.inf, grad_decay=math.inf)


@dataclass(frozen=True)
class ScalarField:
    n: int
    value: Callable
    gradient: Callable
    hessian: Optional[Callable] = None
    tail: Optional[Tail] = None
    scale: float = 1.0          # length scale, sets the compactification radius
    name: str = "field"

    def __call__(self, x):
        return self.value(x)

    def with_tail(self, tail: Optional[Tail]) -> "ScalarField":
        return replace(self, tail=tail)


def _pts(x):
    return np.asarray(x, dtype=float)


def constant(n: int, c: float = 0.0) -> ScalarField:
    def value(x):
        x = _pts(x)
        return np.full(x.shape[:-1], float(c))

    def gradient(x):
        return np.zeros_like(_pts(x))

    def hessian(x):
        x = _pts(x)
        return np.zeros(x.shape + (n,))

    return ScalarField(n, value, gradient, hessian, COMPACT, 1.0, f"const({c})")


def gaussian_bump(n: int, center=None, width: float = 1.0, amplitude: float = 1.0) -> ScalarField:
    """amplitude * exp(-|x - center|^2 / width^2)."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    s2 = float(width) ** 2

    def value(x):
        z = _pts(x) - c
        return amplitude * np.exp(-np.einsum("...i,...i->...", z, z) / s2)

    def gradient(x):
        z = _pts(x) - c
        g = amplitude * np.exp(-np.einsum("...i,...i->...", z, z) / s2)
        return (-2.0 / s2) * g[..., None] * z

    def hessian(x):
        z = _pts(x) - c
        g = amplitude * np.exp(-np.einsum("...i,...i->...", z, z) / s2)
        outer = z[..., :, None] * z[..., None, :]
        return g[..., None, None] * (4.0 / s2 ** 2 * outer - 2.0 / s2 * np.eye(n))

    # decays faster than any power
    tail = Tail(exp_rate=0.0, abs_rate=-math.inf, grad_decay=math.inf)
    return ScalarField(n, value, gradient, hessian, tail, max(1.0, float(np.linalg.norm(c)) + width),
                       f"gauss(c={c.tolist()},s={width},a={amplitude})")


def tilted_bump(n: int, center=None, width: float = 1.0, amplitude: float = 1.0,
                tilt=None) -> ScalarField:
    """Gaussian bump multiplied by (1 + tilt.(x - center))."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    b = np.zeros(n) if tilt is None else np.asarray(tilt, dtype=float)
    base = gaussian_bump(n, c, width, amplitude)

    def value(x):
        z = _pts(x) - c
        return base.value(x) * (1.0 + z @ b)

    def gradient(x):
        z = _pts(x) - c
        return base.gradient(x) * (1.0 + z @ b)[..., None] + base.value(x)[..., None] * b

    return ScalarField(n, value, gradient, None, base.tail, base.scale,
                       f"tilted({base.name},b={b.tolist()})")


def compact_bump(n: int, center=None, radius: float = 1.0, amplitude: float = 1.0) -> ScalarField:
    """Smooth compactly supported bump amplitude*exp(1 - 1/(1 - |x-c|^2/radius^2))."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    rho2 = float(radius) ** 2

    def _parts(x):
        z = _pts(x) - c
        s = np.einsum("...i,...i->...", z, z) / rho2
        inside = s < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            d = np.where(inside, 1.0 - s, 1.0)
            g = np.where(inside, amplitude * np.exp(1.0 - 1.0 / d), 0.0)
        return z, d, g

    def value(x):
        return _parts(x)[2]

    def gradient(x):
        z, d, g = _parts(x)
        # d/dx exp(1 - 1/(1-s)) = -exp(..) / (1-s)^2 * 2z/rho^2
        return (-2.0 / rho2) * (g / d ** 2)[..., None] * z

    tail = Tail(exp_rate=0.0, abs_rate=-math.inf, grad_decay=math.inf,
                support_radius=float(np.linalg.norm(c)) + radius)
    return ScalarField(n, value, gradient, None, tail, max(1.0, float(radius)),
                       f"cbump(c={c.tolist()},r={radius},a={amplitude})")


def linear_growth(n: int, slope: float = 1.0) -> ScalarField:
    """slope * |x|; a field whose exponential is not integrable."""
    def value(x):
        x = _pts(x)
        return slope * np.sqrt(np.einsum("...i,...i->...", x, x))

    def gradient(x):
        x = _pts(x)
        r = np.sqrt(np.einsum("...i,...i->...", x, x))
        with np.errstate(divide="ignore", invalid="ignore"):
            return slope * np.where(r[..., None] > 0, x / r[..., None], 0.0)

    tail = Tail(exp_rate=math.inf if slope > 0 else 0.0, abs_rate=1.0, grad_decay=0.0)
    return ScalarField(n, value, gradient, None, tail, 1.0, f"linear({slope})")


def _combine_tails(a: Optional[Tail], b: Optional[Tail]) -> Optional[Tail]:
    if a is None or b is None:
        return None
    sr = None
    if a.support_radius is not None and b.support_radius is not None:
        sr = max(a.support_radius, b.support_radius)
    return Tail(exp_rate=a.exp_rate + b.exp_rate,
                abs_rate=max(a.abs_rate, b.abs_rate),
                grad_decay=min(a.grad_decay, b.grad_decay),
                support_radius=sr)


def add(f: ScalarField, g: ScalarField, weight: float = 1.0) -> ScalarField:
    """f + weight * g."""
    if f.n != g.n:
        raise ValueError("dimension mismatch")
    hess = None
    if f.hessian is not None and g.hessian is not None:
        def hess(x):
            return f.hessian(x) + weight * g.hessian(x)
    tail = _combine_tails(f.tail, scale(g, weight).tail)
    return ScalarField(f.n, lambda x: f.value(x) + weight * g.value(x),
                       lambda x: f.gradient(x) + weight * g.gradient(x), hess, tail,
                       max(f.scale, g.scale), f"({f.name})+{weight}*({g.name})")


def shift(f: ScalarField, c: float) -> ScalarField:
    """f + c for a constant c."""
    return ScalarField(f.n, lambda x: f.value(x) + c, f.gradient, f.hessian, f.tail, f.scale,
                       f"({f.name})+{c}")


def scale(f: ScalarField, c: float) -> ScalarField:
    tail = f.tail
    if tail is not None:
        if c >= 0:
            tail = replace(tail, exp_rate=c * tail.exp_rate if c > 0 else 0.0)
        elif tail.abs_rate < 0:
            # bounded field: e^{c w} stays bounded too
            tail = replace(tail, exp_rate=0.0)
        else:
            tail = None
    hess = None if f.hessian is None else (lambda x: c * f.hessian(x))
    return ScalarField(f.n, lambda x: c * f.value(x), lambda x: c * f.gradient(x), hess, tail,
                       f.scale, f"{c}*({f.name})")


def fd_gradient(value: Callable, x, h: float = 1e-5):
    """Central-difference gradient, used as a test oracle only."""
    x = _pts(x)
    n = x.shape[-1]
    out = np.empty_like(x)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[..., i] = (value(x + e) - value(x - e)) / (2.0 * h)
    return out
