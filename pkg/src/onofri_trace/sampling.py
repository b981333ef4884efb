"""Seeded sample sets: half-space points, boundary points, hemisphere directions."""
from __future__ import annotations

import math

import numpy as np


def sample_halfspace(n: int, m: int, seed: int = 0, scale: float = 5.0, t_min: float = 0.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=scale, size=(m, n))
    x[:, -1] = np.abs(x[:, -1]) + t_min
    return x


def sample_boundary(n: int, m: int, seed: int = 0, scale: float = 5.0):
    """Boundary points as (m, n) arrays with t = 0."""
    rng = np.random.default_rng(seed)
    x = np.zeros((m, n))
    x[:, :-1] = rng.normal(scale=scale, size=(m, n - 1))
    return x


def hemisphere_directions(n: int, m: int = 256, seed: int = 0):
    """Deterministic unit vectors with last coordinate >= 0, boundary directions included.

    n = 2: equally spaced angles on [0, pi].  n = 3: a Fibonacci spiral on the
    upper cap plus an equatorial ring.  n >= 4: seeded Gaussian directions
    folded into the upper half plus coordinate directions on the boundary.
    """
    if n == 2:
        th = np.linspace(0.0, math.pi, m)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n == 3:
        ring = max(8, int(math.sqrt(m)))
        k = np.arange(m - ring)
        z = (k + 0.5) / (m - ring)
        golden = math.pi * (3.0 - math.sqrt(5.0))
        ang = golden * k
        rxy = np.sqrt(1.0 - z * z)
        cap = np.stack([rxy * np.cos(ang), rxy * np.sin(ang), z], axis=1)
        phi = np.linspace(0.0, 2 * math.pi, ring, endpoint=False)
        eq = np.stack([np.cos(phi), np.sin(phi), np.zeros(ring)], axis=1)
        return np.concatenate([cap, eq])
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(m, n))
    d[:, -1] = np.abs(d[:, -1])
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    axes = np.zeros((2 * (n - 1), n))
    for i in range(n - 1):
        axes[2 * i, i] = 1.0
        axes[2 * i + 1, i] = -1.0
    return np.concatenate([d, axes])


def seeded_test_fields(n: int, count: int = 20, seed: int = 0):
    """Deterministic admissible test fields: Gaussian, tilted and compact bumps
    and extremals with a bump added, parameters drawn from one seeded stream."""
    from .extremals import OnofriTraceExtremal, onofri_w
    from .fields import add, compact_bump, gaussian_bump, tilted_bump

    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        kind = i % 4
        c = rng.normal(scale=1.0, size=n)
        c[-1] = abs(c[-1]) * 0.5
        width = float(rng.uniform(0.5, 2.0))
        amp = float(rng.uniform(-2.0, 2.0))
        if kind == 0:
            f = gaussian_bump(n, c, width, amp)
        elif kind == 1:
            f = tilted_bump(n, c, width, amp, rng.normal(scale=0.5, size=n))
        elif kind == 2:
            c[-1] = 0.0
            f = compact_bump(n, c, width, amp)
        else:
            lam = float(rng.uniform(0.5, 2.0))
            x0p = rng.normal(scale=0.5, size=n - 1)
            f = add(onofri_w(OnofriTraceExtremal(n, lam, x0p)), gaussian_bump(n, c, width, 0.5 * amp))
        out.append(f)
    return out
