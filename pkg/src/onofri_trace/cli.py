"""Command-line front end: runs check suites and prints JSON or CSV reports.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or configuration
error, 3 quadrature did not converge.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

import numpy as np

from . import asymptotics as asy
from . import fixtures as fx
from . import functionals as fn
from . import kernels, limit_study, pde_checks
from .expr import ExpressionError, field_from_expression
from .extremals import (LiouvilleSolution, OnofriTraceExtremal, SobolevTraceExtremal, liouville_u,
                        onofri_normalization, onofri_w, sobolev_u_star)
from .fields import add, compact_bump, constant, gaussian_bump, tilted_bump
from .quadrature import ConvergenceError, default_spec
from .report import Report
from .sampling import (hemisphere_directions, sample_boundary, sample_halfspace, seeded_test_fields)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_QUAD = 0, 1, 2, 3

COMMANDS = ("constants", "verify-extremal", "deficit", "pde-check", "pohozaev", "mass", "asymptotics",
            "supersolution", "limit-study", "fullspace", "suite", "fixtures")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "constants"
    n: int = 2
    lam: float = 1.0
    x0_prime: List[float] = field(default_factory=lambda: [0.0])
    c_tilde: float = 0.0
    p: Optional[float] = None
    radii: List[float] = field(default_factory=lambda: [1e2, 1e3, 1e4, 1e5])
    rel_tol: Optional[float] = None
    abs_tol: Optional[float] = None
    max_evals: Optional[float] = None
    seed: int = 0
    output_format: str = "json"
    fixtures_path: Optional[str] = None
    field_expr: Optional[str] = None
    builtin: str = "gaussian"
    R: float = 10.0
    y: List[float] = field(default_factory=lambda: [0.0])
    gamma: float = 3.5
    delta: float = 0.3
    R1: float = 1e3
    eps: float = 0.5
    C1: Optional[float] = None
    k_max: int = 5
    threads: int = 1
    timing: bool = True
    table_out: Optional[str] = None
    action: str = "verify"

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n}")
        if not self.lam > 0:
            raise ConfigError("lambda must be positive")
        for name in ("rel_tol", "abs_tol", "max_evals"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        if self.output_format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.action not in ("verify", "pin"):
            raise ConfigError("fixtures action is verify or pin")
        return self

    def public(self) -> dict:
        """Config echoed in the report (threads and timing do not change results)."""
        d = asdict(self)
        d.pop("threads")
        d.pop("timing")
        return d


# -- config file ----------------------------------------------------------------

_ALIASES = {"lambda": "lam", "x0": "x0_prime", "format": "output_format", "fixtures": "fixtures_path",
            "field": "field_expr"}


def _coerce(name, text):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = str(kinds[name])
    text = text.strip()
    if "List" in kind:
        return [float(v) for v in text.replace(",", " ").split()]
    if kind in ("int",):
        return int(text)
    if kind == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: not a boolean: {text!r}")
    if "float" in kind:
        return None if text.lower() in ("", "none") else float(text)
    return None if text.lower() == "none" else text


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                k, v = line.split("=", 1)
            elif ":" in line:
                k, v = line.split(":", 1)
            else:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            k = k.strip().replace("-", "_")
            k = _ALIASES.get(k, k)
            if k not in {f.name for f in fields(RunConfig)}:
                raise ConfigError(f"{path}:{lineno}: unknown key {k!r}")
            try:
                out[k] = _coerce(k, v)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return out


# -- helpers ----------------------------------------------------------------------

def _spec(cfg: RunConfig, n=None, lam=None):
    over = {k: getattr(cfg, k) for k in ("rel_tol", "abs_tol", "max_evals") if getattr(cfg, k) is not None}
    over["threads"] = cfg.threads
    return default_spec(n or cfg.n, cfg.lam if lam is None else lam, **over)


def _x0(cfg, n=None):
    n = n or cfg.n
    v = np.zeros(n - 1)
    a = np.asarray(cfg.x0_prime, dtype=float)
    v[: min(len(a), n - 1)] = a[: n - 1]
    return v


class _Clock:
    def __init__(self):
        self.t = time.perf_counter()

    def lap(self):
        now = time.perf_counter()
        dt, self.t = now - self.t, now
        return dt


def _user_field(cfg: RunConfig):
    n = cfg.n
    if cfg.field_expr:
        return field_from_expression(cfg.field_expr, n)
    rng = np.random.default_rng(cfg.seed)
    c = np.zeros(n)
    c[:-1] = _x0(cfg)
    b = cfg.builtin
    if b == "zero":
        return constant(n, 0.0)
    if b == "gaussian":
        return gaussian_bump(n, c, 1.0, 1.0)
    if b == "tilted":
        return tilted_bump(n, c, 1.0, 1.0, rng.normal(scale=0.5, size=n))
    if b == "compact":
        return compact_bump(n, c, 1.0, 1.0)
    if b == "extremal-plus-bump":
        return add(onofri_w(OnofriTraceExtremal(n, cfg.lam, _x0(cfg))), gaussian_bump(n, c, 1.0, 0.5))
    if b == "seeded":
        return seeded_test_fields(n, cfg.seed + 1, 0)[cfg.seed]
    raise ConfigError(f"unknown builtin field {b!r}")


def _sphere_area_recursive(k: int) -> float:
    """|S^{k-1}| by the recursion |S^{k+1}| = 2 pi |S^{k-1}| / k."""
    a = {1: 2.0, 2: 2.0 * math.pi}
    if k in a:
        return a[k]
    return 2.0 * math.pi * _sphere_area_recursive(k - 2) / (k - 2)


# -- commands ---------------------------------------------------------------------

def cmd_constants(cfg, rep: Report):
    n = cfg.n
    clk = _Clock()
    a = kernels.alpha_n(n)
    s = _sphere_area_recursive(n)
    if n == 2:
        rep.add("alpha_n", a, 1.0 / (4.0 * math.pi), "closed-form", 1e-14, seconds=clk.lap())
    else:
        rep.add("alpha_n", a, 2.0 / (n ** n * s), "closed-form", 1e-14, "rel", seconds=clk.lap())
    rep.add("beta_n_fullspace", kernels.beta_n_fullspace(n),
            n ** (1 - n) / ((n - 1) * s), "closed-form", 1e-14, "rel", seconds=clk.lap())
    rep.add("boundary_mass_exact", pde_checks.boundary_mass_exact(n), 0.5 * n ** (n - 1) * s,
            "closed-form", 1e-14, "rel", seconds=clk.lap())
    rep.add("onofri_normalization", onofri_normalization(n), math.log(0.5 * n ** (n - 1) * s),
            "closed-form", 1e-13, seconds=clk.lap())
    if n >= 3:
        p = n - 1e-6
        rep.add("C0p_gap(p=n-1e-6)", kernels.c0p(n, p), 0.5 * s, "analytic-limit", 1e-3, seconds=clk.lap())
        rep.add("C1p_gap(p=n-1e-6)", kernels.c1p(n, p), 0.5 * n ** (n - 1) * s, "analytic-limit", 1e-3,
                seconds=clk.lap())
    if cfg.p is not None:
        p = cfg.p
        rep.add("S(n,p)", kernels.sobolev_trace_constant(n, p), None, "none", None, "report", seconds=clk.lap())
        rep.add("C1p/C0p", kernels.c1p(n, p) / kernels.c0p(n, p), (p * (n - 1) / (p - 1)) ** (p - 1),
                "closed-form", 1e-13, "rel", seconds=clk.lap())
    rep.add("remainder_constant_fit", kernels.fit_remainder_constant(n, seed=cfg.seed), None, "none", None,
            "report", seconds=clk.lap())


def cmd_verify_extremal(cfg, rep: Report):
    n = cfg.n
    params = OnofriTraceExtremal(n, cfg.lam, _x0(cfg), cfg.c_tilde)
    w = onofri_w(params)
    spec = _spec(cfg)
    clk = _Clock()
    d = fn.deficit(w, spec, center=params.center)
    rep.add("extremal_deficit", d.deficit, 0.0, "closed-form", 1e-6, quad_error=d.error, seconds=clk.lap())
    if not (cfg.lam == 1.0 and not np.any(_x0(cfg))):
        q = fn.quotient_Q(w, spec, center=params.center)
        rep.add("quotient_Q", q, 1.0 / kernels.alpha_n(n), "closed-form", 1e-4, "rel", seconds=clk.lap())
    pts = sample_halfspace(n, 1000, cfg.seed)
    bpts = sample_boundary(n, 1000, cfg.seed + 1)
    inner, bnd = pde_checks.el_residual_w(params, pts, bpts)
    rep.add("el_interior_residual", inner.max_abs, 0.0, "closed-form", 1e-10, seconds=clk.lap())
    rep.add("el_boundary_residual", bnd.max_abs, 0.0, "closed-form", 1e-10, seconds=clk.lap())


def cmd_deficit(cfg, rep: Report):
    w = _user_field(cfg)
    spec = _spec(cfg)
    clk = _Clock()
    d = fn.deficit(w, spec)
    rep.add("deficit_nonnegative", d.deficit, 0.0, "closed-form", 1e-8, "ge", quad_error=d.error,
            seconds=clk.lap())
    rep.add("lhs", d.lhs, None, "none", None, "report")
    rep.add("rhs", d.rhs, None, "none", None, "report")
    rep.add("tail_verified", float(d.tail_verified), None, "none", None, "report")


def _liouville(cfg, n=None):
    n = n or cfg.n
    return LiouvilleSolution(n, cfg.lam, _x0(cfg, n))


def cmd_pde_check(cfg, rep: Report):
    n = cfg.n
    params = _liouville(cfg)
    clk = _Clock()
    pts = sample_halfspace(n, 1000, cfg.seed)
    bpts = sample_boundary(n, 1000, cfg.seed + 1)
    rep.add("interior_residual", pde_checks.interior_residual_closed(params, pts).max_abs, 0.0,
            "closed-form", 1e-12, seconds=clk.lap())
    rep.add("neumann_residual", pde_checks.neumann_residual(params, bpts).max_abs, 0.0, "closed-form", 1e-12,
            seconds=clk.lap())
    # FD second opinion, away from the singular point
    far = sample_halfspace(n, 200, cfg.seed + 2, t_min=0.5)
    r1 = pde_checks.interior_residual_fd(params, far, 1e-3).max_abs
    r2 = pde_checks.interior_residual_fd(params, far, 2e-3).max_abs
    rep.add("fd_residual(h=1e-3)", r1, 0.0, "closed-form", 1e-4, seconds=clk.lap())
    rep.add("fd_order_ratio", r2 / r1, 4.0, "closed-form", 1.0, seconds=clk.lap())
    # negative controls: these must register as failures of the equation
    u = liouville_u(params)
    bump = add(u, gaussian_bump(n, np.r_[np.zeros(n - 1), 1.0], 1.0, 0.1))
    rep.add("neg_control_interior", pde_checks.interior_residual_field(bump, pts).max_abs, 1e-6,
            "closed-form", None, "gt", seconds=clk.lap())
    shifted = add(u, constant(n, math.log(2.0)))
    rep.add("neg_control_neumann", pde_checks.neumann_residual_field(shifted, bpts).max_abs, 1e-6,
            "closed-form", None, "gt", seconds=clk.lap())
    sp = sample_halfspace(n, 100, cfg.seed + 3)
    rep.add("stress_tensor", float(np.abs(pde_checks.stress_tensor_E(params, sp)).max()), 0.0, "closed-form",
            1e-10, seconds=clk.lap())
    rep.add("neg_control_stress", float(np.abs(pde_checks.stress_tensor_field(bump, sp)).max()), 1e-6,
            "closed-form", None, "gt", seconds=clk.lap())
    vi, vb = pde_checks.auxiliary_v_check(params, pts, bpts)
    rep.add("auxiliary_v_interior", vi.max_abs, 0.0, "closed-form", 1e-10, seconds=clk.lap())
    rep.add("auxiliary_v_boundary", vb.max_abs, 0.0, "closed-form", 1e-12, seconds=clk.lap())
    if n == 2 and cfg.lam == 1.0 and not np.any(_x0(cfg)):
        ratios = pde_checks.second_order_ratio(params, 1.0, [2.0, 4.0, 8.0, 16.0], _spec(cfg))
        for R, v in zip([2, 4, 8, 16], ratios):
            ref = fx.value(f"second_order_ratio.n2.gamma1.R{R}", cfg.fixtures_path)
            rep.add(f"second_order_ratio(R={R})", v, ref, "fixture", 1e-6, "rel", seconds=clk.lap())


def cmd_pohozaev(cfg, rep: Report):
    n = cfg.n
    params = _liouville(cfg)
    y = np.zeros(n)
    yy = np.asarray(cfg.y, dtype=float)
    y[: min(n, len(yy))] = yy[:n]
    spec = _spec(cfg)
    clk = _Clock()
    terms, err = pde_checks.pohozaev_terms(params, cfg.R, y, spec)
    gap = math.fsum(terms.values())
    rep.add("pohozaev_gap", gap, 0.0, "closed-form", 1e-5, quad_error=err, seconds=clk.lap())
    mass, flux = pde_checks.flux_identity(params, cfg.R, spec)
    rep.add("flux_identity", flux, mass, "closed-form", 1e-6, "rel", seconds=clk.lap())


def cmd_mass(cfg, rep: Report):
    n = cfg.n
    params = _liouville(cfg)
    u = liouville_u(params)
    clk = _Clock()
    interior, bmass = fn.finite_mass(u, _spec(cfg), center=params.center)
    rep.add("boundary_mass", bmass, pde_checks.boundary_mass_exact(n), "closed-form", 1e-6, "rel",
            seconds=clk.lap())
    rep.add("beta", pde_checks.beta_from_mass(bmass, n), float(n), "closed-form", 1e-6, seconds=clk.lap())
    rep.add("interior_mass", interior, None, "none", None, "report")


def cmd_asymptotics(cfg, rep: Report):
    n = cfg.n
    params = _liouville(cfg)
    dirs = hemisphere_directions(n, 256, cfg.seed)
    radii = sorted(cfg.radii)
    clk = _Clock()
    prof = asy.sharp_profile(params, radii, dirs)
    scale = max(1.0, cfg.lam + float(np.linalg.norm(_x0(cfg))))
    dev_r = [d * R for d, R in zip(prof.sup_deviation, radii)]
    rep.add("deviation_times_R_max", max(dev_r), 3.0 * n * scale, "closed-form", 0.0, "le", seconds=clk.lap())
    mono = all(b < a for a, b in zip(prof.sup_deviation, prof.sup_deviation[1:]))
    rep.add("deviation_decreasing", float(mono), 1.0, "closed-form", 0.0)
    for (R0, g0), (R1, g1) in zip(zip(radii, prof.grad_decay), zip(radii[1:], prof.grad_decay[1:])):
        # 1/R scaling within a factor 2: |log2((g0 / g1) / (R1 / R0))| <= 1
        rep.add(f"grad_decay_scaling_log2(R={R0:g}->{R1:g})", math.log2((g0 / g1) / (R1 / R0)), 0.0,
                "closed-form", 1.0)
    harn = asy.sphere_harnack_ratio(params, None, [10.0, 100.0, 1000.0], dirs)
    if harn[-1] is not None:
        rep.add("harnack_ratio(kappa=1e3)", harn[-1], 1.0, "closed-form", 0.05, "rel", seconds=clk.lap())
    lub = asy.log_upper_bound(params, sample_halfspace(n, 4000, cfg.seed, scale=3.0))
    rep.add("log_upper_bound", lub, None, "none", None, "report", seconds=clk.lap())
    far = 1e6 * dirs
    rep.add("log_bound_at_1e6", asy.log_upper_bound(params, far), 0.0, "closed-form", None, "lt")


def cmd_supersolution(cfg, rep: Report):
    clk = _Clock()
    sp, C0 = asy.solve_supersolution_params(cfg.n, cfg.gamma, cfg.delta, cfg.R1,
                                            cfg.C1, cfg.eps)
    r = np.geomspace(sp.R1, 100.0 * sp.R1, 50)
    rep.add("phi_ode_residual", float(np.max(np.abs(asy.phi_ode_residual(r, sp)))), 0.0, "closed-form", 1e-6,
            seconds=clk.lap())
    lo, mid, hi = asy.phi_sandwich(r, sp)
    rep.add("phi_sandwich_margin", float(min(np.min(mid - lo), np.min(hi - mid))), 0.0, "closed-form", 0.0,
            "ge", seconds=clk.lap())
    rep.add("phi(R1)", asy.phi(sp.R1, sp), sp.b, "closed-form", 0.0)
    samples = asy.supersolution_samples(sp, 1000, cfg.seed)
    x = samples[:20]
    ga, gb = asy.barrier_grad_A(x, sp.delta), asy.barrier_grad_A_hessian_route(x, sp.delta)
    rep.add("grad_A_two_routes", float(np.max(np.abs(ga - gb)) / np.max(np.abs(gb))), 0.0, "closed-form",
            1e-10, seconds=clk.lap())
    bnd, inner = asy.supersolution_checks(sp, C0, samples)
    rep.add("boundary_sign_margin", bnd.min_margin, 0.0, "closed-form", 0.0, "ge", seconds=clk.lap())
    rep.add("interior_sign_margin", inner.min_margin, 0.0, "closed-form", None, "gt", seconds=clk.lap())
    nb, _ = asy.supersolution_checks(asy.halve_a(sp), C0, samples)
    rep.add("neg_control_boundary_sign(a_eps/2)", nb.min_margin, 0.0, "closed-form", None, "lt",
            seconds=clk.lap())


def cmd_limit_study(cfg, rep: Report):
    clk = _Clock()
    for n in (3, 4):
        t = limit_study.constants_limit(n, [n - 1e-6])
        rep.add(f"C0p_gap(n={n})", t.columns["gap_C0"][0], 0.0, "analytic-limit", 1e-3, seconds=clk.lap())
        rep.add(f"C1p_gap(n={n})", t.columns["gap_C1"][0], 0.0, "analytic-limit", 1e-3)
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for n in (2, 3):
        for _ in range(10):
            x = rng.normal(size=n)
            x[-1] = abs(x[-1])
            g = rng.normal(size=n)
            seq = limit_study.rp_homogeneity_limit(x, g, n, [n - 1e-6], w_value=float(rng.normal()))
            worst = max(worst, abs(seq[-1] - kernels.k_n(x, g)))
    rep.add("rp_homogeneity_gap(p=n-1e-6)", worst, 0.0, "analytic-limit", 1e-3, seconds=clk.lap())
    w = fx.seeded_bump_3d()
    spec = _spec(cfg, 3).with_(rel_tol=1e-9, abs_tol=1e-12)
    target = limit_study.quotient_target(w, spec)
    rep.add("quotient_target", target, fx.value("quotient_target.cbump3", cfg.fixtures_path), "fixture", 1e-6,
            "rel", seconds=clk.lap())
    ps = limit_study.default_p_sequence(3, cfg.k_max)
    table = limit_study.quotient_limit_table(w, ps, spec)
    i4 = int(np.argmin([abs(p - (3 - 1e-4)) for p in ps]))
    rep.add(f"quotient_log_gap(p={ps[i4]!r})", table.columns["gap"][i4], 0.0, "analytic-limit", 1e-2,
            seconds=clk.lap())
    if cfg.table_out:
        with open(cfg.table_out, "w") as fh:
            fh.write(table.to_csv())
    us = sobolev_u_star(SobolevTraceExtremal(3, 2.0))
    rep.add("sobolev_trace_deficit(u_star,3,2)",
            limit_study.sobolev_trace_deficit(us, 3, 2.0, _spec(cfg, 3)), 0.0, "closed-form", 1e-6,
            seconds=clk.lap())


def cmd_fullspace(cfg, rep: Report):
    n = cfg.n
    spec = _spec(cfg)
    clk = _Clock()
    from .quadrature import integrate_fullspace
    mass = integrate_fullspace(kernels.weight_nu_n, spec, n=n)
    rep.add("nu_total_mass", mass.require("int dnu"), 1.0, "closed-form", 1e-8, quad_error=mass.error_estimate,
            seconds=clk.lap())
    z = fn.fullspace_deficit(constant(n, 0.0), spec)
    rep.add("constant_deficit", z.deficit, 0.0, "closed-form", 1e-12, seconds=clk.lap())
    w = _user_field(cfg) if (cfg.field_expr or cfg.builtin != "gaussian") else gaussian_bump(n, None, 1.0, 1.0)
    d = fn.fullspace_deficit(w, spec)
    rep.add("fullspace_deficit_nonnegative", d.deficit, 0.0, "closed-form", 1e-8, "ge", quad_error=d.error,
            seconds=clk.lap())


def cmd_fixtures(cfg, rep: Report):
    if cfg.action == "pin":
        if not cfg.fixtures_path:
            raise ConfigError("fixtures pin needs --fixtures PATH (the shipped table is never overwritten)")
        doc = fx.pin(cfg.fixtures_path, threads=cfg.threads)
        for fid, entry in sorted(doc["fixtures"].items()):
            rep.add(f"pinned:{fid}", entry["value"], None, "none", None, "report")
        return
    clk = _Clock()
    for fid, got, ref, tol, ok in fx.verify(cfg.fixtures_path, threads=cfg.threads):
        rep.add(fid, got, ref, "fixture", tol, "rel", seconds=clk.lap())


_SUITE = [
    ("constants", dict(n=2)), ("constants", dict(n=3, p=2.0)),
    ("verify-extremal", dict(n=2, lam=2.0, x0_prime=[0.7])),
    ("verify-extremal", dict(n=3, lam=0.5, x0_prime=[0.3, -0.2])),
    ("deficit", dict(n=2, builtin="tilted")), ("pde-check", dict(n=2)), ("pde-check", dict(n=3, lam=2.0)),
    ("pohozaev", dict(n=2, R=10.0, y=[0.5, 0.0])), ("mass", dict(n=3)), ("asymptotics", dict(n=2)),
    ("supersolution", dict(n=3)), ("limit-study", dict(n=3, k_max=4)), ("fullspace", dict(n=2)),
]

HANDLERS = {
    "constants": cmd_constants, "verify-extremal": cmd_verify_extremal, "deficit": cmd_deficit,
    "pde-check": cmd_pde_check, "pohozaev": cmd_pohozaev, "mass": cmd_mass, "asymptotics": cmd_asymptotics,
    "supersolution": cmd_supersolution, "limit-study": cmd_limit_study, "fullspace": cmd_fullspace,
    "fixtures": cmd_fixtures,
}


def cmd_suite(cfg, rep: Report):
    for i, (name, over) in enumerate(_SUITE):
        sub = RunConfig(**{**asdict(cfg), "command": name, **over})
        part = Report(name, rep.timing)
        HANDLERS[name](sub, part)
        for row in part.rows:
            row.check_id = f"{i:02d}.{name}.{row.check_id}"
            rep.rows.append(row)


HANDLERS["suite"] = cmd_suite


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg.validate()
        rep = Report(cfg.command, cfg.timing)
        HANDLERS[cfg.command](cfg, rep)
    except ConvergenceError as exc:
        print(f"error: quadrature did not converge: {exc}", file=err)
        return EXIT_QUAD
    except (ConfigError, ExpressionError, kernels.DomainError, asy.InfeasibleParameters, ValueError,
            KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    if cfg.output_format == "json":
        out.write(rep.to_json(cfg.public()))
    else:
        out.write(rep.to_csv())
    for row in rep.failures():
        print("FAIL " + row.describe(), file=err)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="onofri-trace", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("action", nargs="?", choices=("verify", "pin"), help="for the fixtures command")
    ap.add_argument("--config", help="key = value file mirroring the run configuration")
    ap.add_argument("--n", type=int)
    ap.add_argument("--lambda", dest="lam", type=float)
    ap.add_argument("--x0", dest="x0_prime", type=_floats, help="boundary centre x0' (comma separated)")
    ap.add_argument("--c-tilde", dest="c_tilde", type=float)
    ap.add_argument("--p", type=float)
    ap.add_argument("--radii", type=_floats)
    ap.add_argument("--rel-tol", dest="rel_tol", type=float)
    ap.add_argument("--abs-tol", dest="abs_tol", type=float)
    ap.add_argument("--max-evals", dest="max_evals", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--format", dest="output_format", choices=("json", "csv"))
    ap.add_argument("--fixtures", dest="fixtures_path")
    ap.add_argument("--field", dest="field_expr", help="expression in x1..xn, t, r, rp")
    ap.add_argument("--builtin", choices=("zero", "gaussian", "tilted", "compact", "extremal-plus-bump",
                                          "seeded"))
    ap.add_argument("--R", type=float)
    ap.add_argument("--y", type=_floats)
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--delta", type=float)
    ap.add_argument("--R1", type=float)
    ap.add_argument("--eps", type=float)
    ap.add_argument("--C1", type=float)
    ap.add_argument("--k-max", dest="k_max", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--no-timing", dest="timing", action="store_false", default=None,
                    help="leave the wall-time column empty so reports are byte-comparable")
    ap.add_argument("--table-out", dest="table_out", help="write the limit-study table as CSV")
    return ap


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for k, v in vars(args).items():
        if k == "config" or v is None:
            continue
        values[k] = v
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
