"""Nonlinear mixed solvers for the curved-pipe system and its flat
sigma-forced approximation.

The driver is damped defect correction: solve J(x_k) dx = -R(x_k) with J
either the Picard operator (frozen viscosity and convecting field; its
skew-symmetrized convection keeps every step energy-stable) or the full
Newton derivative, then x_{k+1} = x_k + omega dx.  The default scheme warms
up with Picard and finishes with Newton.  Convergence is declared on the
algebraic residual norm relative to the load norm, so stopping behavior does
not depend on the size of the pressure-drop constant.

If the direct iteration stalls at a Reynolds number far above the uniqueness
threshold, the driver restarts along a geometric Reynolds ladder, warm
starting each rung (continuation also supports p and delta ladders).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import Assembler, AxialAssembler
from .constants import apriori_checks, DEFAULT_KORN_C1, kappa_constants
from .operators import solution_norms


@dataclass(frozen=True)
class FlowParams:
    """Dimensionless run parameters: constitutive exponent p >= 3/2,
    Reynolds number, curvature ratio delta in [0,1), axial pressure-drop
    constant g, shear-rate scale gamma_dot."""

    p: float
    re: float
    delta: float
    g: float
    gamma_dot: float = 1.0

    def __post_init__(self):
        if self.p < 1.5:
            raise ValueError("solver requires p >= 3/2")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("curvature ratio must lie in [0, 1)")
        if self.re < 0.0:
            raise ValueError("Reynolds number must be >= 0")
        if self.gamma_dot <= 0.0:
            raise ValueError("gamma_dot must be positive")

    @property
    def dean(self) -> float:
        return float(np.sqrt(self.delta) * self.re)

    def replace(self, **kw):
        d = dict(p=self.p, re=self.re, delta=self.delta, g=self.g,
                 gamma_dot=self.gamma_dot)
        d.update(kw)
        return FlowParams(**d)


@dataclass
class SolverOptions:
    scheme: str = "picard-then-newton"   # picard | newton | picard-then-newton
    damping: float = 1.0
    rtol: float = 1e-10
    atol: float = 1e-12
    max_iter: int = 200
    picard_iters: int = 12               # warm-up length for the mixed scheme
    initial_guess: str = "axial"         # zero | axial | supplied
    supplied: object = None              # (u, pcoef) when initial_guess == "supplied"
    continuation: bool = True            # allow Reynolds-ladder fallback
    korn_c1: float = DEFAULT_KORN_C1

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residuals: list
    norms: dict = field(default_factory=dict)
    kappa: dict = field(default_factory=dict)
    bounds: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    wall_time: float = 0.0
    message: str = ""

    def as_dict(self):
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residuals": self.residuals,
            "norms": self.norms,
            "kappa": self.kappa,
            "bounds": [{
                "claim": b.claim, "statement": b.statement, "lhs": b.lhs,
                "rhs": b.rhs, "passed": b.passed,
                "conditional_on_korn": b.conditional_on_korn,
            } for b in self.bounds],
            "flags": self.flags,
            "wall_time": self.wall_time,
            "message": self.message,
        }


class SingularSystemError(RuntimeError):
    pass


def _nonlinear_drive(asm, x0, params, opts, residual, jacobian):
    """Shared damped defect-correction loop; returns (x, info)."""
    x = x0.copy()
    hist = []
    r = residual(x)
    load = np.linalg.norm(asm_load(asm, params))
    scale = load if load > 0 else 1.0
    hist.append(float(np.linalg.norm(r)) / scale)
    n_pic = {"picard": np.inf, "newton": 0,
             "picard-then-newton": opts.picard_iters}[opts.scheme]
    momentum_engaged = False
    for it in range(1, opts.max_iter + 1):
        if hist[-1] * scale < opts.atol or hist[-1] < opts.rtol:
            return x, (True, it - 1, hist, momentum_engaged)
        scheme = "picard" if it <= n_pic else "newton"
        jac = jacobian(x, scheme)
        try:
            lu = spla.splu(jac.tocsc())
        except RuntimeError as exc:
            raise SingularSystemError(
                f"linearized system singular at iteration {it}") from exc
        dx = lu.solve(-r)
        if not np.all(np.isfinite(dx)):
            return x, (False, it, hist, momentum_engaged)
        x = x + opts.damping * dx
        r = residual(x)
        rn = float(np.linalg.norm(r)) / scale
        if not np.isfinite(rn) or rn > 1e6 * max(hist[0], 1.0):
            hist.append(rn if np.isfinite(rn) else np.inf)
            return x, (False, it, hist, momentum_engaged)
        if opts.damping < 1.0 and rn < hist[-1]:
            momentum_engaged = True
        hist.append(rn)
    converged = hist[-1] * scale < opts.atol or hist[-1] < opts.rtol
    return x, (converged, opts.max_iter, hist, momentum_engaged)


def asm_load(asm, params):
    if isinstance(asm, AxialAssembler):
        return asm.load(params)
    load = asm.stress_load(params)
    return load[asm.cs.interior_nodes].ravel()


def axial_only_solve(params, cs, opts=None, kind="toroidal"):
    """Unidirectional axial flow: scalar Galerkin solve of the reduced
    problem (the exact solution of the full system when delta*Re = 0).
    Returns (u3 coefficients, SolveReport)."""
    opts = opts or SolverOptions()
    asm = AxialAssembler(cs, kind)
    t0 = time.perf_counter()

    def residual(x):
        return asm.residual(asm.unpack(x), params)

    def jacobian(x, scheme):
        return asm.jacobian(asm.unpack(x), params, scheme)

    x0 = np.zeros(asm.n_dof)
    x, (ok, iters, hist, _) = _nonlinear_drive(asm, x0, params, opts,
                                               residual, jacobian)
    u3 = asm.unpack(x)
    rep = SolveReport(converged=ok, iterations=iters, residuals=hist,
                      wall_time=time.perf_counter() - t0)
    g = asm.field_grad(u3)
    rep.norms = {
        "grad_u3_2B": cs.lq_norm(g, 2.0),
        "grad_u3_pB": cs.lq_norm(g, params.p),
        "u3_2": cs.lq_norm(cs.p2_values(u3), 2.0, weighted=False),
    }
    return u3, rep


def _initial_state(asm, params, cs, opts, kind):
    if opts.initial_guess == "supplied" and opts.supplied is not None:
        u0, p0 = opts.supplied
        return asm.pack(np.asarray(u0, dtype=float),
                        np.asarray(p0, dtype=float))
    u = np.zeros((cs.num_nodes, 3))
    if opts.initial_guess == "axial":
        ax_opts = SolverOptions(scheme="newton", rtol=min(1e-8, opts.rtol * 10),
                                atol=opts.atol, max_iter=50,
                                initial_guess="zero", continuation=False)
        u3, rep = axial_only_solve(params, cs, ax_opts, kind)
        if rep.converged:
            u[:, 2] = u3
    return asm.pack(u, np.zeros(cs.num_vertices))


def _mixed_solve_once(asm, params, cs, opts, x0, sigma=None):
    def residual(x):
        u, pc, mu = asm.unpack(x)
        return asm.residual(u, pc, mu, params, sigma=sigma)

    def jacobian(x, scheme):
        u, _, _ = asm.unpack(x)
        return asm.jacobian(u, params, scheme)

    return _nonlinear_drive(asm, x0, params, opts, residual, jacobian)


def _mixed_solve(asm, params, cs, opts, kind, sigma=None):
    """Direct attempt, then a warm-started Reynolds ladder on failure."""
    x0 = _initial_state(asm, params, cs, opts, kind)
    x, info = _mixed_solve_once(asm, params, cs, opts, x0, sigma)
    if info[0] or not opts.continuation or params.re == 0.0:
        return x, info, ""
    ladder = [params.re * f for f in (0.125, 0.25, 0.5, 1.0)]
    xk = _initial_state(asm, params, cs, opts, kind)
    hist_all = []
    total_iters = 0
    for re_k in ladder:
        pk = params.replace(re=re_k)
        xk, (ok, iters, hist, _) = _mixed_solve_once(asm, pk, cs, opts, xk, sigma)
        hist_all.extend(hist)
        total_iters += iters
        if not ok:
            return xk, (False, total_iters, hist_all, False), \
                f"Reynolds ladder stalled at Re = {re_k:g}"
    return xk, (True, total_iters, hist_all, False), "converged via Reynolds ladder"


def _report_for_solution(params, cs, opts, u, pcoef, info, t0, message=""):
    ok, iters, hist, _ = info
    rep = SolveReport(converged=ok, iterations=iters,
                      residuals=[float(h) for h in hist],
                      wall_time=time.perf_counter() - t0, message=message)
    norms = solution_norms(cs, u, params.p)
    pp = params.p / (params.p - 1.0)
    pq = cs.p1_values(pcoef)
    norms["pressure_pprime"] = cs.lq_norm(pq, pp, weighted=False)
    norms["pressure_mean"] = cs.integrate(pq)
    rep.norms = norms
    kt, checks = apriori_checks(params, cs, norms, opts.korn_c1)
    rep.kappa = kt.as_dict()
    rep.bounds = checks
    rep.flags = {
        "unidirectional": norms["du_2B"] <= 1e-8,
        "uniqueness_guaranteed": params.re < kt.re_unique,
        "all_bounds_pass": all(c.passed for c in checks),
    }
    if not np.all(np.isfinite(list(hist))):
        rep.flags["residual_diverged"] = True
    return rep


def solve_full(params: FlowParams, cs, opts: SolverOptions | None = None):
    """Mixed Galerkin solve of the curved-pipe momentum/continuity system.

    Returns (u, pressure, report): u is (num_nodes, 3) P2 coefficients with
    zero boundary rows, pressure is (num_vertices,) P1 coefficients with
    zero mean.  Non-convergence is flagged in the report, not raised.
    """
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    asm = Assembler(cs, "toroidal")
    x, info, msg = _mixed_solve(asm, params, cs, opts, "toroidal")
    u, pcoef, _ = asm.unpack(x)
    rep = _report_for_solution(params, cs, opts, u, pcoef, info, t0, msg)
    return u, pcoef, rep


def check_pressure_estimate(u, pcoef, params, cs):
    """Empirical pressure bound: reports the pressure norm, the solution-norm
    bracket it is controlled by, and their ratio (an observed constant).

        p >= 2:  ||pi||_p' vs ||Du||_{p,B} + delta^2 ||u2||_{p,B}
                             + Re (||Du||_{p,B}^2 + delta ||grad u3||_{p,B}^2)
        p < 2:   exponents p-1 on the first two terms.
    """
    p = params.p
    pp = p / (p - 1.0)
    norms = solution_norms(cs, u, p)
    lhs = cs.lq_norm(cs.p1_values(pcoef), pp, weighted=False)
    if p >= 2.0:
        bracket = (norms["du_pB"] + params.delta ** 2 * norms["u2_pB"]
                   + params.re * (norms["du_pB"] ** 2
                                  + params.delta * norms["grad_u3_pB"] ** 2))
    else:
        bracket = (norms["du_pB"] ** (p - 1.0)
                   + params.delta ** p * norms["u2_pB"] ** (p - 1.0)
                   + params.re * (norms["du_pB"] ** 2
                                  + params.delta * norms["grad_u3_pB"] ** 2))
    ratio = lhs / bracket if bracket > 0 else (0.0 if lhs == 0 else np.inf)
    return {"pressure_pprime": lhs, "bracket": bracket, "empirical_kappa": ratio,
            "regime": "thickening" if p >= 2 else "thinning"}
