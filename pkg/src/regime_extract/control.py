"""Extraction policy surface: reflecting boundaries, value U, HJB verifier.

U(x, y, i) integrates the selling value v(x, i; z) over reserve z in
[0, y]. The integrand switches branch where z crosses the boundary
inverses b_1(x) <= b_2(x) (internal labels), so the integral is split
into panels and each panel integrates one smooth closed-form branch by
adaptive Simpson. Inside each region the exponentials only ever see
non-positive arguments times positive rates, so nothing overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._numerics import adaptive_simpson
from .errors import OrderingViolated, OutOfRange, PreconditionViolated, \
    VerificationFailed
from .model import ModelParams, chat
from .stopping import StoppingSolution, solve_z, v as v_stop, x_star


@dataclass(frozen=True)
class ControlSolution:
    """Stopping solution plus cached boundary endpoints (caller's labels)."""

    stopping: StoppingSolution
    x1_at_0: float
    x1_at_1: float
    x2_at_0: float
    x2_at_1: float

    @property
    def params(self) -> ModelParams:
        return self.stopping.params


def solve_control(params: ModelParams) -> ControlSolution:
    return from_stopping(solve_z(params))


def from_stopping(sol: StoppingSolution) -> ControlSolution:
    return ControlSolution(
        stopping=sol,
        x1_at_0=x_star(sol, 1, 0.0), x1_at_1=x_star(sol, 1, 1.0),
        x2_at_0=x_star(sol, 2, 0.0), x2_at_1=x_star(sol, 2, 1.0))


def external_shift(cs: ControlSolution, i: int) -> float:
    sol = cs.stopping
    return sol.shift(sol.internal_regime(i))


def b_star(cs: ControlSolution, i: int, x):
    """Reflecting reserve boundary: clamped inverse of y -> x*_i(y).

    Since x*_i(y) = shift_i + c - f'(y)/rho, the inverse reduces to
    inverting f' (log for the exponential family, linear for the
    quadratic one), clamped to [0, 1].
    """
    p = cs.params
    sh = external_shift(cs, i)
    out = p.cost.derivative_inverse(p.rho*(p.c + sh - np.asarray(x, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def _internal_b(cs: ControlSolution, k: int, x: float) -> float:
    p = cs.params
    sh = cs.stopping.shift(k)
    return float(p.cost.derivative_inverse(p.rho*(p.c + sh - x)))


def _u_region(cs: ControlSolution, x: float, z, k: int, region: int,
              order: int = 0):
    """u(x, k; z) (or its x-derivatives) with the region forced.

    region 0: both regimes continue; 1: regime 1 stopped, regime 2
    continues; 2: both stopped. k is the internal regime label, z a vector
    of reserve levels inside one panel.
    """
    sol = cs.stopping
    p, rt = sol.iparams, sol.roots
    z = np.asarray(z, dtype=float)
    ch = chat(p, z)
    if region == 2 or (region == 1 and k == 1):
        if order == 0:
            return x - ch
        return np.ones_like(z) if order == 1 else np.zeros_like(z)
    a3r, a4r, a5 = rt.alpha3, rt.alpha4, rt.alpha5
    if region == 1:
        x2 = sol.z1 + sol.z2 + ch
        r = p.rho/(p.rho + p.lambda2)
        zsum = sol.z1 + sol.z2
        t5 = r*(1.0 + a5*zsum)/(2.0*a5)*np.exp(a5*(x - x2))
        t6 = r*(a5*zsum - 1.0)/(2.0*a5)*np.exp(-a5*(x - x2))
        lin = p.lambda2/(p.rho + p.lambda2)
        if order == 0:
            return t5 + t6 + lin*(x - ch)
        if order == 1:
            return a5*(t5 - t6) + lin
        return a5*a5*(t5 + t6)
    x1 = sol.z1 + ch
    t3 = (a4r*sol.z1 - 1.0)/(a4r - a3r)*np.exp(a3r*(x - x1))
    t4 = (1.0 - a3r*sol.z1)/(a4r - a3r)*np.exp(a4r*(x - x1))
    if sol.case == "B":
        f3, f4 = (1.0, 1.0) if k == 1 else (1.0, -p.lambda2/p.lambda1)
    elif k == 1:
        f3, f4 = 1.0, 1.0
    else:
        phi13 = -0.5*p.sigma1**2*a3r**2 + p.rho + p.lambda1
        phi14 = -0.5*p.sigma1**2*a4r**2 + p.rho + p.lambda1
        f3, f4 = phi13/p.lambda1, phi14/p.lambda1
    if order == 0:
        return f3*t3 + f4*t4
    if order == 1:
        return a3r*f3*t3 + a4r*f4*t4
    return a3r*a3r*f3*t3 + a4r*a4r*f4*t4


def _panels(cs: ControlSolution, x: float, y: float):
    b1 = _internal_b(cs, 1, x)
    b2 = _internal_b(cs, 2, x)
    return min(b1, y), min(b2, y)


def U(cs: ControlSolution, x: float, y: float, i: int,
      tol: float = 1e-9) -> float:
    """Control value U(x,y,i) = integral_0^y v(x,i;z) dz by panel-split
    adaptive Simpson (absolute tolerance tol per panel)."""
    if not 0.0 <= y <= 1.0:
        raise OutOfRange(f"reserve level must lie in [0, 1], got {y}")
    if y == 0.0:
        return 0.0
    sol = cs.stopping
    k = sol.internal_regime(i)
    p1, p2 = _panels(cs, x, y)
    total = 0.0
    if p1 > 0.0:
        total += adaptive_simpson(
            lambda z: _u_region(cs, x, z, k, 0), 0.0, p1, tol=tol)
    if p2 > p1:
        total += adaptive_simpson(
            lambda z: _u_region(cs, x, z, k, 1), p1, p2, tol=tol)
    if y > p2:
        total += adaptive_simpson(
            lambda z: _u_region(cs, x, z, k, 2), p2, y, tol=tol)
    return total - cs.params.cost.value(y)/cs.params.rho


def U_x(cs: ControlSolution, x: float, y: float, i: int,
        tol: float = 1e-9) -> float:
    if y == 0.0:
        return 0.0
    k = cs.stopping.internal_regime(i)
    p1, p2 = _panels(cs, x, y)
    total = 0.0
    if p1 > 0.0:
        total += adaptive_simpson(
            lambda z: _u_region(cs, x, z, k, 0, order=1), 0.0, p1, tol=tol)
    if p2 > p1:
        total += adaptive_simpson(
            lambda z: _u_region(cs, x, z, k, 1, order=1), p1, p2, tol=tol)
    total += y - p2  # u_x = 1 on the stopped panel
    return total


def U_xx(cs: ControlSolution, x: float, y: float, i: int,
         tol: float = 1e-9) -> float:
    """Second x-derivative; the fully stopped panel contributes nothing."""
    if y == 0.0:
        return 0.0
    k = cs.stopping.internal_regime(i)
    p1, p2 = _panels(cs, x, y)
    total = 0.0
    if p1 > 0.0:
        total += adaptive_simpson(
            lambda z: _u_region(cs, x, z, k, 0, order=2), 0.0, p1, tol=tol)
    if p2 > p1 and k != 1:
        total += adaptive_simpson(
            lambda z: _u_region(cs, x, z, k, 1, order=2), p1, p2, tol=tol)
    return total


@dataclass(frozen=True)
class ValueReport:
    U: float
    Uy: float
    Ux: float
    Uxx: float
    hjb_residual: float

    def to_dict(self) -> dict:
        return {"U": float(self.U), "Uy": float(self.Uy), "Ux": float(self.Ux),
                "Uxx": float(self.Uxx),
                "hjb_residual": float(self.hjb_residual)}


def _branches(cs: ControlSolution, x: float, y: float, i: int,
              u_vals: dict, uxx_vals: dict,
              perturbation: Optional[Callable] = None):
    p = cs.params
    pert = perturbation or (lambda *_: 0.0)
    ui = u_vals[i] + pert(x, y, i)
    uo = u_vals[3 - i] + pert(x, y, 3 - i)
    b1r = (0.5*p.sigma(i)**2*uxx_vals[i] - p.rho*ui + p.lam(i)*(uo - ui)
           - p.cost.value(y))
    b2r = (x - p.c) - v_stop(cs.stopping, x, i, y)
    return b1r, b2r


def U_report(cs: ControlSolution, x: float, y: float, i: int) -> ValueReport:
    """Value, derivatives and the HJB residual at one state. Uy is the
    selling value v(x,i;y) (the exact derivative of the reserve integral)."""
    if not 0.0 <= y <= 1.0:
        raise OutOfRange(f"reserve level must lie in [0, 1], got {y}")
    u_vals = {j: U(cs, x, y, j) for j in (1, 2)}
    uxx_vals = {j: U_xx(cs, x, y, j) for j in (1, 2)}
    b1r, b2r = _branches(cs, x, y, i, u_vals, uxx_vals)
    return ValueReport(U=float(u_vals[i]),
                       Uy=float(v_stop(cs.stopping, x, i, y)),
                       Ux=float(U_x(cs, x, y, i)), Uxx=float(uxx_vals[i]),
                       hjb_residual=float(max(b1r, b2r)))


@dataclass(frozen=True)
class HjbReport:
    nx: int
    ny: int
    x_lo: float
    x_hi: float
    tau: float
    worst_max_abs: float
    worst_state: tuple
    worst_branch_excess: float
    worst_regional: float

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "x_lo": self.x_lo,
                "x_hi": self.x_hi, "tau": self.tau,
                "worst_max_abs": self.worst_max_abs,
                "worst_state": list(self.worst_state),
                "worst_branch_excess": self.worst_branch_excess,
                "worst_regional": self.worst_regional}


def verify_hjb(cs: ControlSolution, nx: int = 400, ny: int = 50,
               tau: float = 1e-5, x_range=None,
               perturbation: Optional[Callable] = None) -> HjbReport:
    """Check the dynamic-programming equation on a state grid.

    At every (x, y, i): both branches of
    max{(G - rho) U - f(y), (x - c) - U_y} are at most tau, the max lies
    in [-tau, tau], the first branch vanishes (to tau) where y <= b*_i(x)
    and the second where y >= b*_i(x). The generator uses the closed-form
    piecewise u_xx integrated per panel, so no differencing noise enters.
    perturbation(x, y, i), if given, is added to U (test hook).
    """
    sol = cs.stopping
    zsum = sol.z1 + sol.z2
    x2_at_0 = zsum + chat(sol.params, 0.0)
    if x_range is None:
        x_lo = x2_at_0 - 5.0*sol.z1 - 5.0
        x_hi = x2_at_0 + 5.0
    else:
        x_lo, x_hi = x_range
    xs = np.linspace(x_lo, x_hi, nx)
    ys = np.linspace(1.0/ny, 1.0, ny)

    worst_abs = 0.0
    worst_state = (xs[0], ys[0], 1)
    worst_excess = -np.inf
    worst_regional = 0.0
    fail = None
    for x in xs:
        b_at_x = {i: b_star(cs, i, float(x)) for i in (1, 2)}
        for y in ys:
            u_vals = {j: U(cs, float(x), float(y), j) for j in (1, 2)}
            uxx_vals = {j: U_xx(cs, float(x), float(y), j) for j in (1, 2)}
            for i in (1, 2):
                b1r, b2r = _branches(cs, float(x), float(y), i, u_vals,
                                     uxx_vals, perturbation)
                mx = max(b1r, b2r)
                if abs(mx) > worst_abs:
                    worst_abs = abs(mx)
                    worst_state = (float(x), float(y), i)
                worst_excess = max(worst_excess, b1r, b2r)
                if y <= b_at_x[i]:
                    worst_regional = max(worst_regional, abs(b1r))
                # y >= b_i(x) marks the stopped region only off the b = 1
                # plateau; the price-side comparison covers the corner too
                if x >= x_star(sol, i, float(y)):
                    worst_regional = max(worst_regional, abs(b2r))
                if fail is None and (abs(mx) > tau or b1r > tau or b2r > tau):
                    fail = (f"HJB residual at (x={x}, y={y}, i={i}): "
                            f"branches ({b1r}, {b2r})")
    report = HjbReport(nx=nx, ny=ny, x_lo=float(x_lo), x_hi=float(x_hi),
                       tau=tau, worst_max_abs=float(worst_abs),
                       worst_state=worst_state,
                       worst_branch_excess=float(worst_excess),
                       worst_regional=float(worst_regional))
    if fail is not None or worst_regional > tau:
        raise VerificationFailed(fail or
                                 f"regional residual {worst_regional} > {tau}",
                                 report)
    return report


def single_regime_boundary(params: ModelParams, sigma: float, y):
    """No-switching stopping boundary x#(y) = sigma/sqrt(2 rho) + chat(y)."""
    return sigma/math.sqrt(2.0*params.rho) + chat(params, y)


def b_sharp(params: ModelParams, sigma: float, x):
    """Clamped inverse of x#: the single-regime reflecting boundary."""
    sh = sigma/math.sqrt(2.0*params.rho)
    out = params.cost.derivative_inverse(
        params.rho*(params.c + sh - np.asarray(x, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class OrderingReport:
    x: np.ndarray
    b_sharp_1: np.ndarray
    b_star_1: np.ndarray
    b_star_2: np.ndarray
    b_sharp_2: np.ndarray


def compare_boundaries(cs: ControlSolution, n: int = 1000,
                       x_range=None) -> OrderingReport:
    """Tabulate and order-check b#(.;sigma1) <= b*_1 <= b*_2 <= b#(.;sigma2).

    Equality is allowed only on the clamp plateaus (both curves at 0 or
    at 1); in the equal-volatility case all four curves coincide.
    """
    p = cs.params
    sol = cs.stopping
    if sol.relabeled:
        raise PreconditionViolated(
            "boundary comparison expects sigma1 < sigma2 labeling")
    ch0, ch1 = chat(p, 0.0), chat(p, 1.0)
    sh_lo = p.sigma1/math.sqrt(2.0*p.rho)
    sh_hi = p.sigma2/math.sqrt(2.0*p.rho)
    if x_range is None:
        x_lo = min(sh_lo, external_shift(cs, 1)) + ch1 - 1.0
        x_hi = max(sh_hi, external_shift(cs, 2)) + ch0 + 1.0
    else:
        x_lo, x_hi = x_range
    xs = np.linspace(x_lo, x_hi, n)
    curves = (b_sharp(p, p.sigma1, xs), b_star(cs, 1, xs),
              b_star(cs, 2, xs), b_sharp(p, p.sigma2, xs))
    names = ("b#(sigma1)", "b*1", "b*2", "b#(sigma2)")
    equal_case = sol.case == "B"
    for (lo_c, hi_c), (lo_n, hi_n) in zip(
            zip(curves, curves[1:]), zip(names, names[1:])):
        bad = lo_c > hi_c + 1e-12
        if bad.any():
            j = int(np.argmax(lo_c - hi_c))
            raise OrderingViolated(
                f"{lo_n} > {hi_n} at x={xs[j]}: {lo_c[j]} > {hi_c[j]}",
                x=float(xs[j]))
        if not equal_case:
            interior = (lo_c > 0.0) & (lo_c < 1.0) & (hi_c > 0.0) & (hi_c < 1.0)
            tied = interior & (lo_c >= hi_c)
            if tied.any():
                j = int(np.argmax(tied))
                raise OrderingViolated(
                    f"{lo_n} not strictly below {hi_n} off the plateaus "
                    f"at x={xs[j]}", x=float(xs[j]))
    return OrderingReport(xs, *curves)
