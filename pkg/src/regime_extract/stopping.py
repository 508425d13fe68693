"""Family of optimal selling problems: boundaries, value w, grid verifier.

For each reserve level y the selling problem has regime-dependent stopping
boundaries x*_i(y) = shift_i + chat(y) whose shifts (z1, z1+z2) do not
depend on y. (z1, z2) solve the reduced smooth-fit system G1 = G2 = 0:

    G1(u,v) = (a1 + (l2-rho)/(rho+l2) + r cosh(a5 v)) u
              - (r/a5) (sinh(a5 v) - a5 v cosh(a5 v)) + a2
    G2(u,v) = (a3 - r a5 sinh(a5 v)) u
              - r (a5 v sinh(a5 v) - cosh(a5 v)) + a4,      r = rho/(rho+l2),

obtained by eliminating the exponential coefficients from the six
value-match/smooth-fit equations. Writing kappa = (sigma1^2 a3r a4r / 2
+ rho + l1)/l1 = rho/(rho+l2) - a1, the G1 coefficient of u at v = 0 is
1 - kappa < 0, it vanishes at the unique zhat2 > 0 with
cosh(a5 zhat2) = (kappa (rho+l2) - l2)/rho, and on (0, zhat2) the system
is equivalent to u = M1(v), M1(v) - M2(v) = 0 with M1 increasing to
+infinity and M2 decreasing, so a guarded bisection finds the unique
root. At v = 0, M1(0) and M2(0) reproduce the two equal-volatility
boundary formulas, whose agreement is exactly the sigma1 = sigma2 case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._numerics import bisect
from .errors import (AssumptionViolated, DomainError, NoBracket, OutOfRange,
                     PreconditionViolated, VerificationFailed)
from .model import ModelParams, chat, check_assumptions, _sigmas_equal
from .roots import RootSet, solve_characteristic


@dataclass(frozen=True)
class StoppingSolution:
    """Solved boundary shifts plus the frames needed to evaluate w.

    params is the caller's parameter set; iparams/roots are the internal
    (possibly label-swapped) frame in which regime 1 is the one satisfying
    the feasibility conditions. z1 = x1* - chat, z2 = x2* - x1* in that
    frame. g1/g2 residuals are the reduced-system values at (z1, z2).
    """

    case: str                  # "A" | "B" | "C_relabeled"
    z1: float
    z2: float
    zhat2: float
    relabeled: bool
    params: ModelParams
    iparams: ModelParams
    roots: RootSet
    g1_residual: float
    g2_residual: float
    m1_at_0: float
    m2_at_0: float

    def internal_regime(self, i: int) -> int:
        if i not in (1, 2):
            raise OutOfRange(f"regime must be 1 or 2, got {i}")
        return 3 - i if self.relabeled else i

    def shift(self, i_internal: int) -> float:
        return self.z1 if i_internal == 1 else self.z1 + self.z2


def _den0(params: ModelParams, roots: RootSet) -> float:
    # G1 coefficient of u at v=0; equals 1 - kappa, negative for all params
    return roots.a1 + params.lambda2/(params.rho + params.lambda2)


def g1(params: ModelParams, roots: RootSet, u, v):
    rho, l2 = params.rho, params.lambda2
    r = rho/(rho + l2)
    a5 = roots.alpha5
    cv, sv = np.cosh(a5*v), np.sinh(a5*v)
    return ((roots.a1 + (l2 - rho)/(rho + l2) + r*cv)*u
            - (r/a5)*(sv - a5*v*cv) + roots.a2)


def g2(params: ModelParams, roots: RootSet, u, v):
    rho, l2 = params.rho, params.lambda2
    r = rho/(rho + l2)
    a5 = roots.alpha5
    cv, sv = np.cosh(a5*v), np.sinh(a5*v)
    return ((roots.a3 - r*a5*sv)*u - r*(a5*v*sv - cv) + roots.a4)


def zhat2_closed_form(params: ModelParams, roots: RootSet) -> float:
    """Endpoint where M1 diverges: cosh(a5 v) = (kappa (rho+l2) - l2)/rho."""
    rho, l2 = params.rho, params.lambda2
    target = -_den0(params, roots)*(rho + l2)/rho + 1.0
    return math.acosh(target)/roots.alpha5


def zhat2(params: ModelParams, roots: RootSet, xtol: float = 1e-12) -> float:
    """Unique positive zero of the M1 denominator, by bisection.

    The documented precondition (a1 + rho/(a5 (rho+l2)) < 0) is enforced;
    it holds whenever the feasibility conditions do.
    """
    rho, l2 = params.rho, params.lambda2
    if roots.a1 + rho/(roots.alpha5*(rho + l2)) >= 0.0:
        raise PreconditionViolated(
            "a1 + rho/(alpha5 (rho+lambda2)) must be negative")
    r = rho/(rho + l2)

    def h(v):
        return _den0(params, roots) + r*(math.cosh(roots.alpha5*v) - 1.0)

    hi = 1.0/roots.alpha5
    while h(hi) <= 0.0:
        hi *= 2.0
    return bisect(h, 0.0, hi, xtol=xtol)


def m1(params: ModelParams, roots: RootSet, v,
       zhat: Optional[float] = None):
    """u-branch of the reduced system; increasing to +inf on [0, zhat2)."""
    zh = zhat if zhat is not None else zhat2_closed_form(params, roots)
    va = np.asarray(v, dtype=float)
    if np.any(va < 0.0) or np.any(va >= zh):
        raise DomainError(f"M1 domain is [0, zhat2={zh}), got {v}")
    rho, l2 = params.rho, params.lambda2
    r = rho/(rho + l2)
    a5 = roots.alpha5
    cv, sv = np.cosh(a5*va), np.sinh(a5*va)
    out = ((r/a5)*(sv - a5*va*cv) - roots.a2)/(
        roots.a1 + (l2 - rho)/(rho + l2) + r*cv)
    return float(out) if out.ndim == 0 else out


def m2(params: ModelParams, roots: RootSet, v,
       zhat: Optional[float] = None):
    """Second u-branch; decreasing on [0, zhat2] under the feasibility
    conditions (denominator a3 - ... stays negative since a3 < 0)."""
    zh = zhat if zhat is not None else zhat2_closed_form(params, roots)
    va = np.asarray(v, dtype=float)
    if np.any(va < 0.0) or np.any(va > zh*(1.0 + 1e-12)):
        raise DomainError(f"M2 domain is [0, zhat2={zh}], got {v}")
    rho, l2 = params.rho, params.lambda2
    r = rho/(rho + l2)
    a5 = roots.alpha5
    cv, sv = np.cosh(a5*va), np.sinh(a5*va)
    out = (r*(a5*va*sv - cv) - roots.a4)/(roots.a3 - r*a5*sv)
    return float(out) if out.ndim == 0 else out


def case_b_shift_candidates(params: ModelParams, roots: RootSet):
    """The two candidate boundary shifts of the equal-volatility system.

    These are M1(0) and M2(0); they coincide iff sigma1 = sigma2, in which
    case both equal sigma/sqrt(2 rho).
    """
    return m1(params, roots, 0.0), m2(params, roots, 0.0)


def solve_z(params: ModelParams, bisect_tol: float = 1e-12,
            endpoint_eps: float = 1e-10) -> StoppingSolution:
    """Solve the smooth-fit system, detecting the case.

    Order: equal volatilities (1e-14 relative) -> Case B closed form;
    otherwise the feasibility conditions as labeled -> Case A; if they
    fail, swap the regime labels and retry -> Case C solved by symmetry;
    if both labelings fail, AssumptionViolated (no heuristic fallback).
    """
    if _sigmas_equal(params):
        return _solve_case_b(params)
    report = check_assumptions(params)
    if report.solvable_case_a:
        iparams, case, relabeled = params, "A", False
    else:
        swapped = params.swapped()
        report_sw = check_assumptions(swapped)
        if not report_sw.solvable_case_a:
            raise AssumptionViolated(
                "feasibility conditions fail in both regime labelings",
                report=report, swapped_report=report_sw)
        iparams, case, relabeled = swapped, "C_relabeled", True

    roots = solve_characteristic(iparams)
    zh = zhat2(iparams, roots)

    def diff(v):
        return m1(iparams, roots, v, zhat=zh) - m2(iparams, roots, v, zhat=zh)

    eps = endpoint_eps
    lo, hi = eps, zh*(1.0 - endpoint_eps)
    for _ in range(6):
        if diff(lo) < 0.0 < diff(hi):
            break
        eps *= 1e-2
        lo = eps
    else:
        raise NoBracket("M1 - M2 shows no sign change inside (0, zhat2); "
                        "feasibility checks and solver disagree")
    # cheap insurance on the proven shape: single sign change, M2 decreasing
    scan = np.linspace(lo, hi, 65)
    dvals = m1(iparams, roots, scan, zhat=zh) - m2(iparams, roots, scan, zhat=zh)
    if np.count_nonzero(np.diff(np.sign(dvals))) != 1:
        raise NoBracket("M1 - M2 changes sign more than once on (0, zhat2)")

    z2 = bisect(diff, lo, hi, xtol=bisect_tol)
    z1 = m1(iparams, roots, z2, zhat=zh)
    return StoppingSolution(
        case=case, z1=float(z1), z2=float(z2), zhat2=float(zh),
        relabeled=relabeled, params=params, iparams=iparams, roots=roots,
        g1_residual=float(g1(iparams, roots, z1, z2)),
        g2_residual=float(g2(iparams, roots, z1, z2)),
        m1_at_0=m1(iparams, roots, 0.0, zhat=zh),
        m2_at_0=m2(iparams, roots, 0.0, zhat=zh))


def _solve_case_b(params: ModelParams) -> StoppingSolution:
    sigma = params.sigma1
    roots = solve_characteristic(params)
    z1 = sigma/math.sqrt(2.0*params.rho)
    s_a, s_b = case_b_shift_candidates(params, roots)
    if abs(s_a - s_b) > 1e-10*max(1.0, abs(s_a)):
        raise NoBracket(
            f"equal-volatility shift candidates disagree: {s_a} vs {s_b}")
    if abs(s_a - z1) > 1e-10*max(1.0, z1):
        raise NoBracket(
            f"equal-volatility shift {s_a} differs from sigma/sqrt(2 rho)={z1}")
    zh = zhat2_closed_form(params, roots)
    return StoppingSolution(
        case="B", z1=z1, z2=0.0, zhat2=zh, relabeled=False,
        params=params, iparams=params, roots=roots,
        g1_residual=float(g1(params, roots, z1, 0.0)),
        g2_residual=float(g2(params, roots, z1, 0.0)),
        m1_at_0=s_a, m2_at_0=s_b)


def x_star(sol: StoppingSolution, i: int, y):
    """Stopping boundary x*_i(y) = shift_i + chat(y) for the caller's labels."""
    k = sol.internal_regime(i)
    return sol.shift(k) + chat(sol.params, y)


@dataclass(frozen=True)
class WCoefficients:
    """Exponential coefficients of w at a fixed reserve level (internal frame).

    Case A fills A3..B6; Case B fills At3..Bt4. x1star <= x2star are the
    boundary prices at this y.
    """

    case: str
    x1star: float
    x2star: float
    A3: Optional[float] = None
    A4: Optional[float] = None
    B3: Optional[float] = None
    B4: Optional[float] = None
    B5: Optional[float] = None
    B6: Optional[float] = None
    At3: Optional[float] = None
    At4: Optional[float] = None
    Bt3: Optional[float] = None
    Bt4: Optional[float] = None


def w_coefficients(sol: StoppingSolution, y) -> WCoefficients:
    p, rt = sol.iparams, sol.roots
    ch = chat(p, y)
    x1 = sol.z1 + ch
    x2 = x1 + sol.z2
    a3r, a4r = rt.alpha3, rt.alpha4
    if sol.case == "B":
        At3 = (a4r*sol.z1 - 1.0)/(a4r - a3r)*math.exp(-a3r*x1)
        At4 = (1.0 - a3r*sol.z1)/(a4r - a3r)*math.exp(-a4r*x1)
        return WCoefficients(case="B", x1star=x1, x2star=x2,
                             At3=At3, At4=At4, Bt3=At3,
                             Bt4=-(p.lambda2/p.lambda1)*At4)
    rho, l1, l2 = p.rho, p.lambda1, p.lambda2
    phi13 = -0.5*p.sigma1**2*a3r**2 + rho + l1
    phi14 = -0.5*p.sigma1**2*a4r**2 + rho + l1
    a5 = rt.alpha5
    A3 = (a4r*sol.z1 - 1.0)/(a4r - a3r)*math.exp(-a3r*x1)
    A4 = (1.0 - a3r*sol.z1)/(a4r - a3r)*math.exp(-a4r*x1)
    r = rho/(rho + l2)
    zsum = sol.z1 + sol.z2
    B5 = r*math.exp(-a5*x2)*(1.0 + a5*zsum)/(2.0*a5)
    B6 = r*math.exp(a5*x2)*(a5*zsum - 1.0)/(2.0*a5)
    return WCoefficients(case="A", x1star=x1, x2star=x2, A3=A3, A4=A4,
                         B3=phi13/l1*A3, B4=phi14/l1*A4, B5=B5, B6=B6)


def _w_pieces(sol: StoppingSolution, x, i_ext: int, y, order: int, side: int):
    """Piecewise evaluation of w and its x-derivatives (vectorized in x)."""
    k = sol.internal_regime(i_ext)
    p, rt = sol.iparams, sol.roots
    ch = chat(p, y)
    co = w_coefficients(sol, y)
    x1, x2 = co.x1star, co.x2star
    xa = np.asarray(x, dtype=float)
    out = np.empty_like(xa)
    if side < 0:
        in_lo = xa <= x1
        in_hi = xa > x2
    else:
        in_lo = xa < x1
        in_hi = xa >= x2
    in_mid = ~in_lo & ~in_hi
    a3r, a4r, a5 = rt.alpha3, rt.alpha4, rt.alpha5
    if sol.case == "B":
        c3, c4 = (co.At3, co.At4) if k == 1 else (co.Bt3, co.Bt4)
    else:
        c3, c4 = (co.A3, co.A4) if k == 1 else (co.B3, co.B4)
    e3 = np.exp(a3r*xa[in_lo])
    e4 = np.exp(a4r*xa[in_lo])
    pw3 = a3r**order
    pw4 = a4r**order
    out[in_lo] = pw3*c3*e3 + pw4*c4*e4
    if k == 1 or sol.case == "B":
        out[in_mid] = (xa[in_mid] - ch if order == 0
                       else (1.0 if order == 1 else 0.0))
    else:
        e5 = np.exp(a5*xa[in_mid])
        em5 = np.exp(-a5*xa[in_mid])
        lin = p.lambda2/(p.rho + p.lambda2)
        if order == 0:
            out[in_mid] = co.B5*e5 + co.B6*em5 + lin*(xa[in_mid] - ch)
        elif order == 1:
            out[in_mid] = a5*(co.B5*e5 - co.B6*em5) + lin
        else:
            out[in_mid] = a5*a5*(co.B5*e5 + co.B6*em5)
    out[in_hi] = (xa[in_hi] - ch if order == 0
                  else (1.0 if order == 1 else 0.0))
    return float(out) if out.ndim == 0 else out


def w(sol: StoppingSolution, x, i: int, y):
    """Stopping value w(x, i; y); equals the payoff x - chat(y) once x is
    at or above the regime boundary."""
    return _w_pieces(sol, x, i, y, order=0, side=-1)


def w_x(sol: StoppingSolution, x, i: int, y):
    return _w_pieces(sol, x, i, y, order=1, side=-1)


def w_xx(sol: StoppingSolution, x, i: int, y, side: int = -1):
    """Second derivative; discontinuous at the boundaries, so the side
    (-1 left limit, +1 right limit) picks the branch at boundary points."""
    return _w_pieces(sol, x, i, y, order=2, side=side)


def v(sol: StoppingSolution, x, i: int, y):
    """Selling-problem value v = w - f'(y)/rho."""
    p = sol.params
    return w(sol, x, i, y) - p.cost.derivative(y)/p.rho


@dataclass(frozen=True)
class FbpReport:
    y: float
    grid_lo: float
    grid_hi: float
    n_points: int
    worst_ode: float
    worst_ode_x: float
    worst_ineq: float
    worst_ineq_x: float
    worst_dom: float
    worst_dom_x: float
    worst_c1: float
    worst_c1_x: float

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) if k != "n_points"
                else int(getattr(self, k)) for k in (
            "y", "grid_lo", "grid_hi", "n_points", "worst_ode", "worst_ode_x",
            "worst_ineq", "worst_ineq_x", "worst_dom", "worst_dom_x",
            "worst_c1", "worst_c1_x")}


def verify_fbp(sol: StoppingSolution, y, n_points: int = 10000,
               grid=None, ode_tol: float = 1e-7, ineq_tol: float = 1e-7,
               dom_tol: float = 1e-9, c1_tol: float = 1e-6,
               c1_step: float = 1e-6) -> FbpReport:
    """Grid check that w solves the free boundary problem at level y.

    (i) the coupled ODEs hold to ode_tol where equality is required,
    (ii) the operator inequality holds everywhere to ineq_tol (one-sided
    at the boundaries), (iii) w dominates the payoff to dom_tol, and
    (iv) w is C^1 at the boundaries, comparing second-order one-sided
    difference slopes with step c1_step. Raises VerificationFailed with
    the worst offender, otherwise returns the residual report.
    """
    p, rt = sol.iparams, sol.roots
    ch = chat(p, y)
    co = w_coefficients(sol, y)
    x1, x2 = co.x1star, co.x2star
    if grid is None:
        lo, hi = ch - 10.0*sol.z1, x2 + 10.0*sol.z1
    else:
        lo, hi = grid
    xs = np.linspace(lo, hi, n_points)
    h_cell = (hi - lo)/(n_points - 1)
    ext = {1: 2, 2: 1} if sol.relabeled else {1: 1, 2: 2}

    worst_ode, worst_ode_x = 0.0, lo
    worst_ineq, worst_ineq_x = -np.inf, lo
    worst_dom, worst_dom_x = -np.inf, lo
    for k in (1, 2):  # internal labels
        i_ext = ext[k]
        sig = p.sigma(k)
        lam = p.lam(k)
        wk = _w_pieces(sol, xs, i_ext, y, 0, -1)
        wo = _w_pieces(sol, xs, ext[3 - k], y, 0, -1)
        for side in (-1, 1):
            wxx = _w_pieces(sol, xs, i_ext, y, 2, side)
            op = 0.5*sig*sig*wxx - p.rho*wk + lam*(wo - wk)
            j = int(np.argmax(op))
            if op[j] > worst_ineq:
                worst_ineq, worst_ineq_x = float(op[j]), float(xs[j])
            bound = x1 if (k == 1 or sol.case == "B") else x2
            eq = xs < bound - 0.5*h_cell
            if eq.any():
                res = np.abs(op[eq])
                j = int(np.argmax(res))
                if res[j] > worst_ode:
                    worst_ode, worst_ode_x = float(res[j]), float(xs[eq][j])
        gap = (xs - ch) - wk
        j = int(np.argmax(gap))
        if gap[j] > worst_dom:
            worst_dom, worst_dom_x = float(gap[j]), float(xs[j])

    junctions = [(ext[1], x1), (ext[2], x1), (ext[2], x2)]
    if sol.case == "B":
        junctions = [(1, x1), (2, x1)]
    worst_c1, worst_c1_x = 0.0, x1
    h = c1_step
    for i_ext, b in junctions:
        pts = np.array([b - 2*h, b - h, b, b + h, b + 2*h])
        wv = _w_pieces(sol, pts, i_ext, y, 0, -1)
        d_lo = (3.0*wv[2] - 4.0*wv[1] + wv[0])/(2.0*h)
        d_hi = (-3.0*wv[2] + 4.0*wv[3] - wv[4])/(2.0*h)
        if abs(d_hi - d_lo) > worst_c1:
            worst_c1, worst_c1_x = abs(d_hi - d_lo), b

    report = FbpReport(
        y=float(y), grid_lo=float(lo), grid_hi=float(hi), n_points=n_points,
        worst_ode=worst_ode, worst_ode_x=worst_ode_x,
        worst_ineq=float(worst_ineq), worst_ineq_x=worst_ineq_x,
        worst_dom=float(worst_dom), worst_dom_x=worst_dom_x,
        worst_c1=float(worst_c1), worst_c1_x=float(worst_c1_x))
    if worst_ode > ode_tol:
        raise VerificationFailed(
            f"ODE residual {worst_ode} at x={worst_ode_x}", report)
    if worst_ineq > ineq_tol:
        raise VerificationFailed(
            f"operator inequality {worst_ineq} at x={worst_ineq_x}", report)
    if worst_dom > dom_tol:
        raise VerificationFailed(
            f"payoff domination violated by {worst_dom} at x={worst_dom_x}",
            report)
    if worst_c1 > c1_tol:
        raise VerificationFailed(
            f"C1 fit gap {worst_c1} at boundary x={worst_c1_x}", report)
    return report


def perturbed(sol: StoppingSolution, dz2: float) -> StoppingSolution:
    """Copy of sol with z2 shifted (verification-failure test hook)."""
    return replace(sol, z2=sol.z2 + dz2)
