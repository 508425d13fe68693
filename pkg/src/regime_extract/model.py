"""Problem parameters, maintenance-cost families and feasibility conditions.

Price follows an arithmetic Brownian motion whose volatility is modulated
by a two-state Markov chain (rates lambda1, lambda2 of leaving states 1, 2).
Extraction pays X - c per unit; holding a reserve level y costs f(y) per
unit time, with f strictly increasing, strictly convex and f(0) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._numerics import bisect
from .errors import CostNotConvex, NonPositiveParameter, OutOfRange

COST_KINDS = ("exponential", "quadratic", "custom")


def _vectorized(fn: Callable) -> Callable:
    """fn as-is when it accepts arrays, else a numpy-vectorized wrapper."""
    try:
        out = fn(np.array([0.0, 0.5]))
        if np.shape(out) == (2,):
            return fn
    except Exception:
        pass
    wrapped = np.vectorize(fn, otypes=[float])

    def call(y):
        out = wrapped(y)
        return float(out) if np.ndim(y) == 0 else out

    return call


@dataclass(frozen=True)
class CostFunction:
    """Reserve maintenance cost f with closed-form derivative.

    Built-in families: exponential f(y) = gamma*(e^y - 1) and quadratic
    f(y) = alpha*y^2 + beta*y. Any other (f, f') pair can be supplied
    through `custom`; its derivative inverse then falls back to bisection.
    """

    kind: str
    gamma: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    f: Optional[Callable] = None
    fprime: Optional[Callable] = None

    @staticmethod
    def exponential(gamma: float) -> "CostFunction":
        if not gamma > 0:
            raise CostNotConvex(f"exponential cost needs gamma > 0, got {gamma}")
        return CostFunction(kind="exponential", gamma=float(gamma))

    @staticmethod
    def quadratic(alpha: float, beta: float) -> "CostFunction":
        if not alpha > 0 or not beta > 0:
            raise CostNotConvex(
                f"quadratic cost needs alpha, beta > 0, got {alpha}, {beta}")
        return CostFunction(kind="quadratic", alpha=float(alpha), beta=float(beta))

    @staticmethod
    def custom(f: Callable, fprime: Callable) -> "CostFunction":
        cost = CostFunction(kind="custom", f=_vectorized(f),
                            fprime=_vectorized(fprime))
        cost._check_custom()
        return cost

    def value(self, y):
        if self.kind == "exponential":
            return self.gamma*(np.exp(y) - 1.0)
        if self.kind == "quadratic":
            return self.alpha*np.square(y) + self.beta*y
        return self.f(y)

    def derivative(self, y):
        if self.kind == "exponential":
            return self.gamma*np.exp(y)
        if self.kind == "quadratic":
            return 2.0*self.alpha*y + self.beta
        return self.fprime(y)

    def derivative_inverse(self, fp):
        """y with f'(y) = fp; closed form for the built-in families.

        Input is clipped to [f'(0), f'(1)] so the result lands in [0, 1].
        """
        lo, hi = self.derivative(0.0), self.derivative(1.0)
        fp = np.clip(fp, lo, hi)
        if self.kind == "exponential":
            return np.log(fp/self.gamma)
        if self.kind == "quadratic":
            return (fp - self.beta)/(2.0*self.alpha)
        scalar = np.ndim(fp) == 0
        vals = np.atleast_1d(np.asarray(fp, dtype=float))
        out = np.array([bisect(lambda y, t=t: self.fprime(y) - t, 0.0, 1.0,
                               xtol=1e-14) for t in vals])
        return out[0] if scalar else out

    def value_from_derivative(self, fp):
        """f(y) evaluated at the y with f'(y) = fp (no transcendental call)."""
        if self.kind == "exponential":
            return fp - self.gamma
        if self.kind == "quadratic":
            return (np.square(fp) - self.beta**2)/(4.0*self.alpha)
        return self.value(self.derivative_inverse(fp))

    def _check_custom(self, n: int = 1001, tol: float = 1e-9) -> None:
        if self.value(0.0) != 0.0:
            raise CostNotConvex(f"f(0) must be exactly 0, got {self.value(0.0)}")
        ys = np.linspace(0.0, 1.0, n)
        if not np.all(self.derivative(ys) > 0):
            raise CostNotConvex("f' must be strictly positive on [0, 1]")
        # convexity from second differences of f' (f'' not required)
        h = ys[1] - ys[0]
        d2 = np.diff(self.derivative(ys))/h
        if not np.all(d2 > -tol):
            raise CostNotConvex("sampled f'' is negative on [0, 1]")


@dataclass(frozen=True)
class ModelParams:
    """Validated market and cost parameters. Construct through validate()."""

    rho: float
    sigma1: float
    sigma2: float
    lambda1: float
    lambda2: float
    c: float
    cost: CostFunction

    def sigma(self, i: int) -> float:
        return self.sigma1 if i == 1 else self.sigma2

    def lam(self, i: int) -> float:
        return self.lambda1 if i == 1 else self.lambda2

    def swapped(self) -> "ModelParams":
        """Regime labels exchanged (used to reduce Case C to Case A)."""
        return ModelParams(self.rho, self.sigma2, self.sigma1,
                           self.lambda2, self.lambda1, self.c, self.cost)


def validate(rho, sigma1, sigma2, lambda1, lambda2, c, cost) -> ModelParams:
    """Build ModelParams, rejecting (never clamping) bad inputs."""
    for name, val in (("rho", rho), ("sigma1", sigma1), ("sigma2", sigma2),
                      ("lambda1", lambda1), ("lambda2", lambda2), ("c", c)):
        val = float(val)
        if not math.isfinite(val) or val <= 0.0:
            raise NonPositiveParameter(name, val)
    if not isinstance(cost, CostFunction):
        raise CostNotConvex(f"cost must be a CostFunction, got {type(cost)}")
    if cost.kind not in COST_KINDS:
        raise CostNotConvex(f"unknown cost kind {cost.kind!r}")
    if cost.kind == "exponential" and not (cost.gamma and cost.gamma > 0):
        raise CostNotConvex("exponential cost needs gamma > 0")
    if cost.kind == "quadratic" and not (
            cost.alpha and cost.alpha > 0 and cost.beta and cost.beta > 0):
        raise CostNotConvex("quadratic cost needs alpha, beta > 0")
    return ModelParams(float(rho), float(sigma1), float(sigma2),
                       float(lambda1), float(lambda2), float(c), cost)


def params_from_config(cfg: dict) -> ModelParams:
    """ModelParams from the JSON config schema.

    Schema: {"rho","sigma1","sigma2","lambda1","lambda2","c",
             "cost": {"type":"exp","gamma":g} | {"type":"quad","alpha":a,"beta":b}}
    """
    try:
        cost_cfg = cfg["cost"]
        ctype = cost_cfg["type"]
    except (KeyError, TypeError) as exc:
        raise KeyError(f"config missing cost section: {exc}") from exc
    if ctype in ("exp", "exponential"):
        if cost_cfg.get("gamma") is None or float(cost_cfg["gamma"]) <= 0:
            raise CostNotConvex("exponential cost needs gamma > 0")
        cost = CostFunction.exponential(float(cost_cfg["gamma"]))
    elif ctype in ("quad", "quadratic"):
        a, b = cost_cfg.get("alpha"), cost_cfg.get("beta")
        if a is None or b is None or float(a) <= 0 or float(b) <= 0:
            raise CostNotConvex("quadratic cost needs alpha, beta > 0")
        cost = CostFunction.quadratic(float(a), float(b))
    else:
        raise CostNotConvex(f"unknown cost type {ctype!r}")
    return validate(cfg["rho"], cfg["sigma1"], cfg["sigma2"],
                    cfg["lambda1"], cfg["lambda2"], cfg["c"], cost)


def phi(params: ModelParams, i: int, alpha) -> float:
    """Phi_i(alpha) = -sigma_i^2 alpha^2 / 2 + rho + lambda_i."""
    if i not in (1, 2):
        raise OutOfRange(f"regime must be 1 or 2, got {i}")
    return -0.5*params.sigma(i)**2*np.square(alpha) + params.rho + params.lam(i)


def chat(params: ModelParams, y) -> float:
    """Effective selling cost c - f'(y)/rho, strictly decreasing in y."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise OutOfRange(f"reserve level must lie in [0, 1], got {y}")
    out = params.c - params.cost.derivative(y)/params.rho
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AssumptionReport:
    """Numeric record of the solvability conditions.

    a5_le_1, cond2, cond3, cond4 are the four sufficient conditions for the
    smooth-fit system to have a unique solution; assm2 is the stronger
    volatility restriction used by the candidate-value verification;
    lemma_signs records the (unconditional) sign pattern of a1..a4.
    all_ok is the conjunction of the five condition flags. In the equal
    volatility case the conditions are not required: flags are bypassed and
    case_b is set.
    """

    a5_le_1: bool
    cond2: bool
    cond3: bool
    cond4: bool
    assm2: bool
    lemma_signs: bool
    all_ok: bool
    case_b: bool = False
    values: dict = field(default_factory=dict)

    @property
    def solvable_case_a(self) -> bool:
        """The four conditions the smooth-fit solver itself needs; the
        stronger volatility cap (assm2) matters only for verification."""
        return self.a5_le_1 and self.cond2 and self.cond3 and self.cond4

    def to_dict(self) -> dict:
        return {
            "a5_le_1": self.a5_le_1, "cond2": self.cond2, "cond3": self.cond3,
            "cond4": self.cond4, "assm2": self.assm2,
            "lemma_signs": self.lemma_signs, "all_ok": self.all_ok,
            "case_b": self.case_b,
            "values": {k: float(v) for k, v in self.values.items()},
        }


def condition_values(rho, sigma1, sigma2, lambda1, lambda2):
    """Left-hand sides of the feasibility conditions, vectorized.

    Returns (alpha5, lhs2, lhs3, lhs4, a5_cap, a1, a2, a3, a4) where
    lhs2 = a1 + rho/(alpha5 (rho+lambda2)),
    lhs3 = a1 + cosh(1) rho/(alpha5 (rho+lambda2)),
    lhs4 = (rho/(rho+lambda2) + a4)/a3 - a2/lhs2,
    a5_cap = min(lambda2, rho)/lambda2.
    """
    p1 = rho + lambda1
    p2 = rho + lambda2
    ao = 0.25*sigma1**2*sigma2**2
    bo = -0.5*sigma1**2*p2 - 0.5*sigma2**2*p1
    co = p1*p2 - lambda1*lambda2
    q = 0.5*(-bo + np.sqrt(bo*bo - 4.0*ao*co))
    beta1 = q/ao
    beta2 = co/q
    a3r, a4r = np.sqrt(beta2), np.sqrt(beta1)
    alpha5 = np.sqrt(2.0*p2/sigma2**2)
    phi13 = -0.5*sigma1**2*beta2 + p1
    phi14 = -0.5*sigma1**2*beta1 + p1
    denom = lambda1*(a4r - a3r)
    a1 = -(a4r*phi13 - a3r*phi14)/denom + rho/p2
    a2 = (phi13 - phi14)/denom
    a3 = a3r*a4r*(phi14 - phi13)/denom
    a4 = (a3r*phi13 - a4r*phi14)/denom + lambda2/p2
    r5 = rho/(alpha5*p2)
    lhs2 = a1 + r5
    lhs3 = a1 + np.cosh(1.0)*r5
    lhs4 = (rho/p2 + a4)/a3 - a2/lhs2
    a5_cap = np.minimum(lambda2, rho)/lambda2
    return alpha5, lhs2, lhs3, lhs4, a5_cap, a1, a2, a3, a4


def check_assumptions(params: ModelParams, roots=None, eps: float = 0.0
                      ) -> AssumptionReport:
    """Evaluate every feasibility condition with exact inequality directions.

    eps > 0 tightens the strict inequalities so borderline inputs are
    rejected deterministically. A report is always produced.
    """
    case_b = _sigmas_equal(params)
    alpha5, lhs2, lhs3, lhs4, a5_cap, a1, a2, a3, a4 = condition_values(
        params.rho, params.sigma1, params.sigma2,
        params.lambda1, params.lambda2)
    lemma = bool(a1 < -eps and a2 > eps and a3 < -eps and a4 > eps)
    values = {"alpha5": alpha5, "lhs2": lhs2, "lhs3": lhs3, "lhs4": lhs4,
              "a5_cap": a5_cap, "a1": a1, "a2": a2, "a3": a3, "a4": a4}
    if case_b:
        return AssumptionReport(True, True, True, True, True, lemma,
                                all_ok=True, case_b=True, values=values)
    f1 = bool(alpha5 <= 1.0)
    f2 = bool(lhs2 < -eps)
    f3 = bool(lhs3 >= 0.0)
    f4 = bool(lhs4 < -eps)
    f5 = bool(alpha5 <= a5_cap)
    return AssumptionReport(f1, f2, f3, f4, f5, lemma,
                            all_ok=f1 and f2 and f3 and f4 and f5,
                            values=values)


def feasibility_scan(rho, lambda1, lambda2, sigma1_grid, sigma2_grid):
    """Rasterized Assumption-3.3-style feasibility over a volatility box.

    Returns boolean arrays (feasible, case_b) of shape
    (len(sigma2_grid), len(sigma1_grid)). Equal-volatility cells are
    marked case_b and excluded from feasible/infeasible classification.
    """
    s1 = np.asarray(sigma1_grid, dtype=float)[None, :]
    s2 = np.asarray(sigma2_grid, dtype=float)[:, None]
    alpha5, lhs2, lhs3, lhs4, a5_cap, *_ = condition_values(
        rho, s1, s2, lambda1, lambda2)
    feasible = (alpha5 <= 1.0) & (lhs2 < 0.0) & (lhs3 >= 0.0) & (lhs4 < 0.0)
    case_b = np.abs(s1 - s2) <= 1e-14*np.maximum(s1, s2)
    feasible &= ~case_b
    return feasible, case_b


def _sigmas_equal(params: ModelParams) -> bool:
    return abs(params.sigma1 - params.sigma2) <= 1e-14*max(
        params.sigma1, params.sigma2)
