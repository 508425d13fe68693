"""Path simulation of the regime-switching price and extraction policies.

The chain is simulated exactly (exponential holding times); the price is
arithmetic Brownian, so conditional on the chain the Euler increments are
exact as well. Jump instants refine the uniform grid: each step that
contains jumps is split into sub-intervals and the policy is applied at
every jump instant and at the step end. Reflection policies project the
reserve onto the boundary, Delta nu = (Y - b(regime, X))^+, which places
a lump at t = 0 and, because the regime-1 boundary lies below the
regime-2 one, automatic lumps at 2 -> 1 switches.

estimate_value runs path pairs in fixed-size batches whose generators are
seeded from (base_seed, batch_index); aggregation is in batch order, so
results are bit-reproducible and independent of worker scheduling.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .control import ControlSolution, b_star, external_shift
from .errors import OutOfRange, PreconditionViolated, SRPViolated
from .model import ModelParams

DEFAULT_BATCH_PAIRS = 25_000


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls. horizon=None resolves to 10/rho at run time
    (discount tail ~ e^-10); the truncation tail bound is reported with
    every outcome so it can be folded into comparison budgets."""

    dt: float = 1e-3
    horizon: Optional[float] = None
    n_paths: int = 100_000
    base_seed: int = 20_240_601
    antithetic: bool = True
    batch_pairs: int = DEFAULT_BATCH_PAIRS

    def resolved_horizon(self, params: ModelParams) -> float:
        T = self.horizon if self.horizon is not None else 10.0/params.rho
        if self.dt <= 0 or T <= 0 or self.dt > T:
            raise OutOfRange(f"need 0 < dt <= horizon, got dt={self.dt}, T={T}")
        if self.n_paths < 1:
            raise OutOfRange(f"n_paths must be >= 1, got {self.n_paths}")
        return T


@dataclass(frozen=True)
class Policy:
    """Extraction rule. All kinds produce admissible controls: nu starts
    at zero, never decreases and never drives the reserve negative."""

    kind: str
    bfun: Optional[Callable] = None  # (regime, x_array) -> reserve level

    @staticmethod
    def reflect_optimal() -> "Policy":
        return Policy("reflect_optimal")

    @staticmethod
    def never_extract() -> "Policy":
        return Policy("never_extract")

    @staticmethod
    def extract_all_at_start() -> "Policy":
        return Policy("extract_all_at_start")

    @staticmethod
    def reflect_at_custom_boundary(bfun: Callable) -> "Policy":
        return Policy("reflect_at_custom_boundary", bfun=bfun)

    @property
    def policy_id(self) -> str:
        return self.kind


@dataclass(frozen=True)
class SimOutcome:
    mean: float
    std_error: float
    n_paths: int
    tail_bound: float
    policy_id: str
    dt: float
    horizon: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error,
                "n_paths": self.n_paths, "tail_bound": self.tail_bound,
                "policy_id": self.policy_id, "dt": self.dt,
                "horizon": self.horizon}


@dataclass
class Trace:
    """Uniform-grid path record; jump-instant extractions fold into the
    enclosing step's dnu. Columns follow the CSV dump format."""

    t: np.ndarray          # (K+1,)
    regime: np.ndarray     # (K+1, n) int8
    X: np.ndarray          # (K+1, n)
    Y: np.ndarray          # (K+1, n)
    dnu: np.ndarray        # (K+1, n)
    disc_inc: np.ndarray   # (K+1, n)
    dt: float
    policy_id: str

    @property
    def n_paths(self) -> int:
        return self.X.shape[1]

    def payoffs(self) -> np.ndarray:
        return self.disc_inc.sum(axis=0)


def simulate_chain(params: ModelParams, i0: int, T: float, rng) -> list:
    """Exact event times of the two-state chain: [(time, new_state), ...]."""
    if T <= 0:
        raise OutOfRange(f"horizon must be positive, got {T}")
    out = []
    t, i = 0.0, i0
    while True:
        t += rng.exponential(1.0/params.lam(i))
        if t >= T:
            return out
        i = 3 - i
        out.append((t, i))


def resolve_workers() -> int:
    """Worker cap from REGIME_EXTRACT_THREADS (unset -> 1, 0 -> auto)."""
    raw = os.environ.get("REGIME_EXTRACT_THREADS", "")
    if raw.strip() == "":
        return 1
    n = int(raw)
    if n < 0:
        raise OutOfRange(f"REGIME_EXTRACT_THREADS must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def tail_bound(cs: ControlSolution, T: float) -> float:
    """e^{-rho T} (f(1)/rho + sup |x - c|) over the default verifier grid."""
    p = cs.params
    sol = cs.stopping
    from .model import chat
    x2_at_0 = sol.z1 + sol.z2 + chat(p, 0.0)
    lo = x2_at_0 - 5.0*sol.z1 - 5.0
    hi = x2_at_0 + 5.0
    sup = max(abs(lo - p.c), abs(hi - p.c))
    return math.exp(-p.rho*T)*(p.cost.value(1.0)/p.rho + sup)


def _boundary_closure(cs: ControlSolution, policy: Policy):
    if policy.kind == "reflect_optimal":
        return lambda i_arr, x_arr: _bstar_vec(cs, i_arr, x_arr)
    if policy.kind == "reflect_at_custom_boundary":
        fn = policy.bfun
        return lambda i_arr, x_arr: np.clip(fn(i_arr, x_arr), 0.0, 1.0)
    raise PreconditionViolated(f"{policy.kind} has no reflecting boundary")


def _bstar_vec(cs: ControlSolution, i_arr, x_arr):
    p = cs.params
    sh1 = external_shift(cs, 1)
    sh2 = external_shift(cs, 2)
    sh = np.where(np.asarray(i_arr) == 1, sh1, sh2)
    return p.cost.derivative_inverse(p.rho*(p.c + sh - np.asarray(x_arr)))


# ---------------------------------------------------------------------------
# fast closed-form engine (reflect_optimal, built-in cost families)

def _fast_reflect_batch(cs: ControlSolution, x0, y0, i0, n_pairs, dt, K,
                        seed, batch_idx, antithetic, compact_every=256):
    p = cs.params
    cost = p.cost
    rho, c = p.rho, p.c
    sol = cs.stopping
    sh_of = {1: external_shift(cs, 1), 2: external_shift(cs, 2)}
    shift_tbl = np.array([np.nan, sh_of[1], sh_of[2]])
    sig_tbl = np.array([np.nan, p.sigma1, p.sigma2])
    lam_tbl = np.array([np.nan, p.lambda1, p.lambda2])

    ss = np.random.SeedSequence([seed, batch_idx])
    gc, gn = (np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(2))
    m = 2 if antithetic else 1
    n = n_pairs
    disc = np.exp(-rho*dt*np.arange(K + 1))
    sqdt = math.sqrt(dt)

    i = np.full(n, i0, dtype=np.int64)
    R = gc.exponential(1.0/lam_tbl[i0], size=n)
    s_cur = np.full(n, sig_tbl[i0]*sqdt)
    X = np.full((m, n), float(x0))
    Y = np.full((m, n), float(y0))
    fpY = np.full((m, n), float(cost.derivative(y0)))
    fY = np.full((m, n), float(cost.value(y0)))
    pay = np.zeros((m, n))
    dlast = np.ones((m, n))
    shift_p = np.full(n, shift_tbl[i0])
    xthr = shift_p + c - fpY/rho
    fp_lo, fp_hi = float(cost.derivative(0.0)), float(cost.derivative(1.0))

    pay_done = []

    def extract(mm, sel, d):
        Xs = X[mm, sel]
        g = rho*(c + shift_p[sel] - Xs)
        fp_new = np.clip(g, fp_lo, fp_hi)
        y_new = cost.derivative_inverse(fp_new)
        dnu = Y[mm, sel] - y_new
        pay[mm, sel] += d*((Xs - c)*dnu) - fY[mm, sel]*(dlast[mm, sel] - d)/rho
        Y[mm, sel] = y_new
        fpY[mm, sel] = fp_new
        fY[mm, sel] = cost.value_from_derivative(fp_new)
        dlast[mm, sel] = d
        xthr[mm, sel] = np.where(y_new > 0.0,
                                 shift_p[sel] + c - fp_new/rho, np.inf)

    for mm in range(m):
        sel = np.flatnonzero(X[mm] > xthr[mm])
        if sel.size:
            extract(mm, sel, 1.0)

    for k in range(K):
        Z = gn.standard_normal(n)
        inc = Z*s_cur
        X[0] += inc
        if m == 2:
            X[1] -= inc
        jumped = R < dt
        R -= dt
        if jumped.any():
            jj = np.flatnonzero(jumped)
            X[0, jj] -= inc[jj]
            if m == 2:
                X[1, jj] += inc[jj]
            rem = np.full(jj.size, dt)
            Rj = R[jj] + dt
            tloc = np.zeros(jj.size)
            act = np.arange(jj.size)
            while act.size:
                pp = jj[act]
                tau = np.minimum(Rj[act], rem[act])
                Zs = gn.standard_normal(act.size)
                incs = sig_tbl[i[pp]]*np.sqrt(tau)*Zs
                X[0, pp] += incs
                if m == 2:
                    X[1, pp] -= incs
                tloc[act] += tau
                hit = Rj[act] < rem[act]
                rem[act] -= tau
                Rj[act] -= tau
                hp = pp[hit]
                if hp.size:
                    ha = act[hit]
                    i[hp] = 3 - i[hp]
                    newR = gc.exponential(1.0/lam_tbl[i[hp]])
                    Rj[ha] = newR
                    s_cur[hp] = sig_tbl[i[hp]]*sqdt
                    shift_p[hp] = shift_tbl[i[hp]]
                    d_now = disc[k]*np.exp(-rho*tloc[ha])
                    for mm in range(m):
                        live = Y[mm, hp] > 0.0
                        xthr[mm, hp] = np.where(
                            live, shift_p[hp] + c - fpY[mm, hp]/rho, np.inf)
                        csel = np.flatnonzero(live & (X[mm, hp] > xthr[mm, hp]))
                        if csel.size:
                            extract(mm, hp[csel], d_now[csel])
                keep = rem[act] > 1e-15
                R[pp[~keep]] = Rj[act[~keep]]
                act = act[keep]
        for mm in range(m):
            trig = X[mm] > xthr[mm]
            if trig.any():
                extract(mm, np.flatnonzero(trig), disc[k + 1])
        if compact_every and (k + 1) % compact_every == 0 and n > 64:
            done = (Y == 0.0).all(axis=0)
            if done.mean() > 0.25:
                keep = ~done
                pay_done.append(pay[:, done].copy())
                i, R, s_cur = i[keep], R[keep], s_cur[keep]
                shift_p = shift_p[keep]
                X, Y, fpY, fY = X[:, keep], Y[:, keep], fpY[:, keep], fY[:, keep]
                pay, dlast, xthr = pay[:, keep], dlast[:, keep], xthr[:, keep]
                n = int(keep.sum())
    pay = pay - fY*(dlast - disc[K])/rho
    return np.concatenate(pay_done + [pay], axis=1) if pay_done else pay


# ---------------------------------------------------------------------------
# generic engine (any policy; optional trace recording)

def _generic_batch(cs: ControlSolution, x0, y0, i0, policy, n_pairs, dt, K,
                   seed, batch_idx, antithetic, record=False):
    p = cs.params
    cost = p.cost
    rho, c = p.rho, p.c
    sig_tbl = np.array([np.nan, p.sigma1, p.sigma2])
    lam_tbl = np.array([np.nan, p.lambda1, p.lambda2])

    ss = np.random.SeedSequence([seed, batch_idx])
    gc, gn = (np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(2))
    m = 2 if antithetic else 1
    n = n_pairs
    N = m*n
    disc = np.exp(-rho*dt*np.arange(K + 1))
    sqdt = math.sqrt(dt)

    reflecting = policy.kind in ("reflect_optimal", "reflect_at_custom_boundary")
    bound = _boundary_closure(cs, policy) if reflecting else None

    i = np.full(n, i0, dtype=np.int64)
    R = gc.exponential(1.0/lam_tbl[i0], size=n)
    X = np.full((m, n), float(x0))
    Y = np.full((m, n), float(y0))
    pay = np.zeros((m, n))

    trace = None
    if record:
        ts = dt*np.arange(K + 1)
        trace = Trace(t=ts, regime=np.empty((K + 1, N), dtype=np.int8),
                      X=np.empty((K + 1, N)), Y=np.empty((K + 1, N)),
                      dnu=np.zeros((K + 1, N)), disc_inc=np.zeros((K + 1, N)),
                      dt=dt, policy_id=policy.policy_id)

    def apply_policy(d_now, members=None, paths=None, initial=False):
        """Extraction at the current state; returns per-entry revenue."""
        if policy.kind == "never_extract":
            return None
        if policy.kind == "extract_all_at_start" and not initial:
            return None
        sel = slice(None) if paths is None else paths
        for mm in (range(m) if members is None else members):
            Xs = X[mm, sel]
            if policy.kind == "extract_all_at_start":
                dnu = Y[mm, sel].copy()
            else:
                ii = i[sel] if paths is not None else i
                dnu = np.maximum(Y[mm, sel] - bound(ii, Xs), 0.0)
            rev = d_now*(Xs - c)*dnu
            pay[mm, sel] += rev
            Y[mm, sel] -= dnu
            if record:
                k_row = 0 if initial else k_rec
                cols = (np.arange(n) if paths is None else paths) + mm*n
                trace.dnu[k_row, cols] += dnu
                trace.disc_inc[k_row, cols] += rev
        return None

    k_rec = 0
    apply_policy(1.0, initial=True)
    if record:
        trace.regime[0] = np.tile(i, m)
        trace.X[0] = X.reshape(-1)
        trace.Y[0] = Y.reshape(-1)

    for k in range(K):
        k_rec = k + 1
        Z = gn.standard_normal(n)
        inc = Z*sig_tbl[i]*sqdt
        X[0] += inc
        if m == 2:
            X[1] -= inc
        cost_lo, cost_hi = disc[k], disc[k + 1]
        step_cost = (cost_lo - cost_hi)/rho  # per unit f(Y), no-jump case
        fYv = cost.value(Y)
        jumpmask = R < dt
        R -= dt
        if jumpmask.any():
            jj = np.flatnonzero(jumpmask)
            X[0, jj] -= inc[jj]
            if m == 2:
                X[1, jj] += inc[jj]
            rem = np.full(jj.size, dt)
            Rj = R[jj] + dt
            tloc = np.zeros(jj.size)
            act = np.arange(jj.size)
            while act.size:
                pp = jj[act]
                tau = np.minimum(Rj[act], rem[act])
                Zs = gn.standard_normal(act.size)
                incs = sig_tbl[i[pp]]*np.sqrt(tau)*Zs
                X[0, pp] += incs
                if m == 2:
                    X[1, pp] -= incs
                d0 = disc[k]*np.exp(-rho*tloc[act])
                d1 = disc[k]*np.exp(-rho*(tloc[act] + tau))
                for mm in range(m):
                    run = cost.value(Y[mm, pp])*(d0 - d1)/rho
                    pay[mm, pp] -= run
                    if record:
                        trace.disc_inc[k_rec, pp + mm*n] -= run
                tloc[act] += tau
                hit = Rj[act] < rem[act]
                rem[act] -= tau
                Rj[act] -= tau
                hp = pp[hit]
                if hp.size:
                    ha = act[hit]
                    i[hp] = 3 - i[hp]
                    newR = gc.exponential(1.0/lam_tbl[i[hp]])
                    Rj[ha] = newR
                    if reflecting:
                        apply_policy(disc[k]*np.exp(-rho*tloc[ha]), paths=hp)
                keep = rem[act] > 1e-15
                R[pp[~keep]] = Rj[act[~keep]]
                act = act[keep]
            nj = ~jumpmask
            for mm in range(m):
                run = fYv[mm, nj]*step_cost
                pay[mm, nj] -= run
                if record:
                    trace.disc_inc[k_rec, np.flatnonzero(nj) + mm*n] -= run
        else:
            pay -= fYv*step_cost
            if record:
                trace.disc_inc[k_rec] -= (fYv*step_cost).reshape(-1)
        apply_policy(disc[k + 1])
        if record:
            trace.regime[k_rec] = np.tile(i, m)
            trace.X[k_rec] = X.reshape(-1)
            trace.Y[k_rec] = Y.reshape(-1)
    return pay, trace


def simulate_traces(cs: ControlSolution, x0, y0, i0, policy: Policy,
                    cfg: SimConfig, n_paths: int) -> Trace:
    """Record full uniform-grid traces for n_paths paths (memory permitting)."""
    T = cfg.resolved_horizon(cs.params)
    K = int(round(T/cfg.dt))
    m = 2 if cfg.antithetic else 1
    if cfg.antithetic and n_paths % 2:
        raise PreconditionViolated("antithetic tracing needs even n_paths")
    need = (K + 1)*n_paths*8*4
    if need > 2**31:
        raise OutOfRange(f"trace would need {need/2**30:.1f} GiB; "
                         "reduce n_paths, dt resolution or horizon")
    _, trace = _generic_batch(cs, x0, y0, i0, policy, n_paths//m, cfg.dt, K,
                              cfg.base_seed, 0, cfg.antithetic, record=True)
    return trace


def simulate_path(cs: ControlSolution, x0, y0, i0, policy: Policy,
                  cfg: SimConfig, path_index: int) -> float:
    """One path, scalar loop, seeded from (base_seed, path_index)."""
    p = cs.params
    if not 0.0 <= y0 <= 1.0:
        raise OutOfRange(f"reserve level must lie in [0, 1], got {y0}")
    T = cfg.resolved_horizon(p)
    K = int(round(T/cfg.dt))
    ss = np.random.SeedSequence([cfg.base_seed, path_index])
    gchain, gnoise = (np.random.Generator(np.random.PCG64(s))
                      for s in ss.spawn(2))
    jumps = simulate_chain(p, i0, T, gchain)
    events = sorted({round(k*cfg.dt, 12) for k in range(K + 1)}
                    | {t for t, _ in jumps})
    jump_at = dict(jumps)
    reflecting = policy.kind in ("reflect_optimal", "reflect_at_custom_boundary")
    bound = _boundary_closure(cs, policy) if reflecting else None

    x, y, i = float(x0), float(y0), int(i0)
    pay = 0.0

    def extract_now(t):
        nonlocal y, pay
        if policy.kind == "never_extract":
            return
        if policy.kind == "extract_all_at_start":
            dnu = y if t == 0.0 else 0.0
        else:
            dnu = max(y - float(bound(np.array([i]), np.array([x]))[0]), 0.0)
        if dnu > 0.0:
            pay += math.exp(-p.rho*t)*(x - p.c)*dnu
            y -= dnu

    extract_now(0.0)
    t_prev = 0.0
    for t in events[1:]:
        tau = t - t_prev
        if tau > 0:
            x += p.sigma(i)*math.sqrt(tau)*gnoise.standard_normal()
            pay -= p.cost.value(y)*(
                math.exp(-p.rho*t_prev) - math.exp(-p.rho*t))/p.rho
        if t in jump_at:
            i = jump_at[t]
            if reflecting:
                extract_now(t)
        else:
            extract_now(t)
        t_prev = t
    return pay


def _deterministic_value(cs: ControlSolution, x0, y0, policy: Policy,
                         T: float) -> Optional[float]:
    p = cs.params
    if policy.kind == "never_extract":
        return -p.cost.value(y0)*(1.0 - math.exp(-p.rho*T))/p.rho
    if policy.kind == "extract_all_at_start":
        return (x0 - p.c)*y0
    return None


def estimate_value(cs: ControlSolution, x0, y0, i0, policy: Policy,
                   cfg: SimConfig) -> SimOutcome:
    """Mean discounted payoff and standard error over cfg.n_paths paths.

    With antithetic pairing (default) the independent sampling unit is the
    pair, so std_error = std(pair means)/sqrt(n_pairs). Deterministic
    policies reduce to their closed-form payoff with zero error.
    """
    p = cs.params
    if not 0.0 <= y0 <= 1.0:
        raise OutOfRange(f"reserve level must lie in [0, 1], got {y0}")
    if i0 not in (1, 2):
        raise OutOfRange(f"regime must be 1 or 2, got {i0}")
    T = cfg.resolved_horizon(p)
    K = int(round(T/cfg.dt))
    tb = tail_bound(cs, T)

    det = _deterministic_value(cs, x0, y0, policy, T)
    if det is not None:
        return SimOutcome(mean=float(det), std_error=0.0, n_paths=cfg.n_paths,
                          tail_bound=tb, policy_id=policy.policy_id,
                          dt=cfg.dt, horizon=T)

    m = 2 if cfg.antithetic else 1
    if cfg.antithetic and cfg.n_paths % 2:
        raise PreconditionViolated("antithetic estimation needs even n_paths")
    n_units = cfg.n_paths//m
    batch = max(1, min(cfg.batch_pairs, n_units))
    sizes = [batch]*(n_units//batch)
    if n_units % batch:
        sizes.append(n_units % batch)

    fast = (policy.kind == "reflect_optimal"
            and p.cost.kind in ("exponential", "quadratic"))

    def run(args):
        bidx, size = args
        if fast:
            return _fast_reflect_batch(cs, x0, y0, i0, size, cfg.dt, K,
                                       cfg.base_seed, bidx, cfg.antithetic)
        pay, _ = _generic_batch(cs, x0, y0, i0, policy, size, cfg.dt, K,
                                cfg.base_seed, bidx, cfg.antithetic)
        return pay

    tasks = list(enumerate(sizes))
    workers = resolve_workers()
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pays = list(pool.map(run, tasks))
    else:
        pays = [run(t) for t in tasks]
    samples = np.concatenate([pp.mean(axis=0) for pp in pays])
    mean = float(samples.mean())
    se = (float(samples.std(ddof=1))/math.sqrt(samples.size)
          if samples.size > 1 else float("inf"))
    return SimOutcome(mean=mean, std_error=se, n_paths=cfg.n_paths,
                      tail_bound=tb, policy_id=policy.policy_id,
                      dt=cfg.dt, horizon=T)


def skorokhod_check(cs: ControlSolution, trace: Trace,
                    barrier_tol: float = 1e-9, dnu_tol: float = 1e-12) -> bool:
    """Discrete Skorokhod conditions on a recorded trace (one-step slack).

    (1) after every step the reserve sits at or below the boundary of the
    current regime/price; (2) extraction happens only when the pre-step
    reserve exceeded the boundary (allowing for within-step boundary
    motion). Raises SRPViolated with the first offending step.
    """
    n = trace.n_paths
    K1 = trace.X.shape[0]
    i_rows = trace.regime.astype(np.int64)
    b_rows = np.empty_like(trace.X)
    for k in range(K1):
        b_rows[k] = _bstar_vec(cs, i_rows[k], trace.X[k])
    over = trace.Y > b_rows + barrier_tol
    if over.any():
        k, j = np.unravel_index(int(np.argmax(over)), over.shape)
        raise SRPViolated(
            f"Y={trace.Y[k, j]} above boundary {b_rows[k, j]} "
            f"at step {k}, path {j}", step=int(k), path=int(j))
    moved = trace.dnu[1:] > dnu_tol
    slack = np.abs(b_rows[1:] - b_rows[:-1]) + barrier_tol
    low = trace.Y[:-1] <= b_rows[1:] - slack
    bad = moved & low
    if bad.any():
        k, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise SRPViolated(
            f"extraction {trace.dnu[k + 1, j]} at step {k + 1}, path {j} "
            f"with reserve {trace.Y[k, j]} below boundary {b_rows[k + 1, j]}",
            step=int(k + 1), path=int(j))
    init_bad = (trace.dnu[0] > dnu_tol) & (
        trace.Y[0] + trace.dnu[0] <= b_rows[0] - barrier_tol)
    if init_bad.any():
        j = int(np.argmax(init_bad))
        raise SRPViolated(
            f"initial lump {trace.dnu[0, j]} on path {j} started below "
            f"the boundary {b_rows[0, j]}", step=0, path=j)
    return True


def trace_to_csv(trace: Trace, path, path_index: int = 0) -> None:
    """Dump one traced path: columns t, regime, X, Y, dnu, discounted_increment."""
    import csv
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "regime", "X", "Y", "dnu", "discounted_increment"])
        for k in range(trace.t.size):
            wr.writerow([f"{trace.t[k]:.10g}", int(trace.regime[k, path_index]),
                         repr(float(trace.X[k, path_index])),
                         repr(float(trace.Y[k, path_index])),
                         repr(float(trace.dnu[k, path_index])),
                         repr(float(trace.disc_inc[k, path_index]))])
