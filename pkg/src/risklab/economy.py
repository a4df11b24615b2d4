"""Exchange economies, equilibrium machinery, and event deciders.

An economy is a list of agents (preference + endowment).  On top of it this
module provides:

* a tatonnement equilibrium solver for log-utility (Cobb-Douglas) economies,
  with closed-form demands;
* planner (Pareto-optimal) allocations with supporting prices for smooth
  common-curvature economies;
* the event deciders the Monte Carlo experiments evaluate per draw —
  individual improvement, aggregate (Scitovsky-contour) membership,
  eps-Pareto domination;
* scalar diagnostics: the coefficient of resource utilization (bisection),
  the split-norm constant rho, belief-set volume splits, and width reports
  for prior polytopes.

Aggregate membership is decided on the utility-possibility frontier: for two
agents with common CRRA curvature the frontier is a one-parameter family and
the max-min margin is found by bisection (exact up to float tolerance);
otherwise a projected supergradient ascent on the concave min-margin
objective is used, with the decision rule "member iff optimum > 1e-9".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import geometry, preferences, sampling
from .preferences import (
    CobbDouglasEU,
    CRRASEU,
    MaxMinEU,
    Preference,
    utility_extended,
)

FEASIBILITY_TOL = 1e-9
RESIDUAL_TOL = 1e-10
MEMBER_TOL = 1e-9
_TATONNEMENT_CAP = 10**5


@dataclass(frozen=True, eq=False)
class Agent:
    preference: Preference
    endowment: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.endowment, dtype=float)
        if w.ndim != 1 or w.size != self.preference.dim:
            raise ValueError("endowment dimension must match the preference's state count")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("endowment must be finite and nonnegative")
        w.flags.writeable = False
        object.__setattr__(self, "endowment", w)


@dataclass(frozen=True, eq=False)
class EconomySpec:
    """At least two agents sharing one state space.

    ``no_aggregate_uncertainty`` asserts the aggregate endowment is constant
    across states (within 1e-12); several deciders require it.
    """

    agents: tuple[Agent, ...]
    no_aggregate_uncertainty: bool = False

    def __post_init__(self):
        agents = tuple(self.agents)
        if len(agents) < 2:
            raise ValueError("an economy needs at least 2 agents")
        d = agents[0].preference.dim
        if any(a.preference.dim != d for a in agents):
            raise ValueError("all agents must share one state space")
        object.__setattr__(self, "agents", agents)
        if self.no_aggregate_uncertainty:
            w = self.aggregate
            if w.max() - w.min() > 1e-12:
                raise ValueError("aggregate endowment is not constant across states")

    @property
    def dim(self) -> int:
        return self.agents[0].preference.dim

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def aggregate(self) -> np.ndarray:
        return np.sum([a.endowment for a in self.agents], axis=0)

    @property
    def preferences(self) -> list[Preference]:
        return [a.preference for a in self.agents]


@dataclass(frozen=True, eq=False)
class Allocation:
    """Per-agent acts; rows must add up to the economy's aggregate endowment."""

    acts: np.ndarray

    def __post_init__(self):
        F = np.asarray(self.acts, dtype=float)
        if F.ndim != 2:
            raise ValueError("allocation must be an (agents, states) matrix")
        F = F.copy()
        F.flags.writeable = False
        object.__setattr__(self, "acts", F)

    def check_feasible(self, econ: EconomySpec, nonneg: bool = False) -> "Allocation":
        if self.acts.shape != (econ.n_agents, econ.dim):
            raise ValueError("allocation shape does not match the economy")
        gap = np.abs(self.acts.sum(axis=0) - econ.aggregate).max()
        if gap > FEASIBILITY_TOL:
            raise ValueError(f"allocation misses the aggregate endowment by {gap:.3e}")
        if nonneg and np.any(self.acts < 0):
            raise ValueError("allocation violates the nonnegativity restriction")
        return self


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    price: np.ndarray
    allocation: Allocation
    residual: float

    def __post_init__(self):
        p = np.asarray(self.price, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("price must be nonnegative with unit l1 norm")
        if self.residual > 1e-7:
            raise ValueError(f"excess-demand residual {self.residual:.3e} exceeds 1e-7")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "price", p)

    def budget_gaps(self, econ: EconomySpec) -> np.ndarray:
        F = self.allocation.acts
        return np.array(
            [abs(self.price @ F[i] - self.price @ a.endowment) for i, a in enumerate(econ.agents)]
        )


def equal_split(econ: EconomySpec) -> Allocation:
    w = econ.aggregate / econ.n_agents
    return Allocation(np.tile(w, (econ.n_agents, 1))).check_feasible(econ)


# ---------------------------------------------------------------------------
# equilibrium and planner allocations
# ---------------------------------------------------------------------------


def tatonnement_equilibrium(econ: EconomySpec) -> EquilibriumResult:
    """Walrasian equilibrium of a log-utility economy by price iteration.

    Log-utility demand is x_is = mu_is (p . w_i) / p_s, so market clearing
    is the positive fixed point of p <- normalized sum_i mu_i (p . w_i); the
    iteration is a power method on a positive matrix and converges linearly.
    Stops when the worst excess demand is below 1e-10.
    """
    mus = []
    for a in econ.agents:
        if not isinstance(a.preference, CobbDouglasEU):
            raise ValueError("tatonnement solver requires log-utility (Cobb-Douglas) agents")
        mus.append(a.preference.prior)
    M = np.array(mus)  # (I, d)
    W = np.array([a.endowment for a in econ.agents])  # (I, d)
    supply = econ.aggregate
    if np.any(supply <= 0):
        raise ValueError("every state needs positive aggregate supply")

    p = np.full(econ.dim, 1.0 / econ.dim)
    trace = []
    for _ in range(_TATONNEMENT_CAP):
        wealth = W @ p
        if np.any(wealth <= 0):
            raise ValueError("an agent has zero wealth; tatonnement demand is undefined")
        demand_value = M.T @ wealth  # sum_i mu_is (p . w_i)
        residual = float(np.abs(demand_value / p - supply).max())
        trace.append(residual)
        if residual < RESIDUAL_TOL:
            F = M * wealth[:, None] / p[None, :]
            return EquilibriumResult(p, Allocation(F).check_feasible(econ), residual)
        # clearing means p_s supply_s = demand_value_s, so iterate the
        # supply-scaled map (a positive matrix: power iteration converges)
        p_next = demand_value / supply
        p = p_next / p_next.sum()
    raise geometry.ConvergenceError(
        f"tatonnement did not converge in {_TATONNEMENT_CAP} iterations; "
        f"last residuals {trace[-5:]}",
        value=trace[-1],
        gap=trace[-1],
    )


def _common_crra_exponent(prefs: list[Preference]) -> float | None:
    """The shared 1/gamma when every agent is log or common-curvature CRRA."""
    gammas = []
    for p in prefs:
        if isinstance(p, CobbDouglasEU):
            gammas.append(1.0)
        elif isinstance(p, CRRASEU) and p.gamma > 0:
            gammas.append(p.gamma)
        else:
            return None
    if max(gammas) - min(gammas) > 1e-14:
        return None
    return 1.0 / gammas[0]


def planner_allocation(econ: EconomySpec, weights=None) -> tuple[Allocation, np.ndarray]:
    """Pareto-optimal allocation maximizing a weighted utility sum, with its supporting price.

    Closed form for log / common-curvature CRRA agents: statewise shares
    proportional to (weight_i mu_is)^(1/gamma).  The supporting price is the
    common weighted marginal utility, normalized to sum 1.
    """
    q = _common_crra_exponent(econ.preferences)
    if q is None:
        raise ValueError("planner closed form requires log or common-curvature CRRA agents")
    lam = np.full(econ.n_agents, 1.0 / econ.n_agents) if weights is None else np.asarray(
        weights, dtype=float
    )
    if lam.shape != (econ.n_agents,) or np.any(lam <= 0):
        raise ValueError("weights must be positive, one per agent")
    M = np.array([a.preference.prior for a in econ.agents])
    scores = (lam[:, None] * M) ** q
    shares = scores / scores.sum(axis=0, keepdims=True)
    F = shares * econ.aggregate[None, :]
    gamma = 1.0 / q
    # common FOC value lam_i mu_is g_is^(-gamma), identical across i by construction
    price = lam[0] * M[0] * F[0] ** (-gamma)
    price = price / price.sum()
    return Allocation(F).check_feasible(econ, nonneg=True), price


# ---------------------------------------------------------------------------
# event deciders
# ---------------------------------------------------------------------------


def individual_improvement_event(
    econ: EconomySpec, f: Allocation, Z: np.ndarray, eps: float
) -> np.ndarray:
    """For each perturbation z: does (1-eps)(f_i + z) beat f_i for SOME agent?

    Vectorized over the rows of Z.  Perturbed acts that leave an agent's
    utility domain (nonpositive payoffs under log curvature) never improve:
    the monotone extension assigns them -inf utility.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    out = np.zeros(len(Z), dtype=bool)
    for i, agent in enumerate(econ.agents):
        fi = f.acts[i]
        base = agent.preference.utility(fi)
        cand = utility_extended(agent.preference, (1.0 - eps) * (fi + Z))
        out |= cand > base + preferences.TOL_STRICT
    return out


def _margins_on_frontier(M, logM, F_w, base, lam, q, eps):
    """Margins (u_i((1-eps) g_i(lam)) - u_i(f_i)) on the 2-agent CRRA frontier.

    lam is an (n,) array of planner weights; F_w an (n, d) array of candidate
    aggregates.  The frontier share of agent 1 in state s is
    expit(q [logit(lam) + log mu_1s - log mu_2s]), which keeps the algebra
    stable for extreme weights and curvatures.
    """
    llam = np.log(lam) - np.log1p(-lam)
    t = q * (llam[:, None] + logM[0][None, :] - logM[1][None, :])
    share = expit(t)
    g1 = F_w * share
    g2 = F_w - g1
    gamma = 1.0 / q
    scale = 1.0 - eps
    if abs(gamma - 1.0) < 1e-14:
        u1 = np.where(np.all(g1 > 0, axis=1), np.log(np.maximum(g1, 1e-300)) @ M[0], -np.inf)
        u2 = np.where(np.all(g2 > 0, axis=1), np.log(np.maximum(g2, 1e-300)) @ M[1], -np.inf)
        u1 = u1 + math.log(scale)
        u2 = u2 + math.log(scale)
    else:
        p_ = 1.0 - gamma
        with np.errstate(divide="ignore"):
            u1 = (np.maximum(scale * g1, 0.0) ** p_ @ M[0]) / p_
            u2 = (np.maximum(scale * g2, 0.0) ** p_ @ M[1]) / p_
        if gamma > 1:
            u1 = np.where(np.all(g1 > 0, axis=1), u1, -np.inf)
            u2 = np.where(np.all(g2 > 0, axis=1), u2, -np.inf)
    return u1 - base[0], u2 - base[1]


def scitovsky_margins_batch(
    econ: EconomySpec, f: Allocation, W: np.ndarray, eps: float, bisection_steps: int = 70
) -> np.ndarray:
    """Max-min improvement margin for each candidate aggregate row of W.

    Exact two-agent path: the utility-possibility frontier of a common-
    curvature economy is a one-parameter planner family along which agent 1's
    margin rises and agent 2's falls, so the max-min sits at their crossing —
    found by vectorized bisection on the planner weight.
    """
    q = _common_crra_exponent(econ.preferences)
    if q is None or econ.n_agents != 2:
        raise ValueError("batch margins need the 2-agent common-curvature closed form")
    W = np.atleast_2d(np.asarray(W, dtype=float))
    bad = np.any(W < 0, axis=1)  # no nonnegative split exists: margin -inf
    W = np.where(bad[:, None], 1.0, W)
    M = np.array([a.preference.prior for a in econ.agents])
    logM = np.log(M)
    base = np.array(
        [utility_extended(a.preference, f.acts[i]) for i, a in enumerate(econ.agents)]
    )
    n = len(W)

    lo = np.full(n, 1e-12)
    hi = np.full(n, 1.0 - 1e-12)
    # inf margins (a -inf base act) make diff = inf - inf = nan; nan
    # comparisons are all False, which leaves such rows at min(m1, m2) = inf.
    with np.errstate(invalid="ignore"):
        m1_lo, m2_lo = _margins_on_frontier(M, logM, W, base, lo, q, eps)
        m1_hi, m2_hi = _margins_on_frontier(M, logM, W, base, hi, q, eps)
        # diff = m1 - m2 is increasing in lam; bracket the sign change.
        all_low = (m1_lo - m2_lo) >= 0  # already above: min is m2 at lam -> 0
        all_high = (m1_hi - m2_hi) <= 0  # min is m1 throughout, best lam -> 1
        for _ in range(bisection_steps):
            mid = 0.5 * (lo + hi)
            m1, m2 = _margins_on_frontier(M, logM, W, base, mid, q, eps)
            go_up = (m1 - m2) < 0
            lo = np.where(go_up, mid, lo)
            hi = np.where(go_up, hi, mid)
        mid = 0.5 * (lo + hi)
        m1, m2 = _margins_on_frontier(M, logM, W, base, mid, q, eps)
    margins = np.minimum(m1, m2)
    margins = np.where(all_low, np.minimum(m1_lo, m2_lo), margins)
    margins = np.where(all_high, np.minimum(m1_hi, m2_hi), margins)
    return np.where(bad, -np.inf, margins)


def _project_split(G: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Project per-agent acts onto the split polytope {G >= 0, column sums = w}.

    Each state is an independent scaled-simplex projection; the standard
    sort/threshold rule is vectorized across states.
    """
    I, d = G.shape
    Y = G.T  # (d, I): each row projects onto the simplex scaled by w_s
    srt = -np.sort(-Y, axis=1)
    css = np.cumsum(srt, axis=1) - w[:, None]
    ks = np.arange(1, I + 1)
    cond = srt - css / ks > 0
    k = np.maximum(cond.sum(axis=1), 1)  # k = 0 only when w_s = 0; clamp maps that column to 0
    theta = css[np.arange(d), k - 1] / k
    return np.maximum(Y - theta[:, None], 0.0).T


def scitovsky_margin(
    econ: EconomySpec,
    f: Allocation,
    w: np.ndarray,
    eps: float,
    method: str = "auto",
    restarts: int = 8,
    iterations: int = 2000,
    step_scale: float = 1.0,
    seed: int = 0,
) -> float:
    """Best worst-agent improvement margin over all nonnegative splits of w.

    Positive margin means w can be divided so that every agent strictly
    prefers the shaved share (1-eps) g_i to f_i — i.e. w lies in the
    aggregate improvement contour.  The two-agent common-curvature path is
    exact (frontier bisection); otherwise projected supergradient ascent on
    the concave min-margin objective, multistart, step step_scale/sqrt(k).
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    w = np.asarray(w, dtype=float)
    if w.shape != (econ.dim,):
        raise ValueError("candidate aggregate has the wrong dimension")
    if np.any(w < 0):
        return -np.inf
    exact_ok = econ.n_agents == 2 and _common_crra_exponent(econ.preferences) is not None
    if method == "auto":
        method = "exact" if exact_ok else "subgradient"
    if method == "exact":
        if not exact_ok:
            raise ValueError("exact path needs 2 agents with common CRRA curvature")
        return float(scitovsky_margins_batch(econ, f, w[None, :], eps)[0])
    if method != "subgradient":
        raise ValueError("method must be 'auto', 'exact', or 'subgradient'")

    prefs = econ.preferences
    base = np.array([utility_extended(p, f.acts[i]) for i, p in enumerate(prefs)])
    scale = 1.0 - eps
    I = econ.n_agents

    def margins(G):
        return np.array(
            [utility_extended(prefs[i], scale * G[i]) - base[i] for i in range(I)]
        )

    def gradient_row(i, gi):
        # supergradient of g -> u_i((1 - eps) g) at gi, clamped into the domain
        p = prefs[i]
        x = np.maximum(scale * gi, 1e-12)
        if isinstance(p, MaxMinEU):
            mu = p.worst_case_face(x).mean(axis=0)
            return scale * (mu if p.bernoulli == "linear" else mu / x)
        return scale * p.gradient(x)

    even = np.tile(w / I, (I, 1))
    gen = np.random.default_rng(seed)
    starts = [even]
    total = f.acts.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        prop = np.where(total > 0, f.acts / total, 1.0 / I) * w
    starts.append(_project_split(prop, w))
    while len(starts) < restarts:
        R = gen.random((I, econ.dim))
        starts.append(_project_split(R / R.sum(axis=0, keepdims=True) * w, w))

    best = -np.inf
    for G0 in starts:
        G = G0.copy()
        for k in range(1, iterations + 1):
            m = margins(G)
            j = int(np.argmin(m))
            best = max(best, float(m[j]))
            if not np.isfinite(m[j]):
                G = 0.5 * (G + even)
                continue
            step = min(step_scale / math.sqrt(k), 1.0)
            G = G.copy()
            G[j] = G[j] + step * gradient_row(j, G[j])
            G = _project_split(G, w)
        best = max(best, float(margins(G).min()))
    return best


def scitovsky_member(
    econ: EconomySpec, f: Allocation, w: np.ndarray, eps: float, **solver_kwargs
) -> bool:
    """Whether w splits so every agent improves by eps over f (margin > 1e-9).

    On the uncertified supergradient path a margin within 1e-9 of zero
    raises a boundary-indeterminate error (the optimizer cannot distinguish
    a zero optimum from non-convergence); the exact frontier path decides
    boundaries as non-membership.
    """
    exact_ok = econ.n_agents == 2 and _common_crra_exponent(econ.preferences) is not None
    margin = scitovsky_margin(econ, f, w, eps, **solver_kwargs)
    if not exact_ok and abs(margin) <= MEMBER_TOL:
        raise geometry.ConvergenceError(
            "boundary-indeterminate: optimized margin within 1e-9 of zero",
            value=margin,
            gap=abs(margin),
        )
    return margin > MEMBER_TOL


def scitovsky_member_grid(
    econ: EconomySpec, f: Allocation, w: np.ndarray, eps: float, grid: int = 200
) -> bool:
    """Brute-force membership for 2-agent, 2-state economies on a grid of splits."""
    if econ.n_agents != 2 or econ.dim != 2:
        raise ValueError("grid oracle covers 2 agents x 2 states only")
    w = np.asarray(w, dtype=float)
    xs = np.linspace(0.0, w[0], grid)
    ys = np.linspace(0.0, w[1], grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    G1 = np.stack([X.ravel(), Y.ravel()], axis=1)
    G2 = w[None, :] - G1
    scale = 1.0 - eps
    p1, p2 = econ.preferences
    m1 = utility_extended(p1, scale * G1) - p1.utility(f.acts[0])
    m2 = utility_extended(p2, scale * G2) - p2.utility(f.acts[1])
    return bool(np.any(np.minimum(m1, m2) > MEMBER_TOL))


def pareto_dominated_eps(econ: EconomySpec, f: Allocation, eps: float, **kw) -> bool:
    """Whether some feasible reallocation improves every agent by eps."""
    if not econ.no_aggregate_uncertainty:
        raise ValueError("eps-Pareto domination decider assumes no aggregate uncertainty")
    return scitovsky_member(econ, f, econ.aggregate, eps, **kw)


# ---------------------------------------------------------------------------
# scalar diagnostics
# ---------------------------------------------------------------------------


def cru(econ: EconomySpec, f: Allocation, tol: float = 1e-6) -> float:
    """Coefficient of resource utilization: smallest beta with beta*1 still improving f.

    Requires aggregate endowment exactly 1 in every state.  Bisection on the
    membership threshold along the symmetric ray; Pareto-optimal allocations
    return exactly 1.0.  Allocations dominated by arbitrarily small aggregate
    scalings are degenerate and raise an error.
    """
    if not econ.no_aggregate_uncertainty or np.abs(econ.aggregate - 1.0).max() > FEASIBILITY_TOL:
        raise ValueError("resource-utilization decider needs aggregate endowment = 1 per state")
    ones = np.ones(econ.dim)

    def member(beta: float) -> bool:
        return scitovsky_margin(econ, f, beta * ones, 0.0) > MEMBER_TOL

    if not member(1.0):
        return 1.0
    lo = 0.01
    if member(lo):
        raise ValueError("degenerate allocation: dominated by arbitrarily small aggregates")
    hi = 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if member(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def rho(econ: EconomySpec, mode: str = "definitional") -> float:
    """Split-norm constant: 2/wbar times the max of sum_i ||f_i|| over splits of wbar*1.

    The maximum over the split polytope of this convex objective is attained
    at an extreme point, i.e. every state assigned wholly to one agent, so
    it equals the best balanced integer partition of d into at most |I|
    parts (enumerated exactly for |I| <= 4, d <= 12).  mode='paper' returns
    the constant 2 sqrt(d) used by the volume-bound proofs instead.
    """
    if not econ.no_aggregate_uncertainty:
        raise ValueError("rho assumes no aggregate uncertainty")
    d, I = econ.dim, econ.n_agents
    if mode == "paper":
        return 2.0 * math.sqrt(d)
    if mode != "definitional":
        raise ValueError("mode must be 'definitional' or 'paper'")
    if I > 4 or d > 12:
        raise ValueError(
            "exact enumeration supports |I| <= 4 and d <= 12; use mode='paper' beyond that"
        )

    best = 0.0

    def partitions(remaining: int, parts: int, prev: int, acc: float):
        nonlocal best
        if parts == 1:
            if remaining <= prev:
                best = max(best, acc + math.sqrt(remaining))
            return
        for k in range(min(remaining, prev), -1, -1):
            partitions(remaining - k, parts - 1, k, acc + math.sqrt(k))

    partitions(d, I, d, 0.0)
    return 2.0 * best


@dataclass(frozen=True)
class BeliefVolumeSplit:
    vol_J: sampling.MCEstimate
    vol_Jc: sampling.MCEstimate
    empty_J: bool
    empty_Jc: bool

    @property
    def min_rel_vol(self) -> float:
        return min(self.vol_J.p_hat, self.vol_Jc.p_hat)


def _group_membership(sets: list[geometry.Polytope], pts: np.ndarray) -> np.ndarray:
    inside = np.ones(len(pts), dtype=bool)
    for s in sets:
        inside &= geometry.contains(s, pts)
        if not inside.any():
            break
    return inside


def belief_volume_split(
    econ: EconomySpec,
    f: Allocation,
    J: list[int],
    n: int = 10**5,
    seed: sampling.SeedSpec | int = 0,
) -> BeliefVolumeSplit:
    """Relative simplex volumes of the two coalition belief-set intersections.

    B_J is the intersection of the belief sets of the agents in J at their
    allocated acts (B_Jc for the complement).  Both volumes are hit-or-miss
    estimates against the SAME uniform simplex sample, so for disjoint
    intersections min(vol_J, vol_Jc) can never exceed 1/2.  A coalition
    whose sampled intersection is empty is flagged.
    """
    J = sorted(set(J))
    if not J or not all(0 <= j < econ.n_agents for j in J) or len(J) == econ.n_agents:
        raise ValueError("J must be a proper nonempty subset of the agents")
    Jc = [i for i in range(econ.n_agents) if i not in J]
    sets_J = [preferences.belief_set(econ.agents[i].preference, f.acts[i]) for i in J]
    sets_Jc = [preferences.belief_set(econ.agents[i].preference, f.acts[i]) for i in Jc]
    pts = sampling.sample_uniform_simplex(econ.dim, n, seed)
    in_J = _group_membership(sets_J, pts)
    in_Jc = _group_membership(sets_Jc, pts)
    vol_J = sampling.MCEstimate(hits=int(in_J.sum()), trials=n)
    vol_Jc = sampling.MCEstimate(hits=int(in_Jc.sum()), trials=n)
    return BeliefVolumeSplit(
        vol_J=vol_J,
        vol_Jc=vol_Jc,
        empty_J=vol_J.hits == 0,
        empty_Jc=vol_Jc.hits == 0,
    )


@dataclass(frozen=True)
class WidthReport:
    theta_min: float
    theta_max: float
    constant_width: bool
    n_directions: int


def width_report(
    Pi: geometry.Polytope, n_directions: int = 256, seed: sampling.SeedSpec | int = 0
) -> WidthReport:
    """Support-function width of a prior polytope along random simplex directions.

    Directions are unit vectors in the simplex hyperplane (coordinates sum
    to zero).  Width along u is max_vertices u.v minus min; the set counts
    as constant-width when the spread over directions is at most 1e-8.
    """
    if not Pi.has_vrep():
        raise ValueError("width report needs a V-represented polytope")
    V = Pi.vertices
    if len(V) == 1:
        return WidthReport(0.0, 0.0, True, n_directions)
    gen = sampling.generator_for_block(sampling.as_seed(seed), 0)
    U = gen.standard_normal((n_directions, V.shape[1]))
    U -= U.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(U, axis=1)
    U = U[norms > 1e-12] / norms[norms > 1e-12, None]
    S = U @ V.T
    widths = S.max(axis=1) - S.min(axis=1)
    tmin, tmax = float(widths.min()), float(widths.max())
    return WidthReport(tmin, tmax, tmax - tmin <= 1e-8, len(U))
