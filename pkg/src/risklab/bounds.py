"""Closed-form tail bounds that the lab's experiments compare against.

Each bound evaluator returns a :class:`BoundReport` carrying the experiment
family id (the same short ids the CLI and the CSV outputs use: ``thm1``,
``thm2``, ``cru``, ``thm4``, ``prop7``, ``lemma1``, ``cor16``), the parameter
values used, and the bound evaluated in log space so that large dimensions
underflow gracefully to 0 instead of losing the exponent.

The decay-rate constant ``c`` appearing in the ``thm4``/``prop7``/``cor16``
families is a universal constant with no known numeric value; it is a named
configuration parameter defaulting to 1.0, and every report records the value
used.  Experiments involving it validate decay shape and c-independent
statements only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

#: Default for the unknown universal decay constant.
DEFAULT_C = 1.0

#: sqrt(pi) * (sqrt(3) - 1), the width-bound prefactor base.
ALPHA = math.sqrt(math.pi) * (math.sqrt(3.0) - 1.0)


@dataclass(frozen=True)
class BoundReport:
    """A bound value with full parameter provenance.

    ``value = exp(log_value)`` (it may underflow to exactly 0.0 for huge
    dimensions; ``log_value`` keeps the exponent).  ``clipped_value`` is
    ``min(value, 1)`` — probabilities never exceed 1 even when the raw
    formula does (e.g. kappa > 1 at epsilon near 0).
    """

    theorem_id: str
    params: dict
    log_value: float
    value: float
    clipped_value: float

    def describe(self) -> str:
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.theorem_id}({ps}) = {self.value:.6g} [clipped {self.clipped_value:.6g}]"

    def csv_row(self) -> str:
        ps = ";".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.theorem_id},{self.value!r},{self.clipped_value!r},{ps}"


def _report(theorem_id: str, log_value: float, **params) -> BoundReport:
    value = math.exp(log_value)
    return BoundReport(
        theorem_id=theorem_id,
        params={k: float(v) for k, v in params.items()},
        log_value=log_value,
        value=value,
        clipped_value=min(value, 1.0),
    )


def _check(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def bound_thm1(eps: float, tau: float, r: float, d: int, kappa: float = 1.0) -> BoundReport:
    """kappa * exp(-eps^2 tau^2 d / (8 r^2)).

    Tail bound on the probability that a random feasible reallocation
    improves one agent whose utility is tau-Lipschitz on the relevant range,
    under a perturbation law with density bound kappa.
    """
    _check(0.0 <= eps < 1.0, "eps must lie in [0, 1)")
    _check(tau > 0, "tau must be positive")
    _check(r > 0, "r must be positive")
    _check(d >= 1, "d must be >= 1")
    _check(kappa >= 1.0, "kappa must be >= 1")
    log_value = math.log(kappa) - eps * eps * tau * tau * d / (8.0 * r * r)
    return _report("thm1", log_value, eps=eps, tau=tau, r=r, d=d, kappa=kappa)


def bound_thm2(eps: float, r: float, d: int, kappa: float = 1.0) -> BoundReport:
    """kappa * exp(-eps^2 d / (8 r^2)): the equilibrium-allocation tail bound.

    Identical to :func:`bound_thm1` at tau = 1; the Lipschitz factor is
    absorbed by the equilibrium normalization.
    """
    rep = bound_thm1(eps, 1.0, r, d, kappa)
    params = {k: v for k, v in rep.params.items() if k != "tau"}
    return BoundReport("thm2", params, rep.log_value, rep.value, rep.clipped_value)


def bound_cru(beta: float, r: float, d: int) -> BoundReport:
    """exp(-((1-beta)/beta)^2 d / (8 r^2)): tail bound for resource utilization beta.

    beta = 1 gives 1 (zero exponent, fully utilized resources); beta = 0 is a
    domain error (the scaling margin (1-beta)/beta diverges).
    """
    _check(0.0 < beta <= 1.0, "beta must lie in (0, 1]; beta=0 has no finite margin")
    _check(r > 0, "r must be positive")
    _check(d >= 1, "d must be >= 1")
    margin = (1.0 - beta) / beta
    log_value = -margin * margin * d / (8.0 * r * r)
    return _report("cru", log_value, beta=beta, r=r, d=d)


def bound_thm4(eps: float, d: int, c: float = DEFAULT_C) -> BoundReport:
    """0.5 * exp(-c eps sqrt(d)): relative-volume bound for the smaller belief set."""
    _check(c > 0, "c must be positive")
    _check(eps >= 0, "eps must be nonnegative")
    _check(d >= 1, "d must be >= 1")
    log_value = math.log(0.5) - c * eps * math.sqrt(d)
    return _report("thm4", log_value, eps=eps, d=d, c=c)


def bound_prop7(eps: float, d: int, c: float = DEFAULT_C) -> BoundReport:
    """4 * exp(-c eps / sqrt(d)) * (d!)^(-1/(2d)): width bound for constant-width prior sets.

    The factorial root is evaluated through log-Gamma, so there is no
    overflow at any d.
    """
    _check(c > 0, "c must be positive")
    _check(eps >= 0, "eps must be nonnegative")
    _check(d >= 1, "d must be >= 1")
    log_value = math.log(4.0) - c * eps / math.sqrt(d) - gammaln(d + 1) / (2.0 * d)
    return _report("prop7", log_value, eps=eps, d=d, c=c)


def bound_lemma1(delta: float, r: float, d: int) -> BoundReport:
    """exp(-delta^2 d / (8 r^2)): mass bound for the less likely of two delta-separated sets."""
    _check(delta >= 0, "delta must be nonnegative")
    _check(r > 0, "r must be positive")
    _check(d >= 1, "d must be >= 1")
    log_value = -delta * delta * d / (8.0 * r * r)
    return _report("lemma1", log_value, delta=delta, r=r, d=d)


def bound_cor16(delta: float, d: int, c: float = DEFAULT_C) -> BoundReport:
    """1 - 0.5 * exp(-c delta d): lower bound on the mass of a delta-extension.

    Applies to delta-extensions of sets holding at least half the mass;
    at delta = 0 it reproduces that hypothesis, value 0.5.
    """
    _check(c > 0, "c must be positive")
    _check(delta >= 0, "delta must be nonnegative")
    _check(d >= 1, "d must be >= 1")
    value = 1.0 - 0.5 * math.exp(-c * delta * d)
    log_value = math.log1p(-0.5 * math.exp(-c * delta * d))
    return _report("cor16", log_value, delta=delta, d=d, c=c)


# ---------------------------------------------------------------------------
# width-bound constant and the constant-width volume floor
# ---------------------------------------------------------------------------


def prop7_prefactor(d) -> float | np.ndarray:
    """(2/alpha) * (alpha d / 2)^(1/d) with alpha = sqrt(pi)(sqrt(3)-1).

    Accepts a scalar or an array of dimensions; evaluated in log space.
    The maximum over integers is at d = 4 (about 1.9564), comfortably
    below the constant 4 used in the prop7 bound.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 1):
        raise ValueError("d must be >= 1")
    log_pre = math.log(2.0 / ALPHA) + (math.log(ALPHA / 2.0) + np.log(d)) / d
    out = np.exp(log_pre)
    return float(out) if out.ndim == 0 else out


def prop7_prefactor_below_4(d_max: int = 10**6) -> bool:
    """Whether the prefactor stays <= 4 for every integer d in 1..d_max."""
    d = np.arange(1, d_max + 1, dtype=float)
    return bool(np.all(prop7_prefactor(d) <= 4.0))


def log_ball_volume_m(m: int, radius: float = 1.0) -> float:
    """log Vol of the m-dimensional Euclidean ball of the given radius."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    return 0.5 * m * math.log(math.pi) - gammaln(0.5 * m + 1.0) + m * math.log(radius)


@dataclass(frozen=True)
class WidthFloorCheck:
    """Constant-width volume floor evaluated on one instance (log scale).

    ``log_volume`` is the body's volume, ``log_floor_sharp`` uses the
    dimension-dependent factor (sqrt(3 + 2/d) - 1), ``log_floor`` the plain
    (sqrt(3) - 1).  ``slack_log`` = log_volume - log_floor (>= 0 when the
    floor holds).
    """

    d: int
    width: float
    log_volume: float
    log_floor_sharp: float
    log_floor: float

    @property
    def slack_log(self) -> float:
        return self.log_volume - self.log_floor

    @property
    def holds(self) -> bool:
        return self.log_volume >= self.log_floor_sharp - 1e-12 and self.slack_log >= -1e-12


def width_volume_floor(d: int, width: float, log_volume: float) -> WidthFloorCheck:
    """Check the constant-width volume floor for a (d-1)-surface body on the simplex.

    A constant-width body of width theta on the (d-1)-dimensional simplex
    surface has volume at least (sqrt(3 + 2/d) - 1)^(d-1) Vol(B^(d-1)(theta/2)),
    which is itself at least (sqrt(3) - 1)^(d-1) (theta/2)^(d-1) Vol(B^(d-1)).
    """
    if d < 2:
        raise ValueError("d must be >= 2 (the body lives on a (d-1)-surface)")
    if width <= 0:
        raise ValueError("width must be positive")
    m = d - 1
    log_floor_sharp = m * math.log(math.sqrt(3.0 + 2.0 / d) - 1.0) + log_ball_volume_m(
        m, 0.5 * width
    )
    log_floor = (
        m * math.log(math.sqrt(3.0) - 1.0) + m * math.log(0.5 * width) + log_ball_volume_m(m)
    )
    return WidthFloorCheck(d, width, log_volume, log_floor_sharp, log_floor)


def width_floor_ball_instance(d: int, rho: float) -> WidthFloorCheck:
    """The volume floor evaluated on a radius-rho ball (width 2 rho) in the surface.

    Ball instances meet the plain floor with slack exactly
    -(d-1) log(sqrt(3) - 1): equality up to the (sqrt(3)-1)^(d-1) factor.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    return width_volume_floor(d, 2.0 * rho, log_ball_volume_m(d - 1, rho))
