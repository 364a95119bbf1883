"""Closed-form predictions for the discordant-edge density.

Everything here is a pure function of the degree-sequence functionals:
Catalan numbers, the short-time factor phi(t), its plateau value
phi(infinity), and the full prediction curve
2 u (1-u) phi(t) exp(-2 (t/n) / theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .degree_model import TheoryParams

# beyond this time the Poisson weights put negligible mass on small k and
# phi(t) agrees with phi(infinity) far below solver tolerance
_PLATEAU_T = 60.0


def catalan(s: int) -> int:
    """Exact Catalan number C_s = binom(2s, s)/(s+1), via the integer
    recurrence C_{s+1} = C_s * 2(2s+1)/(s+2)."""
    if s < 0:
        raise ValueError("s must be >= 0")
    c = 1
    for k in range(s):
        c = c * 2 * (2 * k + 1) // (k + 2)
    return c


def catalan_series_tail(rho: float, s_max=None) -> float:
    """Sum of 4^{-s} C_s rho^s for s = 1..s_max (s_max None means to
    convergence); the full series equals 2(1-sqrt(1-rho))/rho - 1."""
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (0,1), got {rho}")
    term = rho / 4.0  # s = 1
    total = 0.0
    s = 1
    while True:
        total += term
        if s_max is not None and s >= s_max:
            break
        if s_max is None and term < 1e-17 * max(total, 1.0):
            break
        term *= rho * (2 * s + 1) / (2.0 * (s + 2))
        s += 1
    return total


def _inner_prefix(rho: float, j_max: int) -> np.ndarray:
    """Prefix sums S[j] = sum_{s=1..j} 4^{-s} C_s rho^s, S[0] = 0."""
    out = np.empty(j_max + 1)
    out[0] = 0.0
    term = rho / 4.0
    acc = 0.0
    for s in range(1, j_max + 1):
        acc += term
        out[s] = acc
        term *= rho * (2 * s + 1) / (2.0 * (s + 2))
    return out


def phi(t: float, delta: float, rho: float, tol: float = 1e-12) -> float:
    """Short-time factor of the discordance prediction.

    Poisson(2t)-weighted mixture over the discrete chase-meeting
    probabilities; truncated once the remaining Poisson tail is below tol.
    For t past the uniform-convergence regime the plateau value is returned
    directly.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if t == 0.0:
        return 1.0
    if t > _PLATEAU_T:
        return phi_infinity(delta, rho)
    lam = 2.0 * t
    k_max = int(math.ceil(lam + 10.0 * math.sqrt(lam + 1.0) + 30.0))
    inner = _inner_prefix(rho, max(1, (k_max - 1) // 2))
    # Poisson weights by multiplicative recurrence in log space
    log_w = -lam
    total = 0.0
    mass = 0.0
    for k in range(k_max + 1):
        if k > 0:
            log_w += math.log(lam / k)
        w = math.exp(log_w)
        mass += w
        bracket = 0.0
        if k > 0:
            bracket += 1.0
        if k > 2:
            bracket += inner[(k - 1) // 2]
        total += w * bracket
    if 1.0 - mass > tol:
        raise RuntimeError(f"Poisson tail {1.0 - mass:.3e} exceeds tol={tol}")
    # the truncated tail contributes the plateau bracket value
    tail_bracket = 1.0 + (2.0 * (1.0 - math.sqrt(1.0 - rho)) / rho - 1.0)
    total += (1.0 - mass) * tail_bracket
    return 1.0 - total / (2.0 * delta)


def phi_infinity(delta: float, rho: float) -> float:
    """Plateau value 1 - (1 - sqrt(1-rho)) / (delta rho)."""
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (0,1), got {rho}")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    return 1.0 - (1.0 - math.sqrt(1.0 - rho)) / (delta * rho)


def predicted_density(t: float, n: int, u: float, params: TheoryParams,
                      tol: float = 1e-12) -> float:
    """2u(1-u) phi(t) exp(-2 (t/n) / theta) for the given degree sequence."""
    if not (0.0 < u < 1.0):
        raise ValueError("u must lie in (0,1)")
    if t < 0 or n < 1:
        raise ValueError("need t >= 0 and n >= 1")
    if not params.theta_defined:
        raise ValueError("theta is undefined for this degree sequence (rho >= 1)")
    return (2.0 * u * (1.0 - u)
            * phi(t, params.delta, params.rho, tol)
            * math.exp(-2.0 * (t / n) / params.theta))


@dataclass(frozen=True)
class PredictionCurve:
    """Prediction evaluated on a time grid for one parameter set."""

    times: np.ndarray
    values: np.ndarray
    u: float
    params: TheoryParams
    n: int


def prediction_curve(times, n: int, u: float, params: TheoryParams,
                     tol: float = 1e-12) -> PredictionCurve:
    times = np.asarray(times, dtype=float)
    values = np.array([predicted_density(t, n, u, params, tol) for t in times])
    return PredictionCurve(times, values, u, params, n)
