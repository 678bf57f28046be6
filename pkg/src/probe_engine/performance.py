"""Power, efficiency and efficiency bounds of probe heat engines.

The closed-form functions accept scalars or numpy arrays. A vanishing
denominator anywhere raises instead of producing inf; figure generation
excludes pole neighbourhoods before calling them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError, RegimeError, SingularMeritError
from .kernel import VPROBE3, CurrentVector, ForceVector, OnsagerMatrix, effective_matrix, linear_currents
from .labels import ENGINE_REGIMES, Branch, Regime

ZERO_BAND = 1e-12


def _divide(num, den, exc, what):
    den = np.asarray(den, dtype=float)
    if np.any(den == 0):
        raise exc(f"{what}: denominator vanishes")
    out = np.asarray(num, dtype=float) / den
    return float(out) if out.ndim == 0 else out


def _check_power_gain(dP):
    arr = np.asarray(dP, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -1.0) or np.any(arr > 0.0):
        raise DomainError("power gain must lie in [-1, 0]")
    return arr


# --------------------------------------------------------------------------
# Regimes and Carnot references
# --------------------------------------------------------------------------


def classify_regime(currents: CurrentVector, zero_band: float = ZERO_BAND) -> Regime:
    """Which reservoirs feed heat into the conductor.

    Heat currents with magnitude below ``zero_band`` count as zero. Heat
    drawn out of the reference reservoir R marks a refrigerator; this check
    comes first.
    """
    q = np.where(np.abs(currents.heat) < zero_band, 0.0, currents.heat)
    q_l, q_p, q_r = (float(v) for v in q)
    if not all(math.isfinite(v) for v in (q_l, q_p, q_r)):
        raise ValueError("heat currents must be finite")
    if q_r > 0:
        return Regime.REFRIGERATOR
    if q_l > 0 and q_p > 0:
        return Regime.LP
    if q_l > 0:
        return Regime.L
    if q_p > 0:
        return Regime.P
    raise RegimeError("no reservoir injects heat: not an engine")


def _engine_regime(regime) -> Regime:
    regime = Regime(regime)
    if regime not in ENGINE_REGIMES:
        raise RegimeError(f"efficiency is undefined in regime {regime.value}")
    return regime


def input_heat(currents: CurrentVector, regime: Regime) -> float:
    regime = _engine_regime(regime)
    if regime is Regime.L:
        return currents.j_lq
    if regime is Regime.P:
        return currents.j_pq
    return currents.j_lq + currents.j_pq


def carnot_efficiency(
    currents: CurrentVector, dT_L: float, dT_P: float, temperature: float, regime: Regime
) -> float:
    """Heat-weighted Carnot efficiency of the three-reservoir engine."""
    q_in = input_heat(currents, regime)
    if q_in == 0:
        raise DegenerateError("input heat current vanishes")
    num = dT_P * currents.j_pq + dT_L * currents.j_lq
    return num / (temperature * q_in)


def carnot_efficiency_buttiker(dT_L: float, temperature: float) -> float:
    return dT_L / temperature


# --------------------------------------------------------------------------
# Power
# --------------------------------------------------------------------------


def output_power(L3: OnsagerMatrix, forces: ForceVector, temperature: float) -> float:
    """P = -T J_L^N X_L^V."""
    j_ln = L3.currents(forces)[0]
    return float(-temperature * j_ln * forces.x_lv)


@dataclass(frozen=True)
class MaxPower:
    x_lv_star: float
    p_max: float
    xi: float


def max_power(L3: OnsagerMatrix, x_lt: float, x_pt: float, temperature: float) -> MaxPower:
    """Load X_L^V* maximising P at fixed thermal forces, and P_max.

    P_max = (T^4 / 4) G (S_LL + S_LP xi)^2 (X_L^T)^2.
    """
    if L3.kind != VPROBE3:
        raise ValueError("max_power needs a VPROBE3 matrix")
    if x_lt == 0:
        raise DegenerateError("X_L^T = 0: no thermal drive")
    xi = x_pt / x_lt
    (l11, l12), _ = effective_matrix(L3, xi)
    if not l11 > 0:
        raise DegenerateError("effective L_11 must be positive")
    T = temperature
    x_star = -l12 / (2 * l11) * x_lt
    g = L3.at(1, 1) / T
    s_eff = (L3.at(1, 2) + L3.at(1, 3) * xi) / (T * L3.at(1, 1))
    p_max = T**4 / 4 * g * s_eff**2 * x_lt**2
    return MaxPower(x_lv_star=x_star, p_max=p_max, xi=xi)


def load_ratio(dP, branch: Branch):
    """eps_+/- = 1 +/- sqrt(-dP)."""
    arr = _check_power_gain(dP)
    out = 1.0 + Branch.parse(branch).sign * np.sqrt(-arr)
    return float(out) if out.ndim == 0 else out


def power_ratio(eps):
    """P / P_max = eps (2 - eps)."""
    e = np.asarray(eps, dtype=float)
    out = e * (2.0 - e)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Closed-form efficiencies
# --------------------------------------------------------------------------


def efficiency_at_max_power(eta_c, x, y, d):
    """(eta_c / 2) x y / (y + 2 d)."""
    x, y, d = (np.asarray(v, dtype=float) for v in (x, y, d))
    return _divide(0.5 * np.asarray(eta_c) * x * y, y + 2 * d, SingularMeritError, "y + 2d")


def efficiency_at_max_power_buttiker(eta_c, x, y):
    """(eta_c / 2) x y / (y + 2)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return _divide(0.5 * np.asarray(eta_c) * x * y, y + 2, SingularMeritError, "y + 2")


def _check_load(eps):
    e = np.asarray(eps, dtype=float)
    if np.any(~np.isfinite(e)) or np.any(e <= 0) or np.any(e >= 2):
        raise DomainError("load ratio must lie in (0, 2)")
    return e


def normalized_efficiency(eps, y, d):
    """eta_m / eta_m(P_max) as a function of the load ratio eps."""
    e = _check_load(eps)
    y, d = np.asarray(y, dtype=float), np.asarray(d, dtype=float)
    # 2 (y + d) - y eps written so that eps = 1 reproduces y + 2d bit for bit
    num = e * (2 - e) * (y + 2 * d)
    return _divide(num, (y + 2 * d) + y * (1 - e), SingularMeritError, "normalized efficiency")


def normalized_efficiency_buttiker(eps, y):
    e = _check_load(eps)
    y = np.asarray(y, dtype=float)
    num = e * (2 - e) * (y + 2)
    return _divide(num, (y + 2) + y * (1 - e), SingularMeritError, "normalized efficiency")


def normalized_efficiency_at_power_gain(dP, branch, y, d):
    """eta_m / eta_m(P_max) as a function of the power gain on one branch."""
    arr = _check_power_gain(dP)
    root = Branch.parse(branch).sign * np.sqrt(-arr)
    y, d = np.asarray(y, dtype=float), np.asarray(d, dtype=float)
    num = (1 + arr) * (y + 2 * d)
    return _divide(num, (y + 2 * d) - y * root, SingularMeritError, "normalized efficiency")


def normalized_efficiency_at_power_gain_buttiker(dP, branch, y):
    arr = _check_power_gain(dP)
    root = Branch.parse(branch).sign * np.sqrt(-arr)
    y = np.asarray(y, dtype=float)
    num = (1 + arr) * (y + 2)
    return _divide(num, (y + 2) - y * root, SingularMeritError, "normalized efficiency")


def efficiency_at_power_gain(dP, branch, x, y, d, eta_c):
    """Efficiency at relative power gain dP on the chosen load branch."""
    arr = _check_power_gain(dP)
    root = Branch.parse(branch).sign * np.sqrt(-arr)
    x, y, d = (np.asarray(v, dtype=float) for v in (x, y, d))
    num = 0.5 * np.asarray(eta_c) * x * y * (1 + arr)
    return _divide(num, (y + 2 * d) - y * root, SingularMeritError, "efficiency at given power")


def efficiency_at_power_gain_buttiker(dP, branch, x, y, eta_c):
    arr = _check_power_gain(dP)
    root = Branch.parse(branch).sign * np.sqrt(-arr)
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    num = 0.5 * np.asarray(eta_c) * x * y * (1 + arr)
    return _divide(num, (y + 2) - y * root, SingularMeritError, "efficiency at given power")


# --------------------------------------------------------------------------
# Bounds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundFunctions:
    """H_m = d x / (x - 1)^2 and its d = 1 counterpart H.

    The admissible figure of merit lies between 0 and H_m: with d > 0 it is
    0 <= y <= H_m for x > 0 and H_m <= y <= 0 for x < 0; negative d swaps
    the sides because H_m changes sign with d.
    """

    h_m: float
    h: float
    x: float
    d: float

    @property
    def interval(self) -> tuple[float, float]:
        return (min(0.0, self.h_m), max(0.0, self.h_m))

    @property
    def orientation(self) -> str:
        return "0 <= y_m <= H_m" if self.h_m >= 0 else "H_m <= y_m <= 0"

    def admits(self, y: float, tol: float = 1e-9) -> bool:
        lo, hi = self.interval
        return lo - tol <= y <= hi + tol


def h_function(x, d=1.0):
    x, d = np.asarray(x, dtype=float), np.asarray(d, dtype=float)
    return _divide(d * x, (x - 1) ** 2, DomainError, "H_m pole at x_m = 1")


def bound_functions(x: float, d: float) -> BoundFunctions:
    if x == 1:
        raise DomainError("H_m has a pole at x_m = 1 (figure of merit unbounded)")
    return BoundFunctions(h_m=h_function(x, d), h=h_function(x, 1.0), x=float(x), d=float(d))


def efficiency_bound(x, dP, branch, eta_c):
    """Largest efficiency at power gain dP reachable with asymmetry x (y_m = H_m)."""
    arr = _check_power_gain(dP)
    eps = 1 + Branch.parse(branch).sign * np.sqrt(-arr)
    x = np.asarray(x, dtype=float)
    num = 0.5 * np.asarray(eta_c) * x**2 * (1 + arr)
    den = 2 * (x**2 - x + 1) - eps * x
    return _divide(num, den, SingularMeritError, "efficiency bound")


# --------------------------------------------------------------------------
# Operating points
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PerformancePoint:
    forces: ForceVector
    currents: CurrentVector
    regime: Regime
    power: float
    p_max: float
    power_gain: float
    load: float
    branch: Branch
    eta: float | None
    eta_at_pmax: float | None
    eta_c: float | None
    eta_c_at_pmax: float | None


def _efficiency_pair(currents, forces, temperature, regime):
    if regime not in ENGINE_REGIMES:
        return None, None
    T = temperature
    q_in = input_heat(currents, regime)
    power = -T * currents.j_ln * forces.x_lv
    eta_c = carnot_efficiency(currents, forces.x_lt * T**2, forces.x_pt * T**2, T, regime)
    return power / q_in, eta_c


def performance_point(
    L3: OnsagerMatrix,
    temperature: float,
    x_lt: float,
    x_pt: float,
    load: float = 1.0,
    mu: float = 0.0,
    regime: Regime | None = None,
) -> PerformancePoint:
    """Evaluate the engine at X_L^V = load * X_L^V*.

    The regime is classified at the operating point unless given. The Carnot
    reference at maximum power re-evaluates the currents at X_L^V*.
    """
    T = temperature
    mp = max_power(L3, x_lt, x_pt, T)
    forces = ForceVector(x_lv=load * mp.x_lv_star, x_lt=x_lt, x_pt=x_pt)
    currents = linear_currents(L3, forces, T, mu)
    if regime is None:
        regime = classify_regime(currents)
    else:
        regime = Regime(regime)
    power = -T * currents.j_ln * forces.x_lv
    star = ForceVector(x_lv=mp.x_lv_star, x_lt=x_lt, x_pt=x_pt)
    star_currents = linear_currents(L3, star, T, mu)
    eta, eta_c = _efficiency_pair(currents, forces, T, regime)
    eta_star, eta_c_star = _efficiency_pair(star_currents, star, T, regime)
    gain = (power - mp.p_max) / mp.p_max if mp.p_max != 0 else float("nan")
    return PerformancePoint(
        forces=forces,
        currents=currents,
        regime=regime,
        power=power,
        p_max=mp.p_max,
        power_gain=gain,
        load=load,
        branch=Branch.PLUS if load >= 1 else Branch.MINUS,
        eta=eta,
        eta_at_pmax=eta_star,
        eta_c=eta_c,
        eta_c_at_pmax=eta_c_star,
    )
