"""Invariant checks at a single parameter point of the dot-ring engine."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ProbeEngineError
from ..dotring import transmission_set
from ..kernel import VPROBE3, ForceVector
from ..performance import max_power, output_power, power_ratio
from ..pipeline import analyse_point, onsager_chain
from .config import SweepConfig


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        text = f"{mark}  {self.name:<28s} value={self.value:.3e}  tol={self.tol:.1e}"
        return f"{text}  {self.detail}" if self.detail else text


def _check(name, value, tol, detail="", below=True):
    value = float(value)
    ok = value <= tol if below else value >= tol
    return CheckResult(name, bool(ok and np.isfinite(value)), value, tol, detail)


def run_checks(
    config: SweepConfig,
    phi: float,
    delta: float,
    x_lt: float = 1e-3,
    samples: int = 50,
    seed: int = 0,
) -> list[CheckResult]:
    q = config.quadrature
    model = config.model.build(phi)
    T = model.temperature
    results: list[CheckResult] = []
    plus = onsager_chain(model, q.window, q.tol)
    minus = onsager_chain(model.reversed(), q.window, q.tol)

    energies = np.linspace(model.mu - 10 * T, model.mu + 10 * T, 201)
    bad = transmission_set(model).violations(energies)
    results.append(CheckResult("transmission sum rule", not bad, float(len(bad)), 0.0, "; ".join(bad[:3])))

    oc = np.max(np.abs(plus.full.values - minus.full.values.T))
    results.append(_check("onsager-casimir L4", oc, 1e-9))
    oc3 = abs(plus.buttiker.at(1, 2) - minus.buttiker.at(2, 1))
    results.append(_check("onsager-casimir L''12", oc3, 1e-9))

    rng = np.random.default_rng(seed)
    worst_v = worst_b = 0.0
    for _ in range(samples):
        x_lv, xlt, x_pt = rng.uniform(-1, 1, 3)
        f3 = ForceVector(x_lv=x_lv, x_lt=xlt, x_pt=x_pt)
        x_pv = float(plus.vprobe.eliminated @ f3.as_array(VPROBE3))
        full = plus.full.currents(ForceVector(x_lv, xlt, x_pv, x_pt))
        red = plus.vprobe.currents(f3)
        scale = max(1.0, float(np.max(np.abs(full))))
        err = max(abs(full[2]), *np.abs(full[[0, 1, 3]] - red)) / scale
        worst_v = max(worst_v, err)
        x_pt_b = float(plus.buttiker.eliminated @ np.array([x_lv, xlt]))
        red3 = plus.vprobe.currents(ForceVector(x_lv=x_lv, x_lt=xlt, x_pt=x_pt_b))
        red2 = plus.buttiker.currents(ForceVector(x_lv=x_lv, x_lt=xlt))
        scale = max(1.0, float(np.max(np.abs(red3))))
        worst_b = max(worst_b, max(abs(red3[2]), *np.abs(red3[:2] - red2)) / scale)
    results.append(_check("voltage-probe reduction", worst_v, 1e-12))
    results.append(_check("buttiker reduction", worst_b, 1e-12))

    try:
        coeffs = plus.coefficients(minus)
        results.append(CheckResult("peltier / reversed seebeck", True, 0.0, 1e-12))
    except ProbeEngineError as exc:
        results.append(CheckResult("peltier / reversed seebeck", False, float("nan"), 1e-12, str(exc)))
        coeffs = plus.coefficients()

    gp = analyse_point(plus, coeffs, delta, x_lt)
    if gp.error:
        results.append(CheckResult("operating point", False, float("nan"), 0.0, gp.error))
        return results
    res = gp.bounds.residuals
    results.append(_check("onsager bounds (min residual)", min(res), gp.bounds.tol, below=False))
    regime = gp.point.regime.value
    if gp.merit is None:
        results.append(CheckResult("engine regime", False, 0.0, 0.0, f"regime {regime}"))
    else:
        if gp.h is not None:
            lo, hi = gp.h.interval
            dist = max(lo - gp.merit.y, gp.merit.y - hi, 0.0)
            results.append(_check("y_m within H_m bound", dist, 1e-9, gp.h.orientation))
        else:
            results.append(CheckResult("y_m within H_m bound", True, 0.0, 0.0, "x_m = 1 pole, skipped"))
        rel = abs(gp.eta_formula - gp.point.eta_at_pmax) / max(abs(gp.point.eta_at_pmax), 1e-300)
        results.append(_check("eta(P_max) formula vs direct", rel, 1e-9, f"regime {regime}"))
        ok = 0 < gp.point.eta_c_at_pmax < 1
        results.append(CheckResult("0 < eta_c < 1", ok, gp.point.eta_c_at_pmax, 1.0))

    x_pt = x_lt / delta
    mp = max_power(plus.vprobe, x_lt, x_pt, T)

    def power(x_lv):
        return output_power(plus.vprobe, ForceVector(x_lv=x_lv, x_lt=x_lt, x_pt=x_pt), T)

    h = 1e-6 * abs(mp.x_lv_star)
    slope = (power(mp.x_lv_star + h) - power(mp.x_lv_star - h)) / (2 * h)
    results.append(_check("max-power stationarity", abs(slope) * abs(mp.x_lv_star) / mp.p_max, 1e-6))
    eps = np.linspace(0.05, 1.95, 39)
    ratio = np.array([power(e * mp.x_lv_star) for e in eps]) / mp.p_max
    results.append(_check("P/P_max = eps (2 - eps)", np.max(np.abs(ratio - power_ratio(eps))), 1e-12))
    return results
