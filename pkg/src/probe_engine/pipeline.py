"""End-to-end evaluation of the dot-ring engine at one parameter point."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .coefficients import (
    ButtikerCoefficients,
    MeritSet,
    TransportCoefficients,
    buttiker_coefficients,
    merit_set,
    transport_coefficients,
)
from .dotring import DotRingModel, transmission_set
from .errors import DomainError, ProbeEngineError
from .kernel import (
    DEFAULT_TOL,
    DEFAULT_WINDOW,
    BoundReport,
    OnsagerMatrix,
    assemble_onsager4,
    check_bounds,
    reduce_buttiker,
    reduce_voltage_probe,
)
from .labels import ENGINE_REGIMES
from .performance import (
    BoundFunctions,
    PerformancePoint,
    bound_functions,
    efficiency_at_max_power,
    performance_point,
)

POLE_TOL = 1e-9


@dataclass(frozen=True)
class OnsagerChain:
    """FULL4 matrix of a model and its voltage-probe and Buttiker reductions."""

    model: DotRingModel
    full: OnsagerMatrix
    vprobe: OnsagerMatrix
    buttiker: OnsagerMatrix

    def coefficients(self, reversed_chain: "OnsagerChain | None" = None) -> TransportCoefficients:
        rev = reversed_chain.vprobe if reversed_chain is not None else None
        return transport_coefficients(self.vprobe, self.model.temperature, rev)

    def buttiker_coefficients(self) -> ButtikerCoefficients:
        return buttiker_coefficients(self.buttiker, self.model.temperature)


def onsager_chain(
    model: DotRingModel, window: float = DEFAULT_WINDOW, tol: float = DEFAULT_TOL
) -> OnsagerChain:
    full = assemble_onsager4(
        transmission_set(model), model.temperature, model.mu, window=window, tol=tol, field=model.field
    )
    vprobe = reduce_voltage_probe(full)
    return OnsagerChain(model=model, full=full, vprobe=vprobe, buttiker=reduce_buttiker(vprobe))


@dataclass(frozen=True)
class GridPoint:
    """Engine analysis at one bias ratio delta = X_L^T / X_P^T and scale X_L^T."""

    delta: float
    x_lt: float
    point: PerformancePoint | None = None
    merit: MeritSet | None = None
    bounds: BoundReport | None = None
    h: BoundFunctions | None = None
    eta_formula: float | None = None
    at_pole: bool = False
    error: str | None = None

    @property
    def probe_hotter(self) -> bool:
        # delta < 1 means the probe is biased more strongly than L
        return abs(self.delta) < 1

    @property
    def bound_ok(self) -> bool | None:
        return None if self.h is None else self.h.admits(self.merit.y, POLE_TOL)


def analyse_point(
    chain: OnsagerChain,
    coeffs: TransportCoefficients,
    delta: float,
    x_lt: float,
) -> GridPoint:
    """Max-power operating point, merit set and bound residuals.

    Library errors are captured in ``error`` rather than raised so that a
    sweep can record them in-row.
    """
    if delta == 0 or not math.isfinite(delta):
        return GridPoint(delta, x_lt, error="DomainError: delta must be finite and nonzero")
    T = chain.model.temperature
    try:
        x_pt = x_lt / delta
        pp = performance_point(chain.vprobe, T, x_lt, x_pt, mu=chain.model.mu)
        bounds = check_bounds(chain.vprobe, 1.0 / delta)
        if pp.regime not in ENGINE_REGIMES:
            return GridPoint(delta, x_lt, point=pp, bounds=bounds)
        ms = merit_set(coeffs, delta, T, pp.regime)
        eta = efficiency_at_max_power(pp.eta_c_at_pmax, ms.x, ms.y, ms.d)
        at_pole = abs(ms.x - 1) < POLE_TOL
        h = None
        if not at_pole:
            try:
                h = bound_functions(ms.x, ms.d)
            except DomainError:
                at_pole = True
        return GridPoint(
            delta, x_lt, point=pp, merit=ms, bounds=bounds, h=h, eta_formula=eta, at_pole=at_pole
        )
    except (ProbeEngineError, ArithmeticError, ValueError) as exc:
        return GridPoint(delta, x_lt, error=f"{type(exc).__name__}: {exc}")
