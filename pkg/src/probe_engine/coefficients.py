"""Transport coefficients and engine merit parameters from reduced Onsager matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DegenerateError, OnsagerCasimirError, RegimeError
from .kernel import BUTTIKER2, VPROBE3, OnsagerMatrix
from .labels import Regime

THETAS = ("A", "A'", "A''", "B", "B'", "C", "C'")


class SeebeckSet(NamedTuple):
    s_ll: float
    s_lp: float
    s_ll_rev: float
    s_lp_rev: float


class ConductanceSet(NamedTuple):
    g_ll: float
    k_ll: float
    k_pp: float
    k_lp: float
    k_pl: float


@dataclass(frozen=True)
class TransportCoefficients:
    """Local and non-local coefficients of the voltage-probe engine.

    ``*_rev`` are the Seebeck coefficients at reversed field. Peltier entries
    are the heat-per-particle ratios at zero thermal bias.
    """

    temperature: float
    s_ll: float
    s_lp: float
    s_ll_rev: float
    s_lp_rev: float
    g_ll: float
    k_ll: float
    k_pp: float
    k_lp: float
    k_pl: float
    pi_ll: float
    pi_pl: float
    field: int = 1

    def peltier_residuals(self) -> tuple[float, float]:
        """Pi_LL - T S_LL(-B) and Pi_PL - T S_LP(-B)."""
        T = self.temperature
        return (self.pi_ll - T * self.s_ll_rev, self.pi_pl - T * self.s_lp_rev)

    def scaled(self, factor: float) -> "TransportCoefficients":
        """Coefficients of an Onsager matrix multiplied by ``factor``."""
        return TransportCoefficients(
            temperature=self.temperature,
            s_ll=self.s_ll,
            s_lp=self.s_lp,
            s_ll_rev=self.s_ll_rev,
            s_lp_rev=self.s_lp_rev,
            g_ll=self.g_ll * factor,
            k_ll=self.k_ll * factor,
            k_pp=self.k_pp * factor,
            k_lp=self.k_lp * factor,
            k_pl=self.k_pl * factor,
            pi_ll=self.pi_ll,
            pi_pl=self.pi_pl,
            field=self.field,
        )


@dataclass(frozen=True)
class ButtikerCoefficients:
    """Two-terminal-limit coefficients when the probe blocks heat as well."""

    temperature: float
    s_ll: float
    s_ll_rev: float
    g_ll: float
    k_ll: float

    @property
    def x(self) -> float:
        if self.s_ll_rev == 0:
            raise DegenerateError("S_LL(-B) vanishes; asymmetry undefined")
        return self.s_ll / self.s_ll_rev

    @property
    def y(self) -> float:
        return self.g_ll * self.s_ll * self.s_ll_rev * self.temperature / self.k_ll

    @property
    def zt(self) -> float:
        """Time-symmetric figure of merit G S^2 T / K."""
        return self.g_ll * self.s_ll**2 * self.temperature / self.k_ll


def _require_l11(matrix: OnsagerMatrix) -> float:
    l11 = matrix.at(1, 1)
    if not l11 > 0:
        raise DegenerateError(f"L_11 = {l11!r} must be positive (degenerate conductor)")
    return l11


def seebeck(
    L3: OnsagerMatrix,
    L3_rev: OnsagerMatrix | None,
    temperature: float,
    tol: float = 1e-8,
) -> SeebeckSet:
    """Local and non-local Seebeck coefficients at +B and -B.

    Both field signs are read off the +B matrix. If the -B matrix is supplied
    its own +B-style coefficients are compared with the reversed ones and an
    :class:`OnsagerCasimirError` is raised on disagreement.
    """
    if L3.kind != VPROBE3:
        raise ValueError("seebeck needs a VPROBE3 matrix")
    T = temperature
    l11 = _require_l11(L3)
    m = L3.at
    out = SeebeckSet(
        s_ll=m(1, 2) / (T * l11),
        s_lp=m(1, 3) / (T * l11),
        s_ll_rev=m(2, 1) / (T * l11),
        s_lp_rev=m(3, 1) / (T * l11),
    )
    if L3_rev is not None:
        rl11 = _require_l11(L3_rev)
        measured = (L3_rev.at(1, 2) / (T * rl11), L3_rev.at(1, 3) / (T * rl11))
        scale = max(1.0, abs(out.s_ll_rev), abs(out.s_lp_rev))
        for got, want in zip(measured, (out.s_ll_rev, out.s_lp_rev)):
            if abs(got - want) > tol * scale:
                raise OnsagerCasimirError(
                    f"reversed-field Seebeck mismatch: {got!r} vs {want!r}"
                )
    return out


def conductances(L3: OnsagerMatrix, temperature: float) -> ConductanceSet:
    """Electrical conductance G_LL and thermal conductances K_ij at J^N = 0."""
    if L3.kind != VPROBE3:
        raise ValueError("conductances needs a VPROBE3 matrix")
    T = temperature
    l11 = _require_l11(L3)
    m = L3.at
    den = T**2 * l11
    return ConductanceSet(
        g_ll=l11 / T,
        k_ll=(m(2, 2) * l11 - m(2, 1) * m(1, 2)) / den,
        k_pp=(m(3, 3) * l11 - m(3, 1) * m(1, 3)) / den,
        k_lp=(l11 * m(2, 3) - m(2, 1) * m(1, 3)) / den,
        k_pl=(l11 * m(3, 2) - m(1, 2) * m(3, 1)) / den,
    )


def transport_coefficients(
    L3: OnsagerMatrix,
    temperature: float,
    L3_rev: OnsagerMatrix | None = None,
    tol: float = 1e-12,
) -> TransportCoefficients:
    """All coefficients of the voltage-probe engine.

    The Peltier coefficients are built from flux ratios and then checked
    against T S(-B) at tolerance ``tol`` (relative to their magnitude).
    """
    T = temperature
    s = seebeck(L3, L3_rev, T)
    g = conductances(L3, T)
    l11 = L3.at(1, 1)
    coeffs = TransportCoefficients(
        temperature=T,
        s_ll=s.s_ll,
        s_lp=s.s_lp,
        s_ll_rev=s.s_ll_rev,
        s_lp_rev=s.s_lp_rev,
        g_ll=g.g_ll,
        k_ll=g.k_ll,
        k_pp=g.k_pp,
        k_lp=g.k_lp,
        k_pl=g.k_pl,
        pi_ll=L3.at(2, 1) / l11,
        pi_pl=L3.at(3, 1) / l11,
        field=L3.field,
    )
    scale = max(1.0, abs(coeffs.pi_ll), abs(coeffs.pi_pl))
    if max(abs(r) for r in coeffs.peltier_residuals()) > tol * scale:
        raise OnsagerCasimirError("Peltier coefficients disagree with T S(-B)")
    return coeffs


def buttiker_coefficients(L2: OnsagerMatrix, temperature: float) -> ButtikerCoefficients:
    """Seebeck, G_LL and K_LL of the Buttiker-probe matrix."""
    if L2.kind != BUTTIKER2:
        raise ValueError("buttiker_coefficients needs a BUTTIKER2 matrix")
    T = temperature
    l11 = _require_l11(L2)
    m = L2.at
    return ButtikerCoefficients(
        temperature=T,
        s_ll=m(1, 2) / (T * l11),
        s_ll_rev=m(2, 1) / (T * l11),
        g_ll=l11 / T,
        k_ll=(m(2, 2) * l11 - m(2, 1) * m(1, 2)) / (T**2 * l11),
    )


# --------------------------------------------------------------------------
# Merit parameters
# --------------------------------------------------------------------------


def regime_conductance(coeffs: TransportCoefficients, regime: Regime) -> float:
    regime = Regime(regime)
    if regime is Regime.L:
        return coeffs.k_ll
    if regime is Regime.P:
        return coeffs.k_pp
    if regime is Regime.LP:
        return coeffs.k_lp
    raise RegimeError(f"no merit parameters for regime {regime.value}")


def theta_products(coeffs: TransportCoefficients) -> dict[str, float]:
    c = coeffs
    return {
        "A": c.s_ll * c.s_lp * c.g_ll,
        "A'": c.s_ll * c.s_lp_rev * c.g_ll,
        "A''": c.s_lp * c.s_ll_rev * c.g_ll,
        "B": c.s_lp**2 * c.g_ll,
        "B'": c.s_lp * c.s_lp_rev * c.g_ll,
        "C": c.s_ll**2 * c.g_ll,
        "C'": c.s_ll * c.s_ll_rev * c.g_ll,
    }


def merit_components(
    coeffs: TransportCoefficients, temperature: float, regime: Regime
) -> dict[str, float]:
    """Dimensionless Z_m^theta T = theta T / K_m for the seven theta products."""
    k = regime_conductance(coeffs, regime)
    if k == 0 or not math.isfinite(k):
        raise RegimeError(f"regime {Regime(regime).value} undefined: its conductance is {k!r}")
    return {name: value * temperature / k for name, value in theta_products(coeffs).items()}


def characteristic_parameter(coeffs: TransportCoefficients, delta: float, regime: Regime) -> float:
    """d_m: thermal-conductance combination set by the bias ratio delta."""
    c = coeffs
    regime = Regime(regime)
    if regime is Regime.L:
        return delta * (c.k_pl + c.k_lp) / c.k_ll + c.k_pp / c.k_ll + delta**2
    if regime is Regime.P:
        return delta * (c.k_pl + c.k_lp) / c.k_pp + delta**2 * c.k_ll / c.k_pp + 1.0
    if regime is Regime.LP:
        return (delta * c.k_pl + c.k_pp) / c.k_lp + delta**2 * c.k_ll / c.k_lp + delta
    raise RegimeError(f"no characteristic parameter for regime {regime.value}")


@dataclass(frozen=True)
class MeritSet:
    """Merit parameters of one regime at bias ratio delta = X_L^T / X_P^T.

    ``z_sym`` is the time-symmetric figure (2 delta Z^A + Z^B + delta^2 Z^C) T.
    The ``buttiker_*`` fields are filled only when Buttiker-limit
    coefficients were supplied.
    """

    regime: Regime
    delta: float
    components: dict
    r: float
    y: float
    x: float
    d: float
    z_sym: float
    buttiker_x: float | None = None
    buttiker_y: float | None = None
    buttiker_zt: float | None = None

    def efficiency_at_max_power(self, eta_c: float) -> float:
        from .performance import efficiency_at_max_power

        return efficiency_at_max_power(eta_c, self.x, self.y, self.d)


def merit_set(
    coeffs: TransportCoefficients,
    delta: float,
    temperature: float,
    regime: Regime,
    buttiker: ButtikerCoefficients | None = None,
) -> MeritSet:
    """Asymmetry x_m, figure of merit y_m, r_m and d_m for ``regime``."""
    if not math.isfinite(delta):
        raise ValueError("delta must be finite")
    z = merit_components(coeffs, temperature, regime)
    r = 2 * delta * z["A"] + z["B"] + delta**2 * z["C"]
    y = delta * (z["A'"] + z["A''"]) + z["B'"] + delta**2 * z["C'"]
    if y == 0:
        raise DegenerateError("y_m vanishes; asymmetry parameter undefined")
    extra = {}
    if buttiker is not None:
        extra = dict(buttiker_x=buttiker.x, buttiker_y=buttiker.y, buttiker_zt=buttiker.zt)
    return MeritSet(
        regime=Regime(regime),
        delta=float(delta),
        components=z,
        r=r,
        y=y,
        x=r / y,
        d=characteristic_parameter(coeffs, delta, regime),
        z_sym=r,
        **extra,
    )


def buttiker_merit_set(bc: ButtikerCoefficients, delta: float) -> MeritSet:
    """Merit set of the Buttiker-probe engine (heat-blocking probe).

    Only the local terms survive: r_L = delta^2 Z^C T, y_L = delta^2 y and
    d_L = delta^2, so x_L reduces to S_LL(B) / S_LL(-B).
    """
    T = bc.temperature
    z_c = bc.s_ll**2 * bc.g_ll * T / bc.k_ll
    z_cp = bc.y
    r = delta**2 * z_c
    y = delta**2 * z_cp
    if y == 0:
        raise DegenerateError("y vanishes; asymmetry parameter undefined")
    return MeritSet(
        regime=Regime.L,
        delta=float(delta),
        components={"C": z_c, "C'": z_cp},
        r=r,
        y=y,
        x=r / y,
        d=delta**2,
        z_sym=r,
        buttiker_x=bc.x,
        buttiker_y=bc.y,
        buttiker_zt=bc.zt,
    )
