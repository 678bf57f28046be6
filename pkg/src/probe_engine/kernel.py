"""Onsager matrices from transmission functions, and probe eliminations.

Reduced units throughout: h = e = k_B = 1, so a chemical-potential offset is a
voltage and temperatures are energies. Terminals are ordered (L, P, R); R is
the reference reservoir.

Flux/force ordering of the matrices:

* FULL4:     J = (J_L^N, J_L^Q, J_P^N, J_P^Q),  X = (X_L^V, X_L^T, X_P^V, X_P^T)
* VPROBE3:   J = (J_L^N, J_L^Q, J_P^Q),         X = (X_L^V, X_L^T, X_P^T)
* BUTTIKER2: J = (J_L^N, J_L^Q),                X = (X_L^V, X_L^T)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import expit

from .errors import QuadratureError, SingularEliminationError

TERMINALS = ("L", "P", "R")
L, P, R = 0, 1, 2

FULL4 = "FULL4"
VPROBE3 = "VPROBE3"
BUTTIKER2 = "BUTTIKER2"

FLUX_LABELS = {
    FULL4: ("J_L^N", "J_L^Q", "J_P^N", "J_P^Q"),
    VPROBE3: ("J_L^N", "J_L^Q", "J_P^Q"),
    BUTTIKER2: ("J_L^N", "J_L^Q"),
}
FORCE_LABELS = {
    FULL4: ("X_L^V", "X_L^T", "X_P^V", "X_P^T"),
    VPROBE3: ("X_L^V", "X_L^T", "X_P^T"),
    BUTTIKER2: ("X_L^V", "X_L^T"),
}

DEFAULT_WINDOW = 40.0
DEFAULT_TOL = 1e-10
LINEAR_RESPONSE_THRESHOLD = 0.1


class LinearResponseWarning(UserWarning):
    """Reservoir offsets are large compared with the temperature."""


def fermi(energy, temperature, mu):
    """Fermi-Dirac occupation, overflow-safe."""
    return expit(-(np.asarray(energy, dtype=float) - mu) / temperature)


def fermi_window(energy, temperature, mu):
    """-df/dE, the thermal broadening kernel (integrates to one)."""
    x = np.abs((np.asarray(energy, dtype=float) - mu) / temperature)
    ex = np.exp(-x)
    return ex / (temperature * (1.0 + ex) ** 2)


# --------------------------------------------------------------------------
# Value types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReservoirState:
    """Temperatures and chemical potentials of L and P relative to R.

    R sits at (temperature, mu) by construction, so it carries no offsets.
    """

    temperature: float
    mu: float = 0.0
    dT_L: float = 0.0
    dT_P: float = 0.0
    dmu_L: float = 0.0
    dmu_P: float = 0.0
    warn_threshold: float = LINEAR_RESPONSE_THRESHOLD

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        offsets = (self.dT_L, self.dT_P, self.dmu_L, self.dmu_P)
        if not all(math.isfinite(v) for v in offsets):
            raise ValueError("reservoir offsets must be finite")
        worst = max(abs(v) for v in offsets) / self.temperature
        if worst > self.warn_threshold:
            warnings.warn(
                f"reservoir offset / T = {worst:.3g} exceeds {self.warn_threshold}; "
                "linear response may be inaccurate",
                LinearResponseWarning,
                stacklevel=2,
            )

    @property
    def temperatures(self) -> np.ndarray:
        T = self.temperature
        return np.array([T + self.dT_L, T + self.dT_P, T])

    @property
    def potentials(self) -> np.ndarray:
        mu = self.mu
        return np.array([mu + self.dmu_L, mu + self.dmu_P, mu])

    def forces(self) -> "ForceVector":
        T = self.temperature
        return ForceVector(
            x_lv=self.dmu_L / T,
            x_lt=self.dT_L / T**2,
            x_pv=self.dmu_P / T,
            x_pt=self.dT_P / T**2,
        )

    @classmethod
    def from_forces(cls, forces: "ForceVector", temperature: float, mu: float = 0.0, **kw):
        T = temperature
        return cls(
            temperature=T,
            mu=mu,
            dT_L=forces.x_lt * T**2,
            dT_P=forces.x_pt * T**2,
            dmu_L=forces.x_lv * T,
            dmu_P=forces.x_pv * T,
            **kw,
        )


@dataclass(frozen=True)
class ForceVector:
    """Generalized forces X^V = dV/T and X^T = dT/T^2 for L and P."""

    x_lv: float = 0.0
    x_lt: float = 0.0
    x_pv: float = 0.0
    x_pt: float = 0.0

    @property
    def xi(self) -> float | None:
        """X_P^T / X_L^T, or None when X_L^T = 0."""
        return None if self.x_lt == 0 else self.x_pt / self.x_lt

    @property
    def delta(self) -> float | None:
        """X_L^T / X_P^T (= 1/xi), or None when X_P^T = 0."""
        return None if self.x_pt == 0 else self.x_lt / self.x_pt

    def as_array(self, kind: str = FULL4) -> np.ndarray:
        if kind == FULL4:
            return np.array([self.x_lv, self.x_lt, self.x_pv, self.x_pt])
        if kind == VPROBE3:
            return np.array([self.x_lv, self.x_lt, self.x_pt])
        if kind == BUTTIKER2:
            return np.array([self.x_lv, self.x_lt])
        raise ValueError(f"unknown matrix kind {kind!r}")


@dataclass(frozen=True, eq=False)
class CurrentVector:
    """Particle, heat and energy currents out of each reservoir (L, P, R)."""

    particle: np.ndarray
    heat: np.ndarray
    energy: np.ndarray

    @property
    def j_ln(self):
        return float(self.particle[L])

    @property
    def j_pn(self):
        return float(self.particle[P])

    @property
    def j_rn(self):
        return float(self.particle[R])

    @property
    def j_lq(self):
        return float(self.heat[L])

    @property
    def j_pq(self):
        return float(self.heat[P])

    @property
    def j_rq(self):
        return float(self.heat[R])

    @classmethod
    def from_terminal_fluxes(cls, j_ln, j_lq, j_pn, j_pq, potentials):
        """Complete (J_L, J_P) to all three terminals using conservation.

        ``potentials`` are the absolute chemical potentials (mu_L, mu_P, mu_R).
        J^U = J^Q + mu J^N per terminal and both particle and energy currents
        sum to zero.
        """
        mu = np.asarray(potentials, dtype=float)
        j_rn = -(j_ln + j_pn)
        u_l = j_lq + mu[L] * j_ln
        u_p = j_pq + mu[P] * j_pn
        u_r = -(u_l + u_p)
        j_rq = u_r - mu[R] * j_rn
        return cls(
            particle=np.array([j_ln, j_pn, j_rn]),
            heat=np.array([j_lq, j_pq, j_rq]),
            energy=np.array([u_l, u_p, u_r]),
        )


@dataclass(frozen=True, eq=False)
class OnsagerMatrix:
    """A linear-response matrix with its flux/force labelling.

    ``eliminated`` holds, for reduced matrices, the coefficients expressing the
    eliminated force as a linear functional of the remaining forces.
    """

    kind: str
    values: np.ndarray
    field: int = 1
    eliminated: np.ndarray | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        n = {FULL4: 4, VPROBE3: 3, BUTTIKER2: 2}.get(self.kind)
        if n is None:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        if vals.shape != (n, n):
            raise ValueError(f"{self.kind} needs a {n}x{n} matrix, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.eliminated is not None:
            elim = np.array(self.eliminated, dtype=float)
            elim.setflags(write=False)
            object.__setattr__(self, "eliminated", elim)

    @property
    def flux_labels(self):
        return FLUX_LABELS[self.kind]

    @property
    def force_labels(self):
        return FORCE_LABELS[self.kind]

    def at(self, i: int, j: int) -> float:
        """Entry L_ij with 1-based indices."""
        return float(self.values[i - 1, j - 1])

    def currents(self, forces) -> np.ndarray:
        if isinstance(forces, ForceVector):
            forces = forces.as_array(self.kind)
        return self.values @ np.asarray(forces, dtype=float)

    def entropy_production(self, forces) -> float:
        if isinstance(forces, ForceVector):
            forces = forces.as_array(self.kind)
        x = np.asarray(forces, dtype=float)
        return float(x @ self.values @ x)

    def scaled(self, factor: float) -> "OnsagerMatrix":
        elim = self.eliminated
        return OnsagerMatrix(self.kind, self.values * factor, self.field, elim)


# --------------------------------------------------------------------------
# Transmission functions
# --------------------------------------------------------------------------


def _transpose_pairs(func):
    def reversed_func(energy):
        return np.swapaxes(func(energy), -1, -2)

    return reversed_func


@dataclass(frozen=True)
class TransmissionSet:
    """Energy-resolved transmissions T[a, b](E) between terminals (L, P, R).

    ``forward(E)`` returns an array of shape ``E.shape + (3, 3)`` at field +B
    (diagonal ignored). ``backward`` gives the same at -B; when omitted it is
    taken from reciprocity, T_ab(-B) = T_ba(+B).
    """

    forward: Callable[[np.ndarray], np.ndarray]
    backward: Callable[[np.ndarray], np.ndarray] | None = None
    channels: float = 1.0

    def __call__(self, energy) -> np.ndarray:
        return self.forward(energy)

    def pair(self, a, b) -> Callable[[float], float]:
        """Scalar function E -> T_ab(E); terminals given by name or index."""
        i = TERMINALS.index(a) if isinstance(a, str) else int(a)
        j = TERMINALS.index(b) if isinstance(b, str) else int(b)
        if i == j:
            raise ValueError("transmission needs two distinct terminals")
        fwd = self.forward
        return lambda e: float(fwd(e)[..., i, j])

    def reversed(self) -> "TransmissionSet":
        back = self.backward if self.backward is not None else _transpose_pairs(self.forward)
        return TransmissionSet(forward=back, backward=self.forward, channels=self.channels)

    @classmethod
    def constant(cls, tau: float) -> "TransmissionSet":
        """Energy-independent transmission tau between every pair."""
        block = np.full((3, 3), float(tau))
        np.fill_diagonal(block, 0.0)

        def func(energy):
            e = np.asarray(energy, dtype=float)
            return np.broadcast_to(block, e.shape + (3, 3)).copy()

        return cls(forward=func, channels=max(1.0, float(tau)))

    def violations(self, energies, tol: float = 1e-10) -> list[str]:
        """Check positivity, the sum rule and reciprocity on sample energies."""
        e = np.atleast_1d(np.asarray(energies, dtype=float))
        fwd = np.asarray(self.forward(e))
        bwd = np.asarray(self.reversed().forward(e))
        off = ~np.eye(3, dtype=bool)
        problems = []
        if np.any(fwd[:, off] < -tol):
            problems.append("negative transmission")
        if np.any(fwd[:, off] > self.channels + tol):
            problems.append("transmission exceeds channel count")
        masked = np.where(off, fwd, 0.0)
        rows, cols = masked.sum(axis=-1), masked.sum(axis=-2)
        if np.max(np.abs(rows - cols)) > tol:
            problems.append("sum rule violated")
        if np.max(np.abs(np.where(off, fwd - np.swapaxes(bwd, -1, -2), 0.0))) > tol:
            problems.append("field-reversal reciprocity violated")
        return problems


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------


def fermi_derivative_moment(
    n: int,
    temperature: float,
    mu: float,
    transmission: Callable[[float], float],
    window: float = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOL,
) -> float:
    """Integral of (-df/dE) (E - mu)^n T(E) over mu +/- window * T.

    Adaptive Gauss-Kronrod (QUADPACK) with absolute tolerance ``tol``.
    """
    if n not in (0, 1, 2):
        raise ValueError("moment order must be 0, 1 or 2")
    if not temperature > 0:
        raise ValueError("temperature must be positive")

    def integrand(e):
        t = float(transmission(e))
        if not math.isfinite(t):
            raise QuadratureError(f"non-finite transmission {t} at E={e!r}", energy=e)
        return fermi_window(e, temperature, mu) * (e - mu) ** n * t

    lo, hi = mu - window * temperature, mu + window * temperature
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(
                integrand, lo, hi, epsabs=tol, epsrel=0.0, limit=500, points=[mu]
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature did not converge: {exc}") from exc
    return float(value)


def _quad_vector(integrand, lo, hi, tol, points=()):
    """Adaptive GK21 on a vector-valued integrand with a finiteness guard."""

    def guarded(e):
        v = integrand(e)
        if not np.all(np.isfinite(v)):
            raise QuadratureError(f"non-finite integrand at E={e!r}", energy=e)
        return v

    pts = [p for p in points if lo < p < hi]
    value, err, info = integrate.quad_vec(
        guarded, lo, hi, epsabs=tol, epsrel=0.0, limit=20000, points=pts or None,
        full_output=True,
    )
    if not info.success:
        raise QuadratureError(f"vector quadrature did not converge (error estimate {err:.3g})")
    return np.asarray(value)


def transmission_moments(
    tset: TransmissionSet,
    temperature: float,
    mu: float,
    window: float = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Moments M[n, a, b] = int (-df/dE)(E - mu)^n T_ab(E) dE for n = 0, 1, 2."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    powers = np.arange(3)

    def integrand(e):
        t = np.asarray(tset(e), dtype=float).reshape(3, 3)
        w = fermi_window(e, temperature, mu) * (e - mu) ** powers
        return (w[:, None, None] * t[None, :, :]).ravel()

    lo, hi = mu - window * temperature, mu + window * temperature
    return _quad_vector(integrand, lo, hi, tol, points=(mu,)).reshape(3, 3, 3)


def assemble_onsager4(
    tset: TransmissionSet,
    temperature: float,
    mu: float = 0.0,
    window: float = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOL,
    field: int = 1,
) -> OnsagerMatrix:
    """The 4x4 Onsager matrix of the three-terminal conductor.

    The entries L_21, L_23, L_41 and L_43 are filled with the computed values
    of L_12, L_14, L_32 and L_34.
    """
    M = transmission_moments(tset, temperature, mu, window=window, tol=tol)
    T = temperature  # with h = 1 the prefactor T/h is just T

    def s(n, *pairs):
        return T * sum(M[n, a, b] for a, b in pairs)

    L11 = s(0, (L, P), (L, R))
    L12 = s(1, (L, P), (L, R))
    L13 = -s(0, (L, P))
    L14 = -s(1, (L, P))
    L21 = L12
    L22 = s(2, (L, P), (L, R))
    L23 = L14
    L24 = -s(2, (L, P))
    L31 = -s(0, (P, L))
    L32 = -s(1, (P, L))
    L33 = s(0, (P, L), (P, R))
    L34 = s(1, (P, L), (P, R))
    L41 = L32
    L42 = -s(2, (P, L))
    L43 = L34
    L44 = s(2, (P, L), (P, R))
    values = [
        [L11, L12, L13, L14],
        [L21, L22, L23, L24],
        [L31, L32, L33, L34],
        [L41, L42, L43, L44],
    ]
    return OnsagerMatrix(FULL4, values, field=field)


def landauer_currents(
    tset: TransmissionSet,
    reservoirs: ReservoirState,
    window: float = DEFAULT_WINDOW,
    tol: float = 1e-12,
) -> CurrentVector:
    """Full (nonlinear) Landauer-Buttiker currents out of each reservoir.

    Used as an oracle for the linear-response pipeline.
    """
    temps = reservoirs.temperatures
    mus = reservoirs.potentials
    if np.any(temps <= 0):
        raise ValueError("reservoir temperatures must be positive")
    off = ~np.eye(3, dtype=bool)

    def integrand(e):
        t = np.where(off, np.asarray(tset(e), dtype=float).reshape(3, 3), 0.0)
        f = fermi(e, temps, mus)
        n = (t * (f[:, None] - f[None, :])).sum(axis=1)
        return np.concatenate([n, e * n])

    lo = float(np.min(mus - window * temps))
    hi = float(np.max(mus + window * temps))
    v = _quad_vector(integrand, lo, hi, tol, points=tuple(mus))
    particle, energy = v[:3], v[3:]
    heat = energy - mus * particle
    return CurrentVector(particle=particle, heat=heat, energy=energy)


def linear_currents(
    matrix: OnsagerMatrix,
    forces: ForceVector,
    temperature: float,
    mu: float = 0.0,
) -> CurrentVector:
    """Currents predicted by a FULL4 or VPROBE3 matrix, completed to all terminals.

    For VPROBE3 the probe carries no particle current and its voltage is the
    eliminated force stored on the matrix.
    """
    T = temperature
    if matrix.kind == FULL4:
        j_ln, j_lq, j_pn, j_pq = matrix.currents(forces)
        x_pv = forces.x_pv
    elif matrix.kind == VPROBE3:
        j_ln, j_lq, j_pq = matrix.currents(forces)
        j_pn = 0.0
        x3 = forces.as_array(VPROBE3)
        x_pv = float(matrix.eliminated @ x3) if matrix.eliminated is not None else forces.x_pv
    else:
        raise ValueError("linear_currents needs a FULL4 or VPROBE3 matrix")
    potentials = (mu + T * forces.x_lv, mu + T * x_pv, mu)
    return CurrentVector.from_terminal_fluxes(j_ln, j_lq, j_pn, j_pq, potentials)


# --------------------------------------------------------------------------
# Probe eliminations
# --------------------------------------------------------------------------


def _pivot_ok(pivot, values):
    scale = float(np.max(np.abs(values)))
    return pivot != 0 and math.isfinite(pivot) and abs(pivot) > 1e-14 * scale


def reduce_voltage_probe(L4: OnsagerMatrix) -> OnsagerMatrix:
    """Eliminate X_P^V by imposing J_P^N = 0 (voltage probe)."""
    if L4.kind != FULL4:
        raise ValueError("reduce_voltage_probe needs a FULL4 matrix")
    m = L4.at
    L33 = m(3, 3)
    if not _pivot_ok(L33, L4.values):
        raise SingularEliminationError("L_33 vanishes: probe decoupled from the conductor")
    values = [
        [
            (L33 * m(1, 1) - m(1, 3) * m(3, 1)) / L33,
            (L33 * m(1, 2) - m(1, 3) * m(3, 2)) / L33,
            (m(1, 4) * L33 - m(1, 3) * m(3, 4)) / L33,
        ],
        [
            (m(2, 1) * L33 - m(2, 3) * m(3, 1)) / L33,
            (L33 * m(2, 2) - m(2, 3) * m(3, 2)) / L33,
            (m(2, 4) * L33 - m(2, 3) * m(3, 4)) / L33,
        ],
        [
            (m(4, 1) * L33 - m(4, 3) * m(3, 1)) / L33,
            (m(4, 2) * L33 - m(4, 3) * m(3, 2)) / L33,
            (m(4, 4) * L33 - m(4, 3) * m(3, 4)) / L33,
        ],
    ]
    # X_P^V = -(L31 X_L^V + L32 X_L^T + L34 X_P^T) / L33
    eliminated = -np.array([m(3, 1), m(3, 2), m(3, 4)]) / L33
    return OnsagerMatrix(VPROBE3, values, field=L4.field, eliminated=eliminated)


def reduce_buttiker(L3: OnsagerMatrix) -> OnsagerMatrix:
    """Eliminate X_P^T by imposing J_P^Q = 0 on a voltage-probe matrix."""
    if L3.kind != VPROBE3:
        raise ValueError("reduce_buttiker needs a VPROBE3 matrix")
    m = L3.at
    L33 = m(3, 3)
    if not _pivot_ok(L33, L3.values):
        raise SingularEliminationError("L'_33 vanishes: probe carries no heat")
    values = [
        [
            (m(1, 1) * L33 - m(1, 3) * m(3, 1)) / L33,
            (m(1, 2) * L33 - m(1, 3) * m(3, 2)) / L33,
        ],
        [
            (m(2, 1) * L33 - m(2, 3) * m(3, 1)) / L33,
            (m(2, 2) * L33 - m(2, 3) * m(3, 2)) / L33,
        ],
    ]
    eliminated = -np.array([m(3, 1), m(3, 2)]) / L33
    return OnsagerMatrix(BUTTIKER2, values, field=L3.field, eliminated=eliminated)


# --------------------------------------------------------------------------
# Bounds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Residuals of the three Onsager-bound inequalities (each must be >= 0)."""

    l11: float
    l12: float
    l21: float
    l22: float
    residuals: tuple[float, float, float]
    tol: float = -1e-9
    passed: tuple[bool, bool, bool] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "passed", tuple(bool(r >= self.tol) for r in self.residuals))

    @property
    def ok(self) -> bool:
        return all(self.passed)


def _bound_report(l11, l12, l21, l22, tol):
    mixed = l11 * l22 + l12 * l21 - (l12**2 - l21**2)
    return BoundReport(l11, l12, l21, l22, (l11, l22, mixed), tol=tol)


def effective_matrix(L3: OnsagerMatrix, xi: float) -> np.ndarray:
    """2x2 matrix for forces (X_L^V, X_L^T) at fixed ratio X_P^T = xi X_L^T."""
    if L3.kind != VPROBE3:
        raise ValueError("effective_matrix needs a VPROBE3 matrix")
    if not math.isfinite(xi):
        raise ValueError("xi must be finite")
    m = L3.at
    return np.array(
        [
            [m(1, 1), m(1, 2) + m(1, 3) * xi],
            [m(2, 1) + m(3, 1) * xi, m(2, 2) + m(3, 3) * xi**2 + (m(2, 3) + m(3, 2)) * xi],
        ]
    )


def check_bounds(L3: OnsagerMatrix, xi: float, tol: float = -1e-9) -> BoundReport:
    """Onsager-bound residuals of a voltage-probe matrix at force ratio xi."""
    if not math.isfinite(xi) or not np.all(np.isfinite(L3.values)):
        raise ValueError("check_bounds needs finite inputs")
    (l11, l12), (l21, l22) = effective_matrix(L3, xi)
    return _bound_report(l11, l12, l21, l22, tol)


def check_bounds_buttiker(L2: OnsagerMatrix, tol: float = -1e-9) -> BoundReport:
    """The same three residuals on a Buttiker-probe matrix."""
    if L2.kind != BUTTIKER2:
        raise ValueError("check_bounds_buttiker needs a BUTTIKER2 matrix")
    if not np.all(np.isfinite(L2.values)):
        raise ValueError("check_bounds_buttiker needs finite inputs")
    (l11, l12), (l21, l22) = L2.values
    return _bound_report(l11, l12, l21, l22, tol)
