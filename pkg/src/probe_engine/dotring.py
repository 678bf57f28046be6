"""Triple quantum dot ring threaded by a magnetic flux.

Each dot couples to one reservoir (dot 1 to L, dot 2 to P, dot 3 to R) in the
wide-band limit. The flux enters through a Peierls phase phi/3 on every
directed bond 1->2, 2->3, 3->1, so the loop accumulates phi.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalFailure
from .kernel import TransmissionSet

MAX_CONDITION = 1e14


@dataclass(frozen=True)
class DotRingModel:
    """Parameters of the ring, energies in units of k_B T.

    ``site_energies`` are measured from the reference chemical potential.
    """

    site_energies: tuple[float, float, float] = (1.0, 1.0, 1.0)
    couplings: tuple[float, float, float] = (0.5, 0.5, 0.5)
    hopping: float = 1.0
    phi: float = 0.0
    field: int = 1
    temperature: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "site_energies", tuple(float(e) for e in self.site_energies))
        object.__setattr__(self, "couplings", tuple(float(g) for g in self.couplings))
        if len(self.site_energies) != 3 or len(self.couplings) != 3:
            raise ValueError("the ring has exactly three sites")
        if not all(g > 0 for g in self.couplings):
            raise ValueError("lead couplings must be positive")
        if self.field not in (1, -1):
            raise ValueError("field must be +1 or -1")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    @property
    def phase(self) -> float:
        """Loop phase seen by the electrons, sign-flipped at -B."""
        return self.field * self.phi

    def reversed(self) -> "DotRingModel":
        return replace(self, field=-self.field)

    def with_phi(self, phi: float) -> "DotRingModel":
        return replace(self, phi=float(phi))

    def hamiltonian(self) -> np.ndarray:
        t = self.hopping * np.exp(1j * self.phase / 3.0)
        h = np.diag(np.asarray(self.site_energies, dtype=complex))
        # H[j, i] is the amplitude for hopping i -> j
        for i, j in ((0, 1), (1, 2), (2, 0)):
            h[j, i] = t
            h[i, j] = np.conj(t)
        return h

    def broadening(self) -> np.ndarray:
        return np.diag(np.asarray(self.couplings, dtype=float))


def paper_model() -> DotRingModel:
    """Canonical toy-model parameters: E - mu = 1, gamma = 0.5, t' = 1, k_B T = 1."""
    return DotRingModel(
        site_energies=(1.0, 1.0, 1.0),
        couplings=(0.5, 0.5, 0.5),
        hopping=1.0,
        phi=0.0,
        field=1,
        temperature=1.0,
        mu=0.0,
    )


def retarded_green(model: DotRingModel, energy) -> np.ndarray:
    """G(E) = [E - H + i Gamma / 2]^-1, batched over the shape of ``energy``."""
    e = np.asarray(energy, dtype=float)
    a = (
        e[..., None, None] * np.eye(3)
        - model.hamiltonian()
        + 0.5j * model.broadening()
    )
    g = np.linalg.inv(a)
    cond = np.linalg.norm(a, 1, axis=(-2, -1)) * np.linalg.norm(g, 1, axis=(-2, -1))
    if np.any(~np.isfinite(cond)) or np.any(cond > MAX_CONDITION):
        raise NumericalFailure(f"ill-conditioned Green function (condition {np.max(cond):.3g})")
    return g


def transmission(model: DotRingModel, energy) -> np.ndarray:
    """All ordered-pair transmissions T[a, b] = Tr[Gamma_a G Gamma_b G^+].

    With single-site couplings this is gamma_a gamma_b |G_ab|^2. The diagonal
    is set to zero. Shape ``energy.shape + (3, 3)``.
    """
    g = retarded_green(model, energy)
    gam = np.asarray(model.couplings)
    t = gam[:, None] * gam[None, :] * np.abs(g) ** 2
    return t * (1.0 - np.eye(3))


def transmission_trace(model: DotRingModel, energy: float) -> np.ndarray:
    """Reference evaluation with the full trace formula, one energy at a time."""
    g = retarded_green(model, energy)
    out = np.zeros((3, 3))
    for a in range(3):
        ga = np.zeros((3, 3))
        ga[a, a] = model.couplings[a]
        for b in range(3):
            if a == b:
                continue
            gb = np.zeros((3, 3))
            gb[b, b] = model.couplings[b]
            out[a, b] = np.trace(ga @ g @ gb @ g.conj().T).real
    return out


def transmission_set(model: DotRingModel) -> TransmissionSet:
    """Transmission functions of ``model`` with its field-reversed companion."""
    rev = model.reversed()
    return TransmissionSet(
        forward=lambda e: transmission(model, e),
        backward=lambda e: transmission(rev, e),
        channels=1.0,
    )
