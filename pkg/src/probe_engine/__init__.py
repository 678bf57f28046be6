"""Linear-response thermoelectrics of three-terminal probe heat engines.

The package is layered: ``kernel`` builds Onsager matrices from
transmission functions and reduces them for voltage and Buttiker probes,
``dotring`` supplies transmissions of a triple-dot ring, ``coefficients``
turns reduced matrices into Seebeck, conductance and merit parameters, and
``performance`` evaluates power, efficiency and their bounds. The
``harness`` subpackage drives sweeps and figure datasets from the command
line.
"""

from .coefficients import (
    ButtikerCoefficients,
    MeritSet,
    TransportCoefficients,
    buttiker_coefficients,
    buttiker_merit_set,
    characteristic_parameter,
    merit_set,
    transport_coefficients,
)
from .dotring import DotRingModel, paper_model, transmission, transmission_set
from .errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    NumericalFailure,
    OnsagerCasimirError,
    ProbeEngineError,
    QuadratureError,
    RegimeError,
    SingularEliminationError,
    SingularMeritError,
)
from .kernel import (
    CurrentVector,
    ForceVector,
    OnsagerMatrix,
    ReservoirState,
    TransmissionSet,
    assemble_onsager4,
    check_bounds,
    check_bounds_buttiker,
    fermi_derivative_moment,
    landauer_currents,
    linear_currents,
    reduce_buttiker,
    reduce_voltage_probe,
)
from .labels import Branch, Regime
from .performance import (
    bound_functions,
    classify_regime,
    efficiency_at_max_power,
    efficiency_at_max_power_buttiker,
    efficiency_at_power_gain,
    efficiency_bound,
    load_ratio,
    max_power,
    normalized_efficiency,
    normalized_efficiency_buttiker,
    performance_point,
    power_ratio,
)
from .pipeline import analyse_point, onsager_chain

__version__ = "0.1.0"
