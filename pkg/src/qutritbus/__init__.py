"""Simulation toolkit for a qutrit bus shuttling between a sender and two recipients.

Two engines share one API surface: a stabilizer tableau for Clifford
circuits and a dense hybrid (bus site x qubit register) state vector.
"""

from .errors import (
    CapacityError,
    ConfigError,
    ContradictionError,
    DegenerateBasisError,
    InvalidOperatorError,
    InvalidSizeError,
    NonUnitaryError,
    ProtocolError,
    QubitIndexError,
    QutritBusError,
)
from .mrap import PulseSchedule, Trajectory, adiabaticity_report, dark_states_at, evolve, propagator, pulse_values
from .pauli import PauliString
from .qtp import (
    MeasurementOutcome,
    OperatorKind,
    measure_operator,
    measure_operator_dynamical,
    measure_until_known,
    stage_three,
    u_qtp,
)
from .stabilizer import (
    StabilizerTableau,
    apply_clifford,
    canonical_form,
    groups_equal,
    measure_pauli,
    tableau_from_zero_state,
)
from .statevector import BusSite, HybridState, bus_purity, init_state, project_pauli_oracle, reduced_bus_density
from .synthesis import (
    Schedule,
    cluster_generators,
    cz_via_measurements,
    execute_schedule,
    linear_cluster_schedule,
    verify_cluster,
)

__version__ = "0.1.0"
