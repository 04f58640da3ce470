"""Few-qubit statevector laboratory for a rotation-encrypted quantum secret
sharing protocol and the entangling participant attacks against it."""

from .analysis import (
    ScenarioReport,
    SweepGrid,
    counterfactual_joint_distance,
    helstrom_bound,
    indistinguishability,
    monte_carlo,
    sweep,
)
from .attack import (
    EntanglerSpec,
    EntanglingAdversary,
    GuessRule,
    build_entangler,
    qgwz_fixture,
    qgwz_spec,
    random_entangler_spec,
)
from .protocol import (
    AngleLedger,
    ConfigError,
    MissingAngleError,
    NullAdversary,
    ProtocolConfig,
    RunResult,
    Transcript,
    run_protocol,
)
from .quantum import (
    InvariantError,
    State,
    apply_controlled,
    apply_unitary,
    basis_state,
    canonical_angle,
    global_phase_equal,
    ket0,
    measure_projective,
    partial_trace,
    rotation_operator,
    tensor,
    trace_distance,
)

__all__ = [
    "AngleLedger",
    "ConfigError",
    "EntanglerSpec",
    "EntanglingAdversary",
    "GuessRule",
    "InvariantError",
    "MissingAngleError",
    "NullAdversary",
    "ProtocolConfig",
    "RunResult",
    "ScenarioReport",
    "State",
    "SweepGrid",
    "Transcript",
    "apply_controlled",
    "apply_unitary",
    "basis_state",
    "build_entangler",
    "canonical_angle",
    "counterfactual_joint_distance",
    "global_phase_equal",
    "helstrom_bound",
    "indistinguishability",
    "ket0",
    "measure_projective",
    "monte_carlo",
    "partial_trace",
    "qgwz_fixture",
    "qgwz_spec",
    "random_entangler_spec",
    "rotation_operator",
    "run_protocol",
    "sweep",
    "tensor",
    "trace_distance",
]

__version__ = "0.1.0"
