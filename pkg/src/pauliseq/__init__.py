"""Pauli-exponential synthesis of spin-chain state-transfer unitaries."""

from .decomposer import (
    Decomposition,
    PauliDecomposer,
    ReductionTrace,
    TraceStep,
    apply_factor,
    decompose,
    reduce_stage,
    solve_angle,
    verify,
)
from .exceptions import (
    DenseLimitError,
    DimensionError,
    InvalidInputError,
    NoLeverageError,
    NoRealAngleError,
    NumericalError,
    PauliseqError,
    ResidualError,
    StagnationError,
)
from .expansion import (
    OperatorExpansion,
    SupportGroup,
    coset,
    expand,
    group_norm_partition,
    index2_subgroups,
    norm_in,
    support_closure,
)
from .gates import GatePrimitive, GateProgram, lower, lower_factor
from .hamiltonian import ChainSpec, EvolutionRequest, build_hamiltonian, evolve
from .pauli import (
    QUBIT_ORDER,
    PauliString,
    commutes,
    enumerate_basis,
    exponential_factor,
    format_label,
    multiply,
    parse_label,
    to_matrix,
)
from .qst import (
    ProtocolRun,
    TransferReport,
    emulate_readout,
    readout_signal,
    robustness_sweep,
    run_protocol,
)
from .sequences import QstSequence, factor_count, generate
from .serialization import tool_version

__version__ = tool_version()

__all__ = [name for name in dir() if not name.startswith("_")]
