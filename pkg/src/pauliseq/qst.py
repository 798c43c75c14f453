"""State-transfer protocol simulation, ensemble readout emulation and coupling sweeps.

Protocol: prepare ``|psi_I>|psi_2 ... psi_(n-1)>|0>``, evolve with the chain
unitary, and condition on the Z outcome of qubit 1.  Outcome 0 leaves
``|psi_I>`` on the last qubit; outcome 1 leaves ``X|psi_I>``.  Both are
computed as exact conditional states; no shot noise is simulated.

Readout: the input is ``exp(-i phi X/2)|0>`` on qubit 1, which tips the Bloch
vector to ``(0, -sin phi, cos phi)``.  After evolution a CNOT from qubit 1 to
the last qubit undoes the ``X`` of the outcome-1 branch, so the last qubit
holds ``psi_I`` in both branches, and the emulated signal is its transverse
component along ``-y``, divided by its ideal value at ``phi = pi/2`` (which is
1).  For the ideal chain this is exactly ``sin phi``.

``phase_error`` is ours: the angle between the recovered last-qubit coherence
``rho_01`` and the prepared one.
"""

from dataclasses import dataclass, field
import csv
import io
import math

import numpy as np

from .exceptions import DimensionError, InvalidInputError
from .hamiltonian import ChainSpec, evolve
from .validation import check_operator, check_state

KET0 = np.array([1.0, 0.0], dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGNAL_REFERENCE = 1.0
COHERENCE_FLOOR = 1e-9


@dataclass(frozen=True)
class ProtocolRun:
    psi_I: np.ndarray
    U: np.ndarray
    mid_states: tuple = None
    n: int = None

    def __post_init__(self):
        U, n = check_operator(self.U)
        if self.n is not None and self.n != n:
            raise DimensionError(f"U acts on {n} qubits, run declares {self.n}")
        if n < 2:
            raise DimensionError("the protocol needs at least two qubits")
        mids = self.mid_states
        if mids is None:
            mids = (KET0,) * (n - 2)  # second qubit fixed to |0> unless overridden
        mids = tuple(check_state(m, 2) for m in mids)
        if len(mids) != n - 2:
            raise DimensionError(f"{n}-qubit chain needs {n - 2} mid states, got {len(mids)}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "psi_I", check_state(self.psi_I, 2))
        object.__setattr__(self, "mid_states", mids)

    def input_state(self):
        psi = self.psi_I
        for m in self.mid_states + (KET0,):
            psi = np.kron(psi, m)
        return psi


@dataclass(frozen=True)
class TransferReport:
    fidelity_branch0: float
    fidelity_branch1: float
    prob_branch0: float
    prob_branch1: float
    signal: float
    phase_error: float
    output_state: np.ndarray = field(repr=False, default=None)


def conditional_state(state, n, outcome):
    """Remaining ``n-1`` qubits after qubit 1 reads ``outcome``, and its probability."""
    branch = np.asarray(state).reshape(2, -1)[outcome]
    p = float(np.vdot(branch, branch).real)
    if p <= 0:
        return np.zeros_like(branch), 0.0
    return branch / math.sqrt(p), p


def last_qubit_density(state):
    """Reduced density matrix of the last qubit of a pure state."""
    m = np.asarray(state).reshape(-1, 2)
    return m.T @ m.conj()


def _overlap(rho, psi):
    return float(min(1.0, max(0.0, np.vdot(psi, rho @ psi).real)))


def _phase_error(rho, psi):
    ideal = psi[0] * np.conj(psi[1])
    if abs(ideal) < COHERENCE_FLOOR:
        return 0.0
    return float(abs(np.angle(rho[0, 1] / ideal)))


def cnot(n, control, target):
    """Permutation matrix for CNOT on 0-based qubits."""
    idx = np.arange(1 << n)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    flipped = np.where(idx & cbit, idx ^ tbit, idx)
    out = np.zeros((1 << n, 1 << n))
    out[flipped, idx] = 1.0
    return out


def _readout(state, n):
    after = cnot(n, 0, n - 1) @ state
    rho = last_qubit_density(after)
    signal = -np.trace(rho @ PAULI_Y).real / SIGNAL_REFERENCE
    return float(signal), rho


def run_protocol(run):
    psi = run.input_state()
    out = run.U @ psi
    rest0, p0 = conditional_state(out, run.n, 0)
    rest1, p1 = conditional_state(out, run.n, 1)
    flipped = PAULI_X @ run.psi_I
    rho0 = last_qubit_density(rest0)
    signal, rho_read = _readout(out, run.n)
    return TransferReport(
        fidelity_branch0=_overlap(rho0, run.psi_I) if p0 > 0 else 0.0,
        fidelity_branch1=_overlap(last_qubit_density(rest1), flipped) if p1 > 0 else 0.0,
        prob_branch0=p0,
        prob_branch1=p1,
        signal=signal,
        phase_error=_phase_error(rho_read, run.psi_I),
        output_state=out,
    )


def prepared_qubit(phi):
    """``exp(-i phi X / 2)|0>``."""
    return np.array([math.cos(phi / 2), -1j * math.sin(phi / 2)], dtype=complex)


def emulate_readout(state):
    """Normalized transverse signal on qubit 3 after CNOT(1,3).

    ``state`` is the 3-qubit state right after the transfer evolution.
    """
    state = np.asarray(state, dtype=complex).ravel()
    if state.shape[0] != 8:
        raise DimensionError(f"readout is defined for the 3-qubit chain, got length {state.shape[0]}")
    return _readout(check_state(state, 8), 3)[0]


def readout_signal(U, phi):
    """Signal for input angle ``phi`` through the 3-qubit unitary ``U``."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (8, 8):
        raise DimensionError(f"readout is defined for the 3-qubit chain, got {U.shape}")
    psi = np.kron(np.kron(prepared_qubit(phi), KET0), KET0)
    return emulate_readout(U @ psi)


@dataclass(frozen=True)
class SweepRow:
    delta_j: float
    phi: float
    signal: float
    phase_error: float
    branch0_fidelity: float


@dataclass(frozen=True)
class SweepSummary:
    delta_j: float
    peak_signal: float
    phase_error: float
    branch0_fidelity: float


@dataclass
class SweepTable:
    rows: list
    summary: list

    CSV_COLUMNS = ("delta_j", "phi", "signal", "phase_error", "branch0_fidelity")

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([format(getattr(r, c), ".17g") for c in self.CSV_COLUMNS])
        return buf.getvalue()

    def to_plot_data(self):
        """Series per coupling error, ready for an external plotting tool."""
        series = []
        for s in self.summary:
            pts = [r for r in self.rows if r.delta_j == s.delta_j]
            series.append({
                "delta_j": s.delta_j,
                "peak_signal": s.peak_signal,
                "phase_error": s.phase_error,
                "phi": [r.phi for r in pts],
                "signal": [r.signal for r in pts],
                "phase_error_curve": [r.phase_error for r in pts],
            })
        return {"x": "phi", "y": "signal", "series": series}


def robustness_sweep(base, deltas, phi_grid):
    """Readout curves of chains whose bonds are all shifted by each ``delta``.

    Per ``delta`` the summary holds the peak signal over ``phi_grid``, the
    largest phase error over it, and the worst outcome-0 fidelity.
    """
    if not isinstance(base, ChainSpec):
        raise InvalidInputError("base must be a ChainSpec")
    if base.n != 3:
        raise DimensionError("the readout sweep is defined for the 3-qubit chain")
    deltas = [float(d) for d in deltas]
    phi_grid = [float(p) for p in phi_grid]
    if not deltas or not phi_grid:
        raise InvalidInputError("deltas and phi_grid must be nonempty")
    if not all(math.isfinite(v) for v in deltas + phi_grid):
        raise InvalidInputError("deltas and phi_grid must be finite")
    rows, summary = [], []
    for delta in sorted(deltas, key=lambda d: (abs(d), d)):
        U = evolve(base.with_uniform_perturbation(delta))
        block = []
        for phi in phi_grid:
            rep = run_protocol(ProtocolRun(prepared_qubit(phi), U))
            block.append(SweepRow(delta, phi, rep.signal, rep.phase_error, rep.fidelity_branch0))
        rows.extend(block)
        summary.append(SweepSummary(
            delta,
            max(r.signal for r in block),
            max(r.phase_error for r in block),
            min(r.branch0_fidelity for r in block),
        ))
    return SweepTable(rows, summary)
