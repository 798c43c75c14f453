"""Greedy norm-extinguishing decomposition of a unitary into Pauli exponentials.

The working operator ``U`` is expanded in the Pauli basis and right-multiplied
by ``exp(+i theta P / 2)`` factors.  Each stage picks the index-2 subgroup ``H``
of the current support group ``G`` that already holds the most norm, then
drives the norm on the coset ``G - H`` to zero with pivots taken from that
coset.  A pivot ``P`` pairs every coefficient ``C_R`` with ``C_{R P}``, so one
angle rotates all pairs at once:

    C'_R = cos(theta/2) C_R + i sin(theta/2) w(RP, P) C_{RP}

where ``(RP) P = w(RP, P) R``.  When only the identity survives, ``U`` times
the accumulated factors is a phase, and reversing the factor list gives
``U = phase * prod_k exp(-i theta_k P_k / 2)``.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    DimensionError,
    InvalidInputError,
    NoLeverageError,
    NoRealAngleError,
    ResidualError,
    StagnationError,
)
from .expansion import (
    DEFAULT_TOLERANCE,
    OperatorExpansion,
    SupportGroup,
    index2_subgroups,
    pauli_coefficients,
    support_closure,
)
from .pauli import exponential_factor, from_key, parse_label, product_phase
from .validation import check_operator, check_unitary

RESIDUAL_TOLERANCE = 1e-8
MAX_STAGE_STEPS = 500
SLOW_STEPS = 4
SLOW_RATIO = 0.5


@dataclass(frozen=True)
class Decomposition:
    """``U = global_phase * prod_k exp(-i angle_k P_k / 2)``, leftmost factor first."""

    n: int
    factors: tuple = ()
    global_phase: complex = 1.0 + 0j
    residual: float = 0.0

    def __post_init__(self):
        fs = tuple((p, float(a)) for p, a in self.factors)
        for p, _ in fs:
            if p.n != self.n or not p.is_canonical:
                raise InvalidInputError(f"factor {p!r} is not a canonical {self.n}-qubit string")
        object.__setattr__(self, "factors", fs)
        object.__setattr__(self, "global_phase", complex(self.global_phase))

    def __len__(self):
        return len(self.factors)

    def to_matrix(self, include_phase=True):
        out = np.eye(1 << self.n, dtype=complex)
        for p, theta in self.factors:
            out = out @ exponential_factor(p, theta)
        return self.global_phase * out if include_phase else out

    def to_dict(self, style="product"):
        return {
            "n": self.n,
            "global_phase": {"re": self.global_phase.real, "im": self.global_phase.imag},
            "residual": self.residual,
            "factors": [{"label": p.to_label(style), "angle_rad": a} for p, a in self.factors],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data["n"])
            gp = data.get("global_phase", {"re": 1.0, "im": 0.0})
            factors = [(parse_label(f["label"], n), float(f["angle_rad"])) for f in data["factors"]]
            return cls(n, factors, complex(gp["re"], gp["im"]), float(data.get("residual", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed decomposition record: {exc}") from exc

    def to_json(self, style="product"):
        return json.dumps(self.to_dict(style))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class TraceStep:
    stage: int
    functional: int
    subgroup: tuple
    kind: str
    pivot: str | None
    target: str | None
    angle: float
    coset_norm: float
    total_norm: float


@dataclass
class ReductionTrace:
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def stage(self, k):
        return [s for s in self.steps if s.stage == k]

    def to_jsonl(self):
        return "".join(json.dumps(s.__dict__) + "\n" for s in self.steps)


class _Table:
    """Full-precision coefficients over the members of one group.

    ``keys`` must be closed under XOR with every pivot that gets applied.
    """

    def __init__(self, n, keys, values=None):
        self.n = n
        self.keys = list(keys)
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.v = np.zeros(len(self.keys), dtype=complex) if values is None else np.array(values)
        self._maps = {}

    @classmethod
    def from_expansion(cls, e, keys):
        t = cls(e.n, keys)
        for p, c in e.coeffs.items():
            t.v[t.index[p.key]] = c
        return t

    def copy(self, values=None):
        t = _Table.__new__(_Table)
        t.n, t.keys, t.index, t._maps = self.n, self.keys, self.index, self._maps
        t.v = self.v.copy() if values is None else np.array(values)
        return t

    def positions(self, keys):
        return np.array([self.index[k] for k in keys], dtype=int)

    def pivot_map(self, pk):
        """``(perm, mult)``: ``C'_R = cos C_R + sin mult_R C_perm(R)``."""
        if pk not in self._maps:
            pivot = from_key(self.n, pk)
            perm = np.empty(len(self.keys), dtype=int)
            mult = np.empty(len(self.keys), dtype=complex)
            for i, k in enumerate(self.keys):
                q = from_key(self.n, k ^ pk)
                perm[i] = self.index[q.key]
                mult[i] = 1j * 1j ** product_phase(q, pivot)
            self._maps[pk] = (perm, mult)
        return self._maps[pk]

    def partner_terms(self, pk, pos):
        perm, mult = self.pivot_map(pk)
        return self.v[pos], (mult * self.v[perm])[pos]

    def apply(self, pk, theta):
        """Right-multiply by ``exp(+i theta P / 2)``."""
        perm, mult = self.pivot_map(pk)
        self.v = math.cos(theta / 2) * self.v + math.sin(theta / 2) * mult * self.v[perm]

    def norm(self, pos=None):
        v = self.v if pos is None else self.v[pos]
        return float(np.vdot(v, v).real)

    def get(self, key):
        i = self.index.get(key)
        return 0j if i is None else complex(self.v[i])

    def support(self, tol):
        return [from_key(self.n, k) for k, c in zip(self.keys, self.v) if abs(c) >= tol]

    def restricted(self, keys):
        t = _Table(self.n, keys)
        for i, k in enumerate(keys):
            t.v[i] = self.get(k)
        return t

    def to_expansion(self, tol):
        return OperatorExpansion(self.n, {from_key(self.n, k): c for k, c in zip(self.keys, self.v)}, tol)


def _as_string(label, n):
    return parse_label(label, n) if isinstance(label, str) else label.canonical()


def _angle_zeroing(a, b, tol):
    """Angle with ``cos(t/2) a + sin(t/2) b == 0``, or None if it is not real."""
    if abs(a) < tol:
        return 0.0
    if abs(b) < tol:
        return math.pi
    ratio = -a / b
    if abs(ratio.imag) > 1e-8 * max(1.0, abs(ratio)):
        return None
    return 2.0 * math.atan(ratio.real)


def _table_for(e, extra=()):
    group = SupportGroup.span(e.n, list(e.support) + list(extra))
    return _Table.from_expansion(e, [p.key for p in group.members])


def solve_angle(e, target, pivot, tolerance=None):
    """Angle ``theta`` for which ``U exp(i theta pivot/2)`` has no ``target`` term.

    Raises
    ------
    NoLeverageError
        Both coefficients of the ``(target, target*pivot)`` pair vanish.
    NoRealAngleError
        The pair's relative phase admits no real solution.
    """
    tol = e.tolerance if tolerance is None else tolerance
    target, pivot = _as_string(target, e.n), _as_string(pivot, e.n)
    table = _table_for(e, [target, pivot])
    a, b = table.partner_terms(pivot.key, table.positions([target.key]))
    a, b = complex(a[0]), complex(b[0])
    if abs(a) < tol and abs(b) < tol:
        raise NoLeverageError(f"pivot {pivot} has no leverage on {target}")
    theta = _angle_zeroing(a, b, tol)
    if theta is None:
        raise NoRealAngleError(f"no real angle extinguishes {target} with pivot {pivot}")
    assert abs(math.cos(theta / 2) * a + math.sin(theta / 2) * b) < max(tol, 1e-12)
    return theta


def apply_factor(e, pivot, theta):
    """Expansion of ``U exp(+i theta pivot / 2)``."""
    pivot = _as_string(pivot, e.n)
    table = _table_for(e, [pivot])
    table.apply(pivot.key, theta)
    return table.to_expansion(e.tolerance)


def _best_step(table, coset_pos, tol):
    """Pick the pivot/angle that removes the most coset norm.

    Candidate angles for a pivot are those that zero one coset coefficient,
    plus the closed-form minimiser of the coset norm.  The resulting norms are
    summed term by term: the closed form cancels catastrophically once the
    coset norm is far below the partner norm.  Target-zeroing candidates win
    ties; remaining ties go to basis order.
    """
    ref = max(table.norm(coset_pos), np.finfo(float).tiny)
    best = None
    for pi in coset_pos:
        pk = table.keys[pi]
        a, b = table.partner_terms(pk, coset_pos)
        C = float(np.vdot(a, b).real)
        half_diff = (float(np.vdot(a, a).real) - float(np.vdot(b, b).real)) / 2
        thetas, targets = [], []
        for ti, ai, bi in zip(coset_pos, a, b):
            if abs(ai) < tol:
                continue
            theta = _angle_zeroing(ai, bi, tol)
            if theta is not None:
                thetas.append(theta)
                targets.append(table.keys[ti])
        thetas.append(math.atan2(-C, -half_diff))
        targets.append(None)
        t = np.array(thetas) / 2
        rotated = np.cos(t)[:, None] * a[None, :] + np.sin(t)[:, None] * b[None, :]
        after = np.sum(rotated.real ** 2 + rotated.imag ** 2, axis=1)
        for norm_after, tk, theta in zip(after, targets, thetas):
            key = (round(float(norm_after) / ref, 12), tk is None)
            if best is None or key < best[0]:
                best = (key, float(norm_after), pk, tk, theta)
    return best


def reduce_stage(e, g=None, subgroup=None, stage=0, tolerance=None, max_steps=MAX_STAGE_STEPS):
    """Extinguish the coset of one index-2 subgroup of ``e``'s support group.

    Parameters
    ----------
    e : OperatorExpansion
    g : SupportGroup, optional
        Support closure of ``e``; computed when omitted.
    subgroup : SupportGroup, optional
        Index-2 subgroup to reduce into.  By default the subgroups are tried in
        order of captured norm, falling back to the next one on stagnation.

    Returns
    -------
    reduced : OperatorExpansion
        Support inside the chosen subgroup.
    factors : list of (PauliString, float)
        Right-multiplied ``exp(+i theta P / 2)`` factors, in application order.
    trace : ReductionTrace
    """
    tol = e.tolerance if tolerance is None else tolerance
    g = support_closure(e) if g is None else g
    table = _Table.from_expansion(e, [p.key for p in g.members])
    table, factors, trace = _stage(table, e, g, subgroup, stage, tol, max_steps)
    return table.to_expansion(tol), factors, trace


def _stage(table, e, g, subgroup, stage, tol, max_steps):
    if g.rank == 0:
        return table, [], ReductionTrace()
    choices = [subgroup] if subgroup is not None else [h for h, _ in index2_subgroups(g, e)]
    failures = ReductionTrace()
    for h in choices:
        try:
            return _reduce_into(table, h, stage, tol, max_steps)
        except StagnationError as exc:
            failures.steps.extend(exc.trace.steps)
    raise StagnationError(
        f"stage {stage}: no index-2 subgroup of a rank-{g.rank} group could be reached", failures
    )


def _refine(start, coset_pos, factors, tol):
    """Jointly re-fit the stage's angles with the pivots held fixed.

    Greedy single-angle steps converge only linearly once several pivots
    compete for the same coset terms; a Levenberg-Marquardt pass on the coset
    coefficients finishes the job quadratically.  Returns ``None`` when the
    fit does not bring the coset norm below tolerance.
    """
    pivots = [pk for pk, _ in factors]

    def replay(angles):
        t = start.copy()
        for pk, theta in zip(pivots, angles):
            t.apply(pk, theta)
        return t

    def residuals(angles):
        v = replay(angles).v[coset_pos]
        return np.concatenate([v.real, v.imag])

    x0 = np.array([t for _, t in factors])
    method = "lm" if len(x0) <= 2 * len(coset_pos) else "trf"
    fit = least_squares(residuals, x0, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    angles = [float(2 * np.angle(np.exp(0.5j * t))) for t in fit.x]
    table = replay(angles)
    if math.sqrt(table.norm(coset_pos)) >= tol:
        return None
    return list(zip(pivots, angles)), table


def _reduce_into(start, h, stage, tol, max_steps):
    inner = h.keys
    coset_pos = np.array([i for i, k in enumerate(start.keys) if k not in inner], dtype=int)
    table = start.copy()
    gens = tuple(p.to_label() for p in h.generators)
    n = start.n
    trace = ReductionTrace()
    factors = []
    slow = 0
    norm = table.norm(coset_pos)

    def record(kind, pivot, target, theta):
        trace.steps.append(TraceStep(
            stage, h.functional, gens, kind,
            None if pivot is None else from_key(n, pivot).to_label(),
            None if target is None else from_key(n, target).to_label(),
            theta, norm, table.norm(),
        ))

    while math.sqrt(norm) >= tol:
        step = _best_step(table, coset_pos, tol)
        stalled = step is None or norm - step[1] <= 1e-9 * norm or len(factors) >= max_steps
        if stalled or slow >= SLOW_STEPS:
            done = _refine(start, coset_pos, factors, tol) if factors else None
            if done is not None:
                factors, table = done
                norm = table.norm(coset_pos)
                record("refine", None, None, 0.0)
                break
            if stalled:
                raise StagnationError(
                    f"stage {stage}: coset norm stuck at {norm:.3e} after {len(factors)} steps", trace
                )
            slow = 0
        _, _, pk, target, theta = step
        table.apply(pk, theta)
        factors.append((pk, theta))
        previous, norm = norm, table.norm(coset_pos)
        slow = slow + 1 if norm > SLOW_RATIO * previous else 0
        record("greedy", pk, target, theta)
    reduced = table.restricted(sorted(inner))
    return reduced, [(from_key(n, pk), theta) for pk, theta in factors], trace


def _fidelity(V, U):
    return float(abs(np.vdot(V, U)) / U.shape[0])


def decompose(U, tolerance=DEFAULT_TOLERANCE, residual_tol=RESIDUAL_TOLERANCE,
              max_steps=MAX_STAGE_STEPS, return_trace=False):
    """Decompose ``U`` into ``global_phase * prod exp(-i theta_k P_k / 2)``.

    Raises
    ------
    StagnationError
        No subgroup choice at some stage could be reached.
    ResidualError
        The rebuilt product misses ``U`` by ``residual_tol`` or more.
    """
    U, n = check_unitary(U, strict=True)
    coeffs = pauli_coefficients(U)
    size = 1 << n
    table = _Table(n, range(size * size), coeffs.T.ravel())  # key = (z << n) | x
    trace = ReductionTrace()
    applied = []
    stage = 0
    while True:
        support = table.support(tolerance)
        if all(p.key == 0 for p in support):
            break
        g = SupportGroup.span(n, support)
        table = table.restricted([p.key for p in g.members])
        e = table.to_expansion(tolerance)
        g = SupportGroup.span(n, support, e)
        try:
            table, factors, stage_trace = _stage(table, e, g, None, stage, tolerance, max_steps)
        except StagnationError as exc:
            trace.steps.extend(exc.trace.steps)
            exc.trace = trace
            raise
        applied.extend(factors)
        trace.steps.extend(stage_trace.steps)
        stage += 1
    phase = table.get(0)
    phase = phase / abs(phase) if abs(phase) > 0 else 1.0 + 0j
    forward = [(p, theta) for p, theta in reversed(applied)]
    d = Decomposition(n, forward, phase)
    residual = float(np.max(np.abs(d.to_matrix() - U)))
    d = Decomposition(n, d.factors, d.global_phase, residual)
    if residual >= residual_tol:
        raise ResidualError(f"decomposition residual {residual:.3e} >= {residual_tol:.1e}")
    return (d, trace) if return_trace else d


class Verification(tuple):
    """``(fidelity, residual)`` pair returned by :func:`verify`."""

    __slots__ = ()

    def __new__(cls, fidelity, residual):
        return super().__new__(cls, (fidelity, residual))

    fidelity = property(lambda self: self[0])
    residual = property(lambda self: self[1])


def verify(d, U):
    """Phase-insensitive fidelity ``|Tr(V^H U)| / 2**n`` and max-norm residual."""
    U, n = check_operator(U)
    if n != d.n:
        raise DimensionError(f"decomposition has {d.n} qubits, target has {n}")
    V = d.to_matrix()
    return Verification(_fidelity(V, U), float(np.max(np.abs(V - U))))


class PauliDecomposer(BaseEstimator):
    """Estimator-style front end to :func:`decompose`.

    Parameters
    ----------
    tolerance : float
        Coefficients below this magnitude count as zero.
    residual_tol : float
        Max-norm gate on the rebuilt product.
    max_steps : int
        Step limit per reduction stage.

    Attributes
    ----------
    decomposition_ : Decomposition
    trace_ : ReductionTrace
    n_qubits_ : int
    n_factors_ : int
    fidelity_ : float
    """

    def __init__(self, tolerance=DEFAULT_TOLERANCE, residual_tol=RESIDUAL_TOLERANCE,
                 max_steps=MAX_STAGE_STEPS):
        self.tolerance = tolerance
        self.residual_tol = residual_tol
        self.max_steps = max_steps

    def fit(self, U, y=None):
        if self.tolerance <= 0 or self.residual_tol <= 0:
            raise InvalidInputError("tolerances must be positive")
        U, n = check_unitary(U)
        self.decomposition_, self.trace_ = decompose(
            U, self.tolerance, self.residual_tol, self.max_steps, return_trace=True
        )
        self.n_qubits_ = n
        self.n_factors_ = len(self.decomposition_)
        self.fidelity_ = verify(self.decomposition_, U).fidelity
        return self

    def reconstruct(self):
        check_is_fitted(self, "decomposition_")
        return self.decomposition_.to_matrix()

    def score(self, U, y=None):
        """Fidelity of the fitted product against ``U``."""
        check_is_fitted(self, "decomposition_")
        return verify(self.decomposition_, U).fidelity
