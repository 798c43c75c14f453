"""Lowering Pauli exponentials to single-site rotations and nearest-neighbour ZZ.

A factor ``exp(-i theta/2 P)`` with contiguous support is rewritten as
``C exp(+-i theta/2 Q) C^H`` where ``C`` is a product of quarter-turn
Clifford primitives and ``Q`` is a single ``Z`` or an adjacent ``ZZ``.  The
Clifford frame is tracked symbolically: conjugating by ``exp(-i pi/4 G)``
sends an anticommuting ``P`` to ``-i P G`` and leaves a commuting one alone.

The string is peeled from its right end.  The last site is rotated to ``Z``,
its left neighbour to ``X``, and a quarter-turn ``ZZ`` on the pair drops the
last site, so each peel costs at most three primitives and only touches
neighbours.
"""

from dataclasses import dataclass
import json
import math

import numpy as np

from .exceptions import InvalidInputError, ResidualError
from .pauli import PauliString, commutes, to_matrix
from .validation import check_qubits

CERTIFY_TOLERANCE = 1e-9
QUARTER = math.pi / 2
_AXES = ("x", "y", "z")
# single-site quarter turn that carries letter -> target letter
_TURN = {("X", "Z"): "y", ("Y", "Z"): "x", ("Z", "X"): "y", ("Y", "X"): "z"}


@dataclass(frozen=True)
class GatePrimitive:
    """``ROT``: ``exp(-i angle/2 sigma_axis)`` on ``sites[0]``.
    ``ZZ``: ``exp(-i angle/2 Z Z)`` on two adjacent sites.

    Sites are 0-based; ``provenance`` is the index of the source factor.
    """

    kind: str
    sites: tuple
    angle: float
    axis: str = "z"
    provenance: int = -1

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "angle", float(self.angle))
        if self.kind == "ROT":
            if len(sites) != 1 or self.axis not in _AXES:
                raise InvalidInputError(f"bad rotation {sites} axis={self.axis!r}")
        elif self.kind == "ZZ":
            if len(sites) != 2 or abs(sites[0] - sites[1]) != 1:
                raise InvalidInputError(f"ZZ needs two adjacent sites, got {sites}")
            object.__setattr__(self, "axis", "zz")
        else:
            raise InvalidInputError(f"unknown primitive kind {self.kind!r}")

    @classmethod
    def rotation(cls, site, axis, angle, provenance=-1):
        return cls("ROT", (site,), angle, axis, provenance)

    @classmethod
    def zz(cls, i, j, angle, provenance=-1):
        return cls("ZZ", (min(i, j), max(i, j)), angle, "zz", provenance)

    def generator(self, n):
        if self.kind == "ROT":
            return PauliString.single(n, self.sites[0], self.axis)
        return PauliString.single(n, self.sites[0], "Z") * PauliString.single(n, self.sites[1], "Z")

    def inverse(self):
        return GatePrimitive(self.kind, self.sites, -self.angle, self.axis, self.provenance)

    def cancels(self, other, atol=1e-12):
        return (self.kind, self.sites, self.axis) == (other.kind, other.sites, other.axis) and abs(
            self.angle + other.angle
        ) <= atol

    def to_text(self):
        if self.kind == "ROT":
            return f"ROT q={self.sites[0]} axis={self.axis} angle={self.angle!r}"
        return f"ZZ q={self.sites[0]},{self.sites[1]} angle={self.angle!r}"

    def to_dict(self):
        out = {"kind": self.kind, "sites": list(self.sites), "angle": self.angle}
        if self.kind == "ROT":
            out["axis"] = self.axis
        out["provenance"] = self.provenance
        return out


def _gate_matrix(g, n):
    theta = g.angle
    P = to_matrix(g.generator(n))
    return math.cos(theta / 2) * np.eye(1 << n) - 1j * math.sin(theta / 2) * P


def replay(gates, n):
    """Dense matrix of a time-ordered gate list."""
    out = np.eye(1 << check_qubits(n), dtype=complex)
    for g in gates:
        out = _gate_matrix(g, n) @ out
    return out


@dataclass(frozen=True)
class GateProgram:
    n: int
    gates: tuple = ()
    certified_residual: float = 0.0
    global_phase: complex = 1.0 + 0j

    def __len__(self):
        return len(self.gates)

    def to_matrix(self, include_phase=False):
        U = replay(self.gates, self.n)
        return self.global_phase * U if include_phase else U

    @property
    def uses_nearest_neighbour_only(self):
        return all(g.kind == "ROT" or g.sites[1] - g.sites[0] == 1 for g in self.gates)

    def to_text(self):
        head = f"# n={self.n} residual={self.certified_residual!r} gates={len(self.gates)}\n"
        return head + "".join(g.to_text() + "\n" for g in self.gates)

    def to_dict(self):
        return {
            "n": self.n,
            "certified_residual": self.certified_residual,
            "global_phase": {"re": self.global_phase.real, "im": self.global_phase.imag},
            "gates": [g.to_dict() for g in self.gates],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            gates = [
                GatePrimitive(g["kind"], g["sites"], g["angle"], g.get("axis", "z"), g.get("provenance", -1))
                for g in data["gates"]
            ]
            gp = data.get("global_phase", {"re": 1.0, "im": 0.0})
            return cls(int(data["n"]), tuple(gates), float(data.get("certified_residual", 0.0)),
                       complex(gp["re"], gp["im"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed gate program: {exc}") from exc

    def to_json(self):
        return json.dumps(self.to_dict())


def _conjugate(p, g):
    """``exp(+i pi/4 g) p exp(-i pi/4 g)`` for a Hermitian Pauli ``p``."""
    if commutes(p, g):
        return p
    q = p * g
    return PauliString(q.n, q.x, q.z, q.phase + 3)


def lower_factor(pauli, theta, provenance=-1):
    """Primitive gates, in time order, implementing ``exp(-i theta/2 pauli)``.

    The identity string yields no gates; its phase is the caller's business.

    Raises
    ------
    InvalidInputError
        Non-canonical string, or support that is not a contiguous run of sites.
    """
    if not pauli.is_canonical:
        raise InvalidInputError(f"factor string must be canonical, got {pauli}")
    sites = pauli.support()
    if not sites:
        return []
    if sites != list(range(sites[0], sites[-1] + 1)):
        raise InvalidInputError(f"support {[s + 1 for s in sites]} of {pauli.to_label()} is not contiguous")
    n = pauli.n
    frame = []  # quarter turns G_1..G_m with P = G_1..G_m Q G_m^H..G_1^H
    p = pauli

    def turn(g):
        nonlocal p
        frame.append(g)
        p = _conjugate(p, g.generator(n))

    def set_letter(site, target):
        letter = p.letter(site)
        if letter != target:
            turn(GatePrimitive.rotation(site, _TURN[(letter, target)], QUARTER, provenance))

    first = sites[0]
    last = sites[-1]
    while last - first >= 2:
        set_letter(last, "Z")
        set_letter(last - 1, "X")
        turn(GatePrimitive.zz(last - 1, last, QUARTER, provenance))
        last -= 1
    if last > first:
        set_letter(first, "Z")
        set_letter(last, "Z")
        sign = 1 if p.phase == 0 else -1
        core = GatePrimitive.zz(first, last, sign * theta, provenance)
    else:
        letter = p.letter(first)
        sign = 1 if p.phase == 0 else -1
        core = GatePrimitive.rotation(first, letter.lower(), sign * theta, provenance)
    assert p.phase in (0, 2) and p.weight == len(core.sites)
    return [g.inverse() for g in frame] + [core] + frame[::-1]


def _cancel(gates):
    out = []
    for g in gates:
        if out and out[-1].cancels(g):
            out.pop()
        else:
            out.append(g)
    return out


def lower(d, tolerance=CERTIFY_TOLERANCE):
    """Lower a :class:`Decomposition` into a certified :class:`GateProgram`.

    Factors are emitted in time order (rightmost factor first), adjacent exact
    inverses are cancelled, and the program is replayed densely against the
    decomposition's factor product.  Identity factors and the decomposition's
    own phase go into ``global_phase``.

    Raises
    ------
    ResidualError
        The replayed program misses the factor product by ``tolerance`` or more.
    """
    gates = []
    phase = complex(d.global_phase)
    for k in range(len(d.factors) - 1, -1, -1):
        p, theta = d.factors[k]
        if not p.support():
            phase *= complex(math.cos(theta / 2), -math.sin(theta / 2))
            continue
        gates.extend(lower_factor(p, theta, k))
    gates = _cancel(gates)
    target = d.to_matrix(include_phase=True)
    residual = float(np.max(np.abs(phase * replay(gates, d.n) - target))) if d.n else 0.0
    if residual >= tolerance:
        raise ResidualError(f"lowered program residual {residual:.3e} >= {tolerance:.1e}")
    return GateProgram(d.n, tuple(gates), residual, phase)


__all__ = [
    "CERTIFY_TOLERANCE",
    "GatePrimitive",
    "GateProgram",
    "lower",
    "lower_factor",
    "replay",
]
