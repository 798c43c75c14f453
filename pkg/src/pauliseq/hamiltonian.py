"""Ising chain for end-to-end state transfer, and its exact time evolution.

The chain Hamiltonian is written with NMR product operators (``I = sigma/2``)::

    H = sum_j J_j (2 I_jz I_(j+1)z) + sum_j B_j I_jx
      = sum_j (J_j / 2) Z_j Z_(j+1) + sum_j (B_j / 2) X_j

with ``J_j = 2J sqrt(4j(n-j))``, ``B_j = 2J sqrt((2j-1)(2n-2j+1))`` and the
transfer time ``t0 = pi / 4J``.  The two-spin term carries the same factor 2
as every two-spin element of the product-operator basis; with that reading
the n = 3 evolution expands into exactly eight terms of magnitude
``1/(2 sqrt 2)``.  Coupling errors add ``delta_j`` to ``J_j``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .exceptions import DimensionError, InvalidInputError, NumericalError
from .pauli import PauliString, to_matrix
from .validation import check_qubits


def ideal_bond(n, j, J=1.0):
    """``J_j`` for 1-based bond ``j``."""
    return 2.0 * J * math.sqrt(4 * j * (n - j))


def ideal_field(n, j, J=1.0):
    """``B_j`` for 1-based site ``j``."""
    return 2.0 * J * math.sqrt((2 * j - 1) * (2 * n - 2 * j + 1))


@dataclass(frozen=True)
class ChainSpec:
    n: int
    J: float = 1.0
    bond_couplings: tuple = ()
    site_fields: tuple = ()
    bond_perturbations: tuple = ()
    ideal: bool = False

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidInputError(f"chain length must be a positive integer, got {self.n!r}")
        if not math.isfinite(self.J) or self.J <= 0:
            raise InvalidInputError(f"base coupling J must be positive, got {self.J}")
        perturb = tuple(self.bond_perturbations) or (0.0,) * (self.n - 1)
        object.__setattr__(self, "bond_couplings", tuple(float(v) for v in self.bond_couplings))
        object.__setattr__(self, "site_fields", tuple(float(v) for v in self.site_fields))
        object.__setattr__(self, "bond_perturbations", tuple(float(v) for v in perturb))
        if len(self.bond_couplings) != self.n - 1 or len(self.bond_perturbations) != self.n - 1:
            raise DimensionError(f"a {self.n}-site chain needs {self.n - 1} bond values")
        if len(self.site_fields) != self.n:
            raise DimensionError(f"a {self.n}-site chain needs {self.n} site fields")
        values = self.bond_couplings + self.site_fields + self.bond_perturbations
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError("couplings and fields must be finite")

    @classmethod
    def ideal_chain(cls, n, J=1.0, perturbation=0.0):
        """Transfer chain with the closed-form couplings.

        ``perturbation`` is either one value added to every bond (the equal
        ``delta J_1 = delta J_2 = ...`` case) or a per-bond sequence.
        """
        if n < 2:
            raise InvalidInputError(f"a transfer chain needs n >= 2, got {n}")
        if np.ndim(perturbation) == 0:
            perturbation = (float(perturbation),) * (n - 1)
        return cls(
            n,
            J,
            tuple(ideal_bond(n, j, J) for j in range(1, n)),
            tuple(ideal_field(n, j, J) for j in range(1, n + 1)),
            tuple(perturbation),
            ideal=True,
        )

    def with_uniform_perturbation(self, delta):
        return ChainSpec(self.n, self.J, self.bond_couplings, self.site_fields,
                         (float(delta),) * (self.n - 1), self.ideal)

    @property
    def effective_bonds(self):
        return tuple(c + d for c, d in zip(self.bond_couplings, self.bond_perturbations))

    @property
    def transfer_time(self):
        return math.pi / (4.0 * self.J)

    def to_dict(self):
        out = {"n": self.n, "J": self.J, "ideal": self.ideal,
               "bond_perturbations": list(self.bond_perturbations)}
        if not self.ideal:
            out["overrides"] = {"bond_couplings": list(self.bond_couplings),
                                "site_fields": list(self.site_fields)}
        return out

    @classmethod
    def from_dict(cls, data):
        """Read ``{n, J, ideal, bond_perturbations, overrides}``.

        Overrides replace the closed-form values; a spec with ``ideal`` false
        must supply both lists.
        """
        try:
            n = int(data["n"])
            J = float(data.get("J", 1.0))
            ideal = bool(data.get("ideal", True))
            perturb = data.get("bond_perturbations") or 0.0
            overrides = data.get("overrides") or {}
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed chain spec: {exc}") from exc
        if ideal:
            base = cls.ideal_chain(n, J, perturb)
            bonds = overrides.get("bond_couplings", base.bond_couplings)
            fields = overrides.get("site_fields", base.site_fields)
            untouched = not overrides
            return cls(n, J, bonds, fields, base.bond_perturbations, ideal=untouched)
        if "bond_couplings" not in overrides or "site_fields" not in overrides:
            raise InvalidInputError("non-ideal chain spec needs overrides.bond_couplings and site_fields")
        if np.ndim(perturb) == 0:
            perturb = (float(perturb),) * (n - 1)
        return cls(n, J, overrides["bond_couplings"], overrides["site_fields"], perturb)


@dataclass(frozen=True)
class EvolutionRequest:
    spec: ChainSpec
    time: float | None = field(default=None)

    def __post_init__(self):
        if self.time is not None and (not math.isfinite(self.time) or self.time < 0):
            raise InvalidInputError(f"evolution time must be >= 0, got {self.time}")

    @property
    def duration(self):
        return self.spec.transfer_time if self.time is None else self.time


def build_hamiltonian(spec):
    n = check_qubits(spec.n)
    dim = 1 << n
    H = np.zeros((dim, dim), dtype=complex)
    for j, coupling in enumerate(spec.effective_bonds):
        zz = PauliString.single(n, j, "Z") * PauliString.single(n, j + 1, "Z")
        H += 0.5 * coupling * to_matrix(zz)
    for j, b in enumerate(spec.site_fields):
        H += 0.5 * b * to_matrix(PauliString.single(n, j, "X"))
    return H


def evolve(req, time=None):
    """``exp(-i H t)`` by Hermitian eigendecomposition.

    Accepts an :class:`EvolutionRequest`, or a :class:`ChainSpec` plus an
    optional ``time`` (default ``t0``).
    """
    if isinstance(req, ChainSpec):
        req = EvolutionRequest(req, time)
    H = build_hamiltonian(req.spec)
    return hermitian_exp(H, req.duration)


def hermitian_exp(H, t):
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise NumericalError("Hamiltonian is not Hermitian")
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return (V * np.exp(-1j * w * t)) @ V.conj().T
