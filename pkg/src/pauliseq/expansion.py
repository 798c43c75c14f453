"""Pauli-basis expansion of operators and the GF(2) structure of its support.

Group machinery works on labels modulo phase: two strings that differ only by
a power of ``i`` are the same element, so a support group is a linear subspace
of GF(2)^(2n) and its index-2 subgroups are kernels of linear functionals.
Phases live only in the coefficients.
"""

from dataclasses import dataclass, field
from functools import cached_property
import json

import numpy as np

from .exceptions import InvalidInputError
from .pauli import PauliString, from_key, parse_label, to_matrix
from .validation import check_unitary

DEFAULT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class OperatorExpansion:
    """Sparse ``U = sum_k C_k P_k`` over canonical strings ``P_k``."""

    n: int
    coeffs: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        for p in self.coeffs:
            if p.n != self.n or not p.is_canonical:
                raise InvalidInputError(f"term {p!r} is not a canonical {self.n}-qubit string")
        clean = {
            p: complex(c)
            for p, c in sorted(self.coeffs.items(), key=lambda kv: kv[0].key)
            if abs(c) >= self.tolerance
        }
        object.__setattr__(self, "coeffs", clean)

    def __getitem__(self, label):
        return self.coeffs.get(self._as_string(label), 0j)

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs.items())

    def _as_string(self, label):
        if isinstance(label, PauliString):
            return label.canonical()
        return parse_label(label, self.n)

    @property
    def support(self):
        return list(self.coeffs)

    @property
    def total_norm(self):
        return sum(abs(c) ** 2 for c in self.coeffs.values())

    def to_matrix(self):
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=complex)
        for p, c in self.coeffs.items():
            out += c * to_matrix(p)
        return out

    def top(self, k=8):
        """The ``k`` largest terms by magnitude, ties in basis order."""
        ranked = sorted(self.coeffs.items(), key=lambda kv: (-round(abs(kv[1]), 12), kv[0].key))
        return ranked[:k]

    def to_dict(self, style="product"):
        return {
            "n": self.n,
            "tolerance": self.tolerance,
            "terms": [
                {"label": p.to_label(style), "re": c.real, "im": c.imag}
                for p, c in self.coeffs.items()
            ],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data["n"])
            tol = float(data.get("tolerance", DEFAULT_TOLERANCE))
            coeffs = {}
            for term in data["terms"]:
                p = parse_label(term["label"], n)
                coeffs[p] = coeffs.get(p, 0j) + complex(float(term["re"]), float(term["im"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed expansion record: {exc}") from exc
        return cls(n, coeffs, tol)

    def to_json(self, style="product"):
        return json.dumps(self.to_dict(style))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _walsh_hadamard(a):
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    a = np.array(a, dtype=complex)
    rows, dim = a.shape
    h = 1
    while h < dim:
        b = a.reshape(rows, dim // (2 * h), 2, h)
        a = np.concatenate([b[:, :, :1] + b[:, :, 1:], b[:, :, :1] - b[:, :, 1:]], axis=2)
        a = a.reshape(rows, dim)
        h *= 2
    return a


def pauli_coefficients(U):
    """All ``4**n`` coefficients ``Tr(P^H U) / 2**n`` as an array ``C[x, z]``.

    Uses one Walsh-Hadamard transform per X pattern, so the cost is
    ``O(4**n n)`` rather than ``4**n`` dense traces.
    """
    dim = U.shape[0]
    cols = np.arange(dim)
    shifted = U[cols[None, :] ^ cols[:, None], cols[None, :]]  # [x, c] -> U[c^x, c]
    sums = _walsh_hadamard(shifted)
    xz = cols[:, None] & cols[None, :]
    ipow = (np.bitwise_count(xz) % 4).astype(int)
    return sums * (1j ** (-ipow)) / dim


def expand(U, tolerance=DEFAULT_TOLERANCE):
    """Expand ``U`` in the canonical Pauli basis, dropping terms below ``tolerance``."""
    U, n = check_unitary(U)
    table = pauli_coefficients(U)
    xs, zs = np.nonzero(np.abs(table) >= tolerance)
    coeffs = {PauliString(n, int(x), int(z)): complex(table[x, z]) for x, z in zip(xs, zs)}
    return OperatorExpansion(n, coeffs, tolerance)


def _xor_basis(keys):
    """Reduced echelon basis (descending pivots) of the GF(2) span of ``keys``."""
    basis = []
    for v in keys:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis = [min(b, b ^ v) for b in basis]
            basis.append(v)
            basis.sort(reverse=True)
    return basis


@dataclass(frozen=True)
class SupportGroup:
    """A projective Pauli group: the GF(2) span of ``generators``.

    ``functional`` records, for groups carved out of a parent group, which
    nonzero functional on the parent's generators has this group as kernel.
    """

    n: int
    generators: tuple
    members: tuple
    captured_norm: float = 0.0
    functional: int = 0

    @classmethod
    def span(cls, n, strings, expansion=None, functional=0):
        gens = tuple(from_key(n, k) for k in _xor_basis(p.key for p in strings))
        members = [PauliString(n)]
        for g in gens:
            members += [PauliString(n, m.x ^ g.x, m.z ^ g.z) for m in members]
        members.sort(key=lambda p: p.key)
        captured = norm_in(expansion, members) if expansion is not None else 0.0
        return cls(n, gens, tuple(members), captured, functional)

    @property
    def rank(self):
        return len(self.generators)

    @cached_property
    def keys(self):
        return frozenset(p.key for p in self.members)

    def __contains__(self, p):
        return p.key in self.keys

    def __len__(self):
        return len(self.members)

    def coordinates(self, p):
        """Bit mask over ``generators`` whose XOR gives ``p``'s label."""
        v, mask = p.key, 0
        for i, g in enumerate(self.generators):
            top = 1 << (g.key.bit_length() - 1)
            if v & top:
                v ^= g.key
                mask |= 1 << i
        if v:
            raise InvalidInputError(f"{p} is not in the group")
        return mask

    def labels(self, style="string"):
        return [p.to_label(style) for p in self.members]


def support_closure(e):
    """Smallest projective group containing the support of ``e``."""
    if not len(e):
        raise InvalidInputError("expansion has empty support")
    return SupportGroup.span(e.n, e.support, e)


def norm_in(e, group):
    """Sum of ``|C_k|**2`` over the labels in ``group``."""
    if isinstance(group, SupportGroup):
        group = group.members
    seen = set()
    total = 0.0
    for g in group:
        p = g.canonical() if isinstance(g, PauliString) else parse_label(g, e.n)
        if p.key in seen:
            continue
        seen.add(p.key)
        total += abs(e[p]) ** 2
    return total


def index2_subgroups(g, e):
    """Every index-2 subgroup of ``g`` with the norm of ``e`` it captures.

    Subgroups are kernels of the ``2**rank - 1`` nonzero functionals on ``g``;
    the list is sorted by captured norm (descending) and then by member keys.
    """
    if g.rank == 0:
        raise InvalidInputError("the trivial group has no proper subgroup")
    coords = [(p, g.coordinates(p)) for p in g.members]
    out = []
    for f in range(1, 1 << g.rank):
        kernel = [p for p, c in coords if (c & f).bit_count() % 2 == 0]
        sub = SupportGroup.span(g.n, kernel, e, functional=f)
        out.append((sub, sub.captured_norm))
    out.sort(key=lambda item: (-round(item[1], 12), [p.key for p in item[0].members]))
    return out


def coset(g, h):
    """Members of ``g`` outside the subgroup ``h``, in basis order."""
    inner = h.keys
    return [p for p in g.members if p.key not in inner]


def group_norm_partition(e, g, h):
    """``(N_h, N_{g - h})``; the two add up to ``N_g``."""
    return norm_in(e, h), norm_in(e, coset(g, h))

