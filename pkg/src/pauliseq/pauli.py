"""Pauli product operators in symplectic (bit-vector) form.

A :class:`PauliString` on ``n`` qubits is ``i**phase * P_1 (x) ... (x) P_n``
where each ``P_j`` is one of the Hermitian single-qubit Paulis.  The X and Z
supports are stored as Python ints; qubit 1 is the most significant bit, which
is also the leftmost Kronecker factor (``QUBIT_ORDER``).  With that choice the
bit positions of a string coincide with the bit positions of the computational
basis index, so dense rendering needs no reversal.

Two label grammars are understood:

* string form, one letter per qubit: ``"XIZ"``
* NMR product-operator form with 1-based sites: ``"1"``, ``"I2x"``,
  ``"2I1xI3x"``, ``"4I1yI2xI3y"``.  The ``2**(q-1)`` prefix on a ``q``-spin
  term is part of the name only: ``4I1yI2xI3y`` denotes the unit-square
  string ``YXY``, whose NMR operator is half of it.
"""

from dataclasses import dataclass
import re

import numpy as np

from .exceptions import DimensionError, InvalidInputError
from .validation import check_qubits

QUBIT_ORDER = "qubit 1 leftmost (most significant)"

_LETTERS = "IXZY"  # index = x + 2*z
_PAPER_TERM = re.compile(r"I(\d+)([xyzXYZ])")


@dataclass(frozen=True, slots=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError(f"qubit count must be >= 1, got {self.n}")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask or self.x < 0 or self.z < 0:
            raise InvalidInputError(f"bit vectors do not fit in {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n):
        return cls(n)

    @classmethod
    def from_label(cls, label, n=None):
        return parse_label(label, n)

    @classmethod
    def single(cls, n, site, axis):
        """One Pauli ``axis`` on 0-based ``site``."""
        bit = 1 << (n - 1 - site)
        axis = axis.upper()
        return cls(n, bit if axis in "XY" else 0, bit if axis in "ZY" else 0)

    @property
    def key(self):
        """GF(2) vector as one int; sorting by it gives the basis order."""
        return (self.z << self.n) | self.x

    @property
    def is_canonical(self):
        return self.phase == 0

    @property
    def weight(self):
        return (self.x | self.z).bit_count()

    def canonical(self):
        """Same label with the phase dropped."""
        return PauliString(self.n, self.x, self.z)

    def letter(self, site):
        shift = self.n - 1 - site
        return _LETTERS[((self.x >> shift) & 1) + 2 * ((self.z >> shift) & 1)]

    def support(self):
        """0-based sites carrying a non-identity factor, ascending."""
        occ = self.x | self.z
        return [j for j in range(self.n) if (occ >> (self.n - 1 - j)) & 1]

    def to_label(self, style="string"):
        return format_label(self, style)

    def __mul__(self, other):
        return multiply(self, other)

    def __str__(self):
        prefix = ("", "i", "-", "-i")[self.phase]
        return prefix + self.to_label()

    def __repr__(self):
        return f"PauliString({self})"


def _check_same_n(a, b):
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")


def product_phase(a, b):
    """Power of ``i`` picked up when multiplying two canonical strings.

    ``canon(a) * canon(b) == i**k * canon(a ^ b)`` with ``k`` returned.
    """
    x3, z3 = a.x ^ b.x, a.z ^ b.z
    k = (a.x & a.z).bit_count() + (b.x & b.z).bit_count() - (x3 & z3).bit_count()
    k += 2 * (a.z & b.x).bit_count()
    return k % 4


def multiply(a, b):
    """Operator product ``a @ b`` with exact phase tracking."""
    _check_same_n(a, b)
    phase = a.phase + b.phase + product_phase(a, b)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, phase)


def commutes(a, b):
    """True iff the symplectic form of ``a`` and ``b`` vanishes."""
    _check_same_n(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def to_matrix(p):
    """Dense ``2**n x 2**n`` rendering."""
    n = check_qubits(p.n)
    cols = np.arange(1 << n, dtype=np.int64)
    rows = cols ^ p.x
    signs = 1 - 2 * (np.bitwise_count(cols & p.z) & 1).astype(np.int64)
    scalar = 1j ** ((p.phase + (p.x & p.z).bit_count()) % 4)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    out[rows, cols] = scalar * signs
    return out


def exponential_factor(p, theta):
    """``exp(-i theta/2 P) = cos(theta/2) 1 - i sin(theta/2) P`` for canonical ``P``."""
    if not p.is_canonical:
        raise InvalidInputError(f"exponential needs a canonical string, got {p}")
    dim = 1 << check_qubits(p.n)
    return np.cos(theta / 2) * np.eye(dim) - 1j * np.sin(theta / 2) * to_matrix(p)


def enumerate_basis(n):
    """All ``4**n`` canonical strings, ordered by ``(z, x)`` with identity first."""
    if n < 1:
        raise InvalidInputError(f"qubit count must be >= 1, got {n}")
    size = 1 << n
    for z in range(size):
        for x in range(size):
            yield PauliString(n, x, z)


def from_key(n, key):
    mask = (1 << n) - 1
    return PauliString(n, key & mask, key >> n)


def format_label(p, style="string"):
    """Render the label of ``p`` (its phase is ignored)."""
    if style == "string":
        return "".join(p.letter(j) for j in range(p.n))
    if style == "product":
        sites = p.support()
        if not sites:
            return "1"
        terms = "".join(f"I{j + 1}{p.letter(j).lower()}" for j in sites)
        prefix = 1 << (len(sites) - 1)
        return terms if prefix == 1 else f"{prefix}{terms}"
    raise InvalidInputError(f"unknown label style {style!r}")


def parse_label(label, n=None):
    """Parse either label grammar into a canonical :class:`PauliString`.

    ``n`` is required for product-operator labels whose highest site is not
    the last qubit; string-form labels carry their own length.
    """
    text = label.strip()
    if text and all(c in "IXYZ" for c in text):
        if n is not None and n != len(text):
            raise InvalidInputError(f"label {text!r} has {len(text)} qubits, expected {n}")
        x = z = 0
        for c in text:
            idx = _LETTERS.index(c)
            x = (x << 1) | (idx & 1)
            z = (z << 1) | (idx >> 1)
        return PauliString(len(text), x, z)

    if text == "1":
        if n is None:
            raise InvalidInputError("identity label '1' needs an explicit qubit count")
        return PauliString(n)

    m = re.fullmatch(r"(\d*)((?:I\d+[xyzXYZ])+)", text)
    if m is None:
        raise InvalidInputError(f"cannot parse Pauli label {label!r}")
    terms = [(int(site), axis) for site, axis in _PAPER_TERM.findall(m.group(2))]
    sites = [s for s, _ in terms]
    if min(sites) < 1 or len(set(sites)) != len(sites):
        raise InvalidInputError(f"sites in {label!r} must be distinct and >= 1")
    if n is None:
        n = max(sites)
    if max(sites) > n:
        raise InvalidInputError(f"site {max(sites)} out of range for {n} qubits")
    expected = 1 << (len(terms) - 1)
    if m.group(1) and int(m.group(1)) != expected:
        raise InvalidInputError(
            f"prefix {m.group(1)} in {label!r} should be {expected} for {len(terms)} spins"
        )
    p = PauliString(n)
    for site, axis in terms:
        q = PauliString.single(n, site - 1, axis)
        p = PauliString(n, p.x | q.x, p.z | q.z)
    return p
