"""Closed-form transfer sequences for the ideal Ising chain.

For chain length ``n`` the transfer unitary factors as, for ``k = 1..n//2``,

    exp(+i pi/4 Y_k X_(k+1) ... X_(n-k) Y_(n-k+1))
    exp(+i pi/4 Z_k X_(k+1) ... X_(n-k) Z_(n-k+1))

followed, for odd ``n``, by ``exp(-i pi/4 X_((n+1)/2))``.  In product-operator
language a ``q``-spin term is ``2**(q-1) I...I``, i.e. half the unit-square
string, so each ``exp(+-i pi/2 * operator)`` is a canonical-string rotation by
``-+pi/2`` under the ``exp(-i theta P / 2)`` convention used here.  The factor
count is ``2 * (n // 2) + n % 2``: linear in ``n``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .decomposer import Decomposition
from .exceptions import InvalidInputError
from .pauli import PauliString

MIRROR_ANGLE = -math.pi / 2
TAIL_ANGLE = math.pi / 2


@dataclass(frozen=True)
class QstSequence:
    n: int
    factors: tuple
    parity_tail: bool

    def __len__(self):
        return len(self.factors)

    def to_decomposition(self, target=None):
        """As a :class:`Decomposition`; with ``target`` the global phase is fitted."""
        d = Decomposition(self.n, self.factors)
        if target is None:
            return d
        V = d.to_matrix()
        overlap = np.vdot(V, target)
        phase = overlap / abs(overlap)
        residual = float(np.max(np.abs(phase * V - target)))
        return Decomposition(self.n, self.factors, phase, residual)


def mirror_factor(n, k, axis):
    """``axis`` on 1-based sites ``k`` and ``n-k+1``, X on every site between."""
    letters = ["I"] * n
    letters[k - 1] = letters[n - k] = axis
    for j in range(k, n - k):
        letters[j] = "X"
    return PauliString.from_label("".join(letters))


def generate(n):
    if n < 2:
        raise InvalidInputError(f"transfer sequences need n >= 2, got {n}")
    factors = []
    for k in range(1, n // 2 + 1):
        factors.append((mirror_factor(n, k, "Y"), MIRROR_ANGLE))
        factors.append((mirror_factor(n, k, "Z"), MIRROR_ANGLE))
    tail = n % 2 == 1
    if tail:
        factors.append((PauliString.single(n, (n - 1) // 2, "X"), TAIL_ANGLE))
    return QstSequence(n, tuple(factors), tail)


def factor_count(n):
    if n < 2:
        raise InvalidInputError(f"transfer sequences need n >= 2, got {n}")
    return 2 * (n // 2) + n % 2
