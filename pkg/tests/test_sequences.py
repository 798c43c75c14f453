import math

import numpy as np
import pytest

from conftest import chain_oracle, fidelity, kron_label, pauli_exp
from pauliseq.exceptions import InvalidInputError
from pauliseq.sequences import MIRROR_ANGLE, TAIL_ANGLE, factor_count, generate, mirror_factor


def product(seq):
    U = np.eye(2**seq.n, dtype=complex)
    for p, theta in seq.factors:
        U = U @ pauli_exp(p.to_label(), theta)
    return U


def test_three_site_sequence():
    seq = generate(3)
    assert [(p.to_label("product"), t) for p, t in seq.factors] == [
        ("4I1yI2xI3y", MIRROR_ANGLE),
        ("4I1zI2xI3z", MIRROR_ANGLE),
        ("I2x", TAIL_ANGLE),
    ]
    assert seq.parity_tail
    # exp(+i pi/2 * 4I_1yI_2xI_3y) is the canonical YXY rotated by -pi/2
    expected = math.cos(math.pi / 4) * np.eye(8) + 1j * math.sin(math.pi / 4) * kron_label("YXY")
    np.testing.assert_allclose(pauli_exp("YXY", MIRROR_ANGLE), expected, atol=1e-12)


def test_two_sites_have_no_tail():
    seq = generate(2)
    assert [p.to_label() for p, _ in seq.factors] == ["YY", "ZZ"]
    assert not seq.parity_tail


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
def test_matches_direct_evolution(n):
    seq = generate(n)
    U = chain_oracle(n)
    assert fidelity(product(seq), U) >= 1 - 1e-10
    d = seq.to_decomposition(U)
    assert d.residual < 1e-10
    np.testing.assert_allclose(d.to_matrix(), U, atol=1e-10)


@pytest.mark.parametrize("n", range(2, 12))
def test_factor_count_is_linear(n):
    assert factor_count(n) == len(generate(n)) == 2 * (n // 2) + n % 2
    assert factor_count(n) <= n + 1
    assert [factor_count(k) for k in (2, 3, 6)] == [2, 3, 6]


@pytest.mark.parametrize("n", range(2, 9))
def test_mirror_symmetry(n):
    seq = generate(n)
    pairs = seq.factors[:-1] if seq.parity_tail else seq.factors
    for k, (p, _) in enumerate(pairs):
        label = p.to_label()
        assert label == label[::-1]
        outer = k // 2
        assert label[outer] == ("Y" if k % 2 == 0 else "Z")
        assert set(label[outer + 1 : n - outer - 1]) <= {"X"}
        assert set(label[:outer]) <= {"I"}
    if seq.parity_tail:
        assert seq.factors[-1][0].support() == [(n - 1) // 2]


def test_mirror_factor_labels():
    assert mirror_factor(5, 2, "Z").to_label() == "IZXZI"
    assert mirror_factor(4, 1, "Y").to_label() == "YXXY"


def test_decomposition_without_target():
    d = generate(4).to_decomposition()
    assert d.global_phase == 1 and len(d) == 4


def test_rejects_short_chains():
    with pytest.raises(InvalidInputError):
        generate(1)
    with pytest.raises(InvalidInputError):
        factor_count(1)
