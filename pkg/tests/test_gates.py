import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import chain_oracle, fidelity, pauli_exp, random_product
from pauliseq.decomposer import Decomposition, decompose
from pauliseq.exceptions import InvalidInputError, ResidualError
from pauliseq.gates import GatePrimitive, GateProgram, _cancel, lower, lower_factor, replay
from pauliseq.pauli import PauliString, parse_label
from pauliseq.sequences import generate

contiguous_st = st.integers(1, 5).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.integers(0, n - 1).flatmap(lambda a: st.tuples(st.just(a), st.integers(a, n - 1))),
    )
).flatmap(
    lambda t: st.tuples(
        st.just(t[0]),
        st.just(t[1][0]),
        st.text("XYZ", min_size=t[1][1] - t[1][0] + 1, max_size=t[1][1] - t[1][0] + 1),
    )
)


def embed(n, start, letters):
    return "I" * start + letters + "I" * (n - start - len(letters))


class TestLowerFactor:
    def test_single_site_is_one_rotation(self):
        gates = lower_factor(parse_label("ZII"), 0.7)
        assert gates == [GatePrimitive.rotation(0, "z", 0.7)]

    def test_adjacent_zz_is_native(self):
        gates = lower_factor(parse_label("ZZ"), -0.4)
        assert gates == [GatePrimitive.zz(0, 1, -0.4)]

    def test_three_site_factor(self):
        p = parse_label("4I1zI2xI3z", 3)
        gates = lower_factor(p, math.pi / 2)
        np.testing.assert_allclose(replay(gates, 3), pauli_exp("ZXZ", math.pi / 2), atol=1e-10)
        assert {g.kind for g in gates} == {"ROT", "ZZ"}

    @settings(max_examples=300, deadline=None)
    @given(contiguous_st, st.floats(-7, 7))
    def test_any_contiguous_string(self, spec, theta):
        n, start, letters = spec
        label = embed(n, start, letters)
        gates = lower_factor(parse_label(label), theta, provenance=4)
        np.testing.assert_allclose(replay(gates, n), pauli_exp(label, theta), atol=1e-10)
        assert all(g.provenance == 4 for g in gates)
        assert all(g.kind == "ROT" or g.sites[1] == g.sites[0] + 1 for g in gates)
        assert len(gates) <= 6 * len(letters)

    def test_identity_emits_nothing(self):
        assert lower_factor(PauliString.identity(3), 1.0) == []

    def test_rejects_gaps_and_phases(self):
        with pytest.raises(InvalidInputError):
            lower_factor(parse_label("XIX"), 0.3)
        with pytest.raises(InvalidInputError):
            lower_factor(PauliString(1, 1, 0, 2), 0.3)


class TestPrimitive:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            GatePrimitive.zz(0, 2, 0.1)
        with pytest.raises(InvalidInputError):
            GatePrimitive.rotation(0, "w", 0.1)
        with pytest.raises(InvalidInputError):
            GatePrimitive("CNOT", (0, 1), 0.1)

    def test_text_format(self):
        assert GatePrimitive.rotation(2, "x", 0.5).to_text() == "ROT q=2 axis=x angle=0.5"
        assert GatePrimitive.zz(2, 1, -0.25).to_text() == "ZZ q=1,2 angle=-0.25"

    def test_inverse_cancels(self):
        g = GatePrimitive.rotation(1, "y", 0.3)
        assert g.cancels(g.inverse())
        assert not g.cancels(GatePrimitive.rotation(1, "x", -0.3))


class TestLower:
    def test_empty(self):
        prog = lower(Decomposition(3))
        assert len(prog) == 0 and prog.certified_residual == 0.0

    def test_transfer_decomposition(self):
        U = chain_oracle(3)
        prog = lower(decompose(U))
        assert fidelity(prog.to_matrix(), U) >= 1 - 1e-9
        np.testing.assert_allclose(prog.to_matrix(include_phase=True), U, atol=1e-9)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_closed_form_sequences(self, n):
        U = chain_oracle(n)
        prog = lower(generate(n).to_decomposition(U))
        assert prog.uses_nearest_neighbour_only
        assert prog.certified_residual < 1e-9
        assert fidelity(prog.to_matrix(), U) >= 1 - 1e-9

    def test_identity_factor_becomes_phase(self):
        d = Decomposition(1, [(PauliString.identity(1), 0.6), (parse_label("X"), 0.2)])
        prog = lower(d)
        assert len(prog) == 1
        assert prog.global_phase == pytest.approx(np.exp(-0.3j))
        np.testing.assert_allclose(prog.to_matrix(True), d.to_matrix(), atol=1e-12)

    def test_cancellation_is_sound(self, rng):
        for _ in range(20):
            U, factors = random_product(rng, 3, 4)
            contiguous = [(parse_label(l), t) for l, t in factors if parse_label(l).support() in ([], [0], [1], [2], [0, 1], [1, 2], [0, 1, 2])]
            raw = list(itertools.chain.from_iterable(lower_factor(p, t) for p, t in reversed(contiguous)))
            np.testing.assert_allclose(replay(_cancel(raw), 3), replay(raw, 3), atol=1e-12)

    def test_adjacent_inverses_removed(self):
        d = Decomposition(2, [(parse_label("XZ"), 0.4), (parse_label("XZ"), -0.4)])
        assert len(lower(d)) == 0

    def test_certification_rejects(self):
        d = Decomposition(2, [(parse_label("XY"), 0.4)])
        with pytest.raises(ResidualError):
            lower(d, tolerance=0.0)

    def test_non_contiguous_factor(self):
        with pytest.raises(InvalidInputError):
            lower(Decomposition(3, [(parse_label("XIX"), 0.4)]))

    def test_serialization(self):
        prog = lower(generate(3).to_decomposition(chain_oracle(3)))
        back = GateProgram.from_dict(json.loads(prog.to_json()))
        assert back == prog
        text = prog.to_text().splitlines()
        assert text[0].startswith("# n=3 residual=")
        assert all(line.startswith(("ROT q=", "ZZ q=")) for line in text[1:])
        with pytest.raises(InvalidInputError):
            GateProgram.from_dict({"n": 3})
