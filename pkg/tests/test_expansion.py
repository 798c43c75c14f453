import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import chain_oracle, haar_unitary, kron_label
from pauliseq.exceptions import DimensionError, InvalidInputError
from pauliseq.expansion import (
    OperatorExpansion,
    SupportGroup,
    coset,
    expand,
    group_norm_partition,
    index2_subgroups,
    norm_in,
    pauli_coefficients,
    support_closure,
)
from pauliseq.pauli import PauliString, enumerate_basis, parse_label

R = 1 / (2 * math.sqrt(2))
# ideal 3-qubit transfer unitary at t0
GOLDEN = {
    "1": R, "I2x": -1j * R, "2I1xI3x": R, "2I1yI3y": R, "2I1zI3z": R,
    "4I1xI2xI3x": -1j * R, "4I1yI2xI3y": 1j * R, "4I1zI2xI3z": 1j * R,
}


def trace_oracle(U):
    n = U.shape[0].bit_length() - 1
    return {
        "".join(lab): np.trace(kron_label("".join(lab)).conj().T @ U) / 2**n
        for lab in itertools.product("IXYZ", repeat=n)
    }


class TestExpand:
    def test_golden_transfer_unitary(self):
        e = expand(chain_oracle(3))
        assert len(e) == 8
        for label, c in GOLDEN.items():
            assert abs(e[label] - c) < 1e-10
        others = set(range(64)) - {parse_label(lab, 3).key for lab in GOLDEN}
        table = pauli_coefficients(chain_oracle(3)).T.ravel()
        assert max(abs(table[k]) for k in others) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_trace_formula(self, n, rng):
        U = haar_unitary(rng, 2**n)
        oracle = trace_oracle(U)
        e = expand(U, tolerance=0.0)
        for label, c in oracle.items():
            assert abs(e[label] - c) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_parseval_and_reconstruction(self, n, rng):
        U = haar_unitary(rng, 2**n)
        e = expand(U, tolerance=1e-10)
        assert e.total_norm == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(e.to_matrix() - U)) <= n * 1e-10

    def test_identity_single_term(self):
        e = expand(np.eye(4))
        assert e.support == [PauliString.identity(2)]
        assert e["1"] == pytest.approx(1.0)

    def test_tolerance_drops_small_terms(self):
        U = np.diag(np.exp(1j * np.array([0, 1e-6, 0, 0])))
        assert all(abs(c) >= 1e-5 for _, c in expand(U, 1e-5))

    def test_rejects_bad_shapes(self):
        with pytest.raises(DimensionError):
            expand(np.eye(3))
        with pytest.raises(DimensionError):
            expand(np.ones((2, 4)))

    def test_non_unitary_warns(self):
        with pytest.warns(RuntimeWarning):
            expand(2 * np.eye(2))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_coefficient_magnitudes_bounded(self, n, seed):
        U = haar_unitary(np.random.default_rng(seed), 2**n)
        e = expand(U, 0.0)
        assert sum(abs(c) ** 2 for _, c in e) == pytest.approx(1.0, abs=1e-10)
        assert all(abs(c) <= 1 + 1e-12 for _, c in e)


class TestOperatorExpansion:
    def test_sorted_and_thresholded(self):
        e = OperatorExpansion(2, {parse_label("ZZ"): 0.5, parse_label("XI"): 1e-12, parse_label("II"): 0.5})
        assert [p.to_label() for p in e.support] == ["II", "ZZ"]

    def test_rejects_noncanonical_terms(self):
        with pytest.raises(InvalidInputError):
            OperatorExpansion(1, {PauliString(1, 1, 0, 1): 1.0})

    def test_json_roundtrip(self):
        e = expand(chain_oracle(3))
        back = OperatorExpansion.from_json(e.to_json())
        assert back.support == e.support
        assert all(back[p] == e[p] for p in e.support)
        assert json.loads(e.to_json())["terms"][0]["label"] == "1"

    def test_malformed_record(self):
        with pytest.raises(InvalidInputError):
            OperatorExpansion.from_dict({"terms": []})

    def test_top_ranks_by_magnitude(self):
        e = OperatorExpansion(1, {parse_label("X"): 0.6, parse_label("Z"): 0.8j})
        assert [p.to_label() for p, _ in e.top(1)] == ["Z"]


class TestGroups:
    def test_closure_of_golden_support(self):
        e = expand(chain_oracle(3))
        g = support_closure(e)
        assert g.rank == 3 and len(g) == 8
        assert set(g.labels()) == {"III", "IXI", "XIX", "YIY", "ZIZ", "XXX", "YXY", "ZXZ"}
        assert g.captured_norm == pytest.approx(1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda n: st.lists(st.text("IXYZ", min_size=n, max_size=n), min_size=1, max_size=5)))
    def test_span_is_closed_and_power_of_two(self, labs):
        n = len(labs[0])
        g = SupportGroup.span(n, [parse_label(x) for x in labs])
        keys = g.keys
        assert 0 in keys
        assert len(g) == 2**g.rank
        assert all((a ^ b) in keys for a in keys for b in keys)
        assert all(parse_label(x).key in keys for x in labs)
        for p in g.members:
            assert g.coordinates(p) < 2**g.rank

    def test_coordinates_reject_outsiders(self):
        g = SupportGroup.span(2, [parse_label("XX")])
        with pytest.raises(InvalidInputError):
            g.coordinates(parse_label("ZI"))

    def test_index2_subgroups(self):
        e = expand(chain_oracle(3))
        g = support_closure(e)
        subs = index2_subgroups(g, e)
        assert len(subs) == 2**g.rank - 1
        for h, captured in subs:
            assert len(h) == len(g) // 2
            assert h.keys <= g.keys
            inside, outside = group_norm_partition(e, g, h)
            assert inside == pytest.approx(captured)
            assert inside + outside == pytest.approx(1.0, abs=1e-12)
        # all seven hold exactly half the norm of the ideal transfer unitary
        assert all(c == pytest.approx(0.5, abs=1e-12) for _, c in subs)
        labels = {frozenset(h.labels()) for h, _ in subs}
        assert frozenset({"III", "IXI", "ZIZ", "ZXZ"}) in labels

    def test_subgroups_sorted_by_captured_norm(self, rng):
        U = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
        e = expand(U)
        caps = [c for _, c in index2_subgroups(support_closure(e), e)]
        assert caps == sorted(caps, reverse=True)

    def test_trivial_group_has_no_subgroups(self):
        e = expand(np.eye(2))
        with pytest.raises(InvalidInputError):
            index2_subgroups(support_closure(e), e)

    def test_norm_in_ignores_duplicates(self):
        e = expand(chain_oracle(3))
        assert norm_in(e, ["1", "1", "I2x"]) == pytest.approx(0.25)

    def test_coset_complements_subgroup(self):
        g = SupportGroup.span(2, [parse_label("XI"), parse_label("IZ")])
        h = SupportGroup.span(2, [parse_label("XI")])
        assert {p.to_label() for p in coset(g, h)} == {"IZ", "XZ"}

    def test_full_basis_is_a_group(self):
        g = SupportGroup.span(2, list(enumerate_basis(2)))
        assert g.rank == 4
