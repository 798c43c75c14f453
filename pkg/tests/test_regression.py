"""Frozen simulator output for perturbed chains.  Values were produced once by
this package and cross-checked against the expm oracle; they guard against
silent numerical drift."""

import math

import pytest

from conftest import chain_oracle, fidelity
from pauliseq.decomposer import decompose
from pauliseq.hamiltonian import ChainSpec, evolve
from pauliseq.qst import robustness_sweep

GRID32 = [2 * math.pi * j / 32 for j in range(32)]

# delta -> (peak signal, max phase error, worst outcome-0 fidelity)
SWEEP = {
    0.0: (0.9999999999999994, 3.553872825060379e-15, 0.9999999999999997),
    0.05: (0.9995109396121827, 0.024145601324299604, 0.9997360316325605),
    -0.1: (0.9980593481414662, 0.049643646457106096, 0.9989429186265073),
    0.1: (0.9980399873306143, 0.05012613171033396, 0.9989453649758497),
    0.2: (0.9921384854463704, 0.10891175036434722, 0.9957962993999518),
}

FACTORS = {0.05: 19, 0.1: 19, 0.2: 19, -0.1: 20}


def test_sweep_summary():
    table = robustness_sweep(ChainSpec.ideal_chain(3), list(SWEEP), GRID32)
    assert [s.delta_j for s in table.summary] == [0.0, 0.05, -0.1, 0.1, 0.2]
    for s in table.summary:
        peak, err, fid = SWEEP[s.delta_j]
        assert s.peak_signal == pytest.approx(peak, abs=1e-12)
        assert s.phase_error == pytest.approx(err, abs=1e-12)
        assert s.branch0_fidelity == pytest.approx(fid, abs=1e-12)


def test_sign_of_error_is_not_symmetric():
    peaks = {s.delta_j: s.peak_signal for s in robustness_sweep(ChainSpec.ideal_chain(3), [0.1, -0.1], GRID32).summary}
    assert peaks[-0.1] > peaks[0.1]


@pytest.mark.parametrize("delta", sorted(FACTORS))
def test_perturbed_factor_counts(delta):
    U = evolve(ChainSpec.ideal_chain(3, perturbation=delta))
    d = decompose(U)
    assert len(d) == FACTORS[delta]
    assert fidelity(d.to_matrix(), chain_oracle(3, delta=delta)) >= 1 - 1e-10
