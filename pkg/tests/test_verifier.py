import numpy as np
import pytest

from qutrit_marginal import verifier as V
from qutrit_marginal.constructor import construct
from qutrit_marginal.polytope import (
    Functional,
    all_slacks,
    eval_functional,
    eval_inequality,
    facet_simplices,
)
from qutrit_marginal.tensor_core import (
    apply_local_unitaries_batch,
    random_amplitudes,
    random_unitary,
    spectra,
    spectra_batch,
)


def test_sweep_deterministic():
    a = V.necessity_sweep(1, seed=9).to_json()
    assert a == V.necessity_sweep(1, seed=9).to_json()
    assert a["failures"] == 0


def test_sweep_small():
    rep = V.necessity_sweep(2000, seed=1)
    assert rep.failures == 0 and rep.min_slack_overall >= -1e-10
    with pytest.raises(ValueError):
        V.necessity_sweep(0)


def test_slacks_invariant_under_local_unitaries(rng):
    amps = random_amplitudes(rng, 50)
    u = random_unitary(rng, 150).reshape(50, 3, 3, 3)
    moved = apply_local_unitaries_batch(amps, u)
    assert np.allclose(all_slacks(spectra_batch(amps)), all_slacks(spectra_batch(moved)), atol=1e-12)


def test_minimize_p4_reaches_zero():
    rep = V.minimize_functional(Functional("P4"), restarts=16, seed=0, max_iters=300)
    assert -1e-6 <= rep.best_value <= 1e-4


def test_minimize_p1_lands_on_border():
    rep = V.minimize_functional(Functional("P1"), restarts=16, seed=0, max_iters=300)
    assert abs(rep.best_value) < 1e-4
    assert abs(eval_functional(Functional("P1"), spectra(rep.best_state))) < 1e-4


def test_functionals_vanish_on_constructed_facet_states():
    for f in facet_simplices()[::5]:
        for c in f.corners:
            state, _ = construct(c.point)
            assert abs(eval_inequality(f.id, spectra(state))) < 1e-8


def test_facet_suite_passes():
    rep = V.facet_suite()
    assert rep["pass"] and rep["facets"] == 42


def test_round_trip_small():
    rep = V.round_trip_suite(n=50, seed=3)
    assert rep["pass"]


def test_grids():
    g = V.grid_sample(100, seed=0)
    assert g.shape == (100, 3, 3)
    assert np.allclose(g.sum(axis=2), 1)
    assert np.all(np.diff(g, axis=2) >= 0)
    assert len(V.ordered_spectra(24)) == 61
    q = V.qubit_slice(6)
    assert np.all(q[:, :, 0] == 0)


def test_redundancy_small():
    rep = V.redundancy_check(V.grid_sample(2000, seed=5))
    assert rep["counterexamples"] == 0 and rep["premise_holds"] > 0


def test_sample_interior_members(rng):
    from qutrit_marginal.polytope import membership_batch

    pts = V.sample_interior(200, rng)
    assert len(pts) == 200 and membership_batch(pts)[0].all()
