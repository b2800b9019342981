import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from qutrit_marginal.decomposer import (
    in_hull,
    lp_decompose,
    phase_one,
    reconstruct,
    solve_simplex_coords,
)
from qutrit_marginal.errors import DegenerateSimplexError, DomainError, NotInHullError
from qutrit_marginal.polytope import SPEC_A, SPEC_B, SPEC_O, EPoint, corner, corner_points, membership
from qutrit_marginal.verifier import grid_sample

O, A, B = SPEC_O, SPEC_A, SPEC_B
CORNERS = corner_points()
PTS = np.array([c.point.lam for c in CORNERS])


@given(st.lists(st.floats(0, 1), min_size=33, max_size=33).filter(lambda w: sum(w) > 1e-3))
def test_convex_combinations_decompose(raw):
    w = np.array(raw) / sum(raw)
    x = EPoint(reconstruct(PTS, w))
    dec = lp_decompose(CORNERS, x)
    assert np.all(dec.weights >= 0) and dec.weights.sum() == pytest.approx(1)
    assert np.allclose(reconstruct(PTS, dec.weights), x.lam, atol=1e-9)


@pytest.mark.parametrize("rows", [(O, O, A), (O, O, B), (O, A, B)])
def test_excluded_points_infeasible(rows):
    with pytest.raises(NotInHullError):
        lp_decompose(CORNERS, corner(*rows).point)


def test_agrees_with_scipy_linprog():
    pts = grid_sample(300, seed=7)
    m = np.vstack([PTS[:, :, :2].reshape(33, 6).T, np.ones(33)])
    for lam in pts:
        rhs = np.concatenate([lam[:, :2].reshape(6), [1.0]])
        ref = linprog(np.zeros(33), A_eq=m, b_eq=rhs, bounds=(0, None), method="highs")
        assert in_hull(CORNERS, EPoint(lam)) == (ref.status == 0)
        assert in_hull(CORNERS, EPoint(lam)) == membership(EPoint(lam), 1e-9).member


def test_phase_one_small_system():
    w, infeas = phase_one(np.array([[1.0, 1.0]]), np.array([1.0]))
    assert infeas == pytest.approx(0) and w.sum() == pytest.approx(1)
    _, infeas = phase_one(np.array([[1.0, 1.0]]), np.array([-1.0]))
    assert infeas > 0.5


def test_simplex_coords():
    rows = [(O, O, O), (B, B, O), (A, A, O), (A, B, (1 / 6, 1 / 6, 2 / 3)), (A, (0.25, 0.25, 0.5), (0, 0.25, 0.75)),
            (A, B, A), ((0, 1 / 3, 2 / 3), B, (0, 1 / 3, 2 / 3))]
    cs = [corner(*r) for r in rows]
    bary = EPoint(np.mean([c.point.lam for c in cs], axis=0))
    dec = solve_simplex_coords(cs, bary)
    assert np.allclose(dec.weights, 1 / 7)
    with pytest.raises(DegenerateSimplexError):
        solve_simplex_coords(cs[:6] + cs[:1], bary)
    with pytest.raises(DomainError):
        solve_simplex_coords(cs[:3], bary)
