from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qutrit_marginal.errors import DomainError
from qutrit_marginal.polytope import (
    ALL_INEQUALITIES,
    PERMS,
    EPoint,
    Functional,
    InequalityId,
    SPEC_A,
    SPEC_B,
    SPEC_O,
    compose_perm,
    corner,
    corner_points,
    eval_functional,
    eval_inequality,
    facet_simplices,
    general_marginal_inequality,
    invert_perm,
    membership,
    membership_batch,
)
from qutrit_marginal.tensor_core import random_amplitudes, spectra_batch

O, A, B = SPEC_O, SPEC_A, SPEC_B


def L(lam, a, i):
    return lam[a - 1][i - 1]


# each family written out as "right side minus left side" with explicit slots
ORACLE = {
    1: lambda l, a, b, c: L(l, b, 2) + L(l, b, 1) + L(l, c, 2) + L(l, c, 1) - L(l, a, 2) - L(l, a, 1),
    2: lambda l, a, b, c: L(l, b, 2) + L(l, b, 1) + L(l, c, 3) + L(l, c, 1) - L(l, a, 3) - L(l, a, 1),
    3: lambda l, a, b, c: L(l, b, 2) + L(l, b, 1) + L(l, c, 2) + L(l, c, 3) - L(l, a, 2) - L(l, a, 3),
    4: lambda l, a, b, c: 2 * L(l, b, 2) + L(l, b, 1) + 2 * L(l, c, 2) + L(l, c, 1) - 2 * L(l, a, 2) - L(l, a, 1),
    5: lambda l, a, b, c: 2 * L(l, b, 2) + L(l, b, 1) + 2 * L(l, c, 1) + L(l, c, 2) - 2 * L(l, a, 1) - L(l, a, 2),
    6: lambda l, a, b, c: 2 * L(l, b, 2) + L(l, b, 1) + 2 * L(l, c, 2) + L(l, c, 3) - 2 * L(l, a, 2) - L(l, a, 3),
    7: lambda l, a, b, c: 2 * L(l, b, 1) + L(l, b, 2) + 2 * L(l, c, 3) + L(l, c, 2) - 2 * L(l, a, 2) - L(l, a, 3),
}

spectrum = st.lists(st.floats(0, 1), min_size=3, max_size=3).map(sorted)
epoints = st.tuples(spectrum, spectrum, spectrum).map(lambda r: np.array(r))
perms = st.sampled_from(PERMS)


@given(epoints)
def test_slacks_match_transcribed_inequalities(lam):
    for ineq in ALL_INEQUALITIES:
        expect = ORACLE[ineq.family](lam, *ineq.perm)
        assert eval_inequality(ineq, lam) == pytest.approx(expect, abs=1e-12)


@given(epoints, perms, perms)
def test_permutation_equivariance(lam, sigma, pi):
    x = EPoint(lam)
    for k in range(1, 8):
        lhs = eval_inequality(InequalityId(k, compose_perm(sigma, pi)), x)
        rhs = eval_inequality(InequalityId(k, pi), x.permuted(invert_perm(sigma)))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_corner_count_and_membership():
    cs = corner_points()
    assert len(cs) == 33
    assert len({c.exact for c in cs}) == 33
    for c in cs:
        assert membership(c.point).member


@pytest.mark.parametrize("rows", [(O, O, A), (O, O, B), (O, A, B)])
def test_excluded_points(rows):
    for p in PERMS:
        rep = membership(corner(*rows).permuted(p).point)
        assert not rep.member and rep.violations


def test_functional_values_exact():
    quarter = (F(1, 4), F(1, 4), F(1, 2))
    y = (F(0), F(1, 4), F(3, 4))
    x = (F(0), F(1, 3), F(2, 3))
    assert eval_functional(Functional("P8"), corner(A, quarter, y).exact) == F(-1, 4)
    assert eval_functional(Functional("tildeP9"), corner(B, x, x).exact) == F(-1, 3)
    assert eval_functional(Functional("Q3"), corner(A, A, A).exact) == F(-1, 2)


def test_facet_corners_are_tight():
    facets = facet_simplices()
    assert len(facets) == 42
    for f in facets:
        for c in f.corners:
            assert eval_inequality(f.id, c.exact) == 0


def test_general_inequality_examples():
    assert general_marginal_inequality([O, O, O]) == 0
    assert general_marginal_inequality([O, O, B]) == pytest.approx(-2 / 3)


def test_general_inequality_bipartite(rng):
    z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    z /= np.linalg.norm(z)
    sa = np.sort(np.linalg.eigvalsh(z @ z.conj().T))
    sb = np.sort(np.linalg.eigvalsh(z.T @ z.conj()))
    assert abs(general_marginal_inequality([sa, sb])) < 1e-10


def test_random_states_satisfy_corollary(rng):
    lam = spectra_batch(random_amplitudes(rng, 2000))
    assert membership_batch(lam)[0].all()
    for a, b, c in PERMS:
        assert np.all(lam[:, b - 1, 1] + lam[:, c - 1, 2] >= lam[:, a - 1, 1] - 1e-10)


def test_pure_qutrit_forces_equal_partners():
    # on a coarse grid: if one qutrit is pure, members have equal other spectra
    grid = [np.array(s) / 6 for s in [(0, 0, 6), (0, 1, 5), (0, 3, 3), (1, 1, 4), (2, 2, 2), (1, 2, 3), (0, 2, 4)]]
    for s in grid:
        for t in grid:
            x = EPoint(np.stack([[0, 0, 1], s, t]))
            if membership(x).member:
                assert np.allclose(s, t)


def test_epoint_json_and_errors():
    x = EPoint(np.array([[0, 0, 1], [0, 0.5, 0.5], [0, 0.5, 0.5]]))
    assert EPoint.from_json(x.to_json()) == x
    with pytest.raises(DomainError):
        EPoint.from_json({"lambda": [[1, 2]]})
    with pytest.raises(DomainError):
        EPoint(np.full((3, 3), np.nan))


def test_inequality_id_parse():
    for ineq in ALL_INEQUALITIES:
        assert InequalityId.parse(str(ineq)) == ineq
    with pytest.raises(DomainError):
        InequalityId.parse("foo")
    with pytest.raises(DomainError):
        Functional("P2")
