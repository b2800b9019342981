import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qutrit_marginal.errors import DomainError
from qutrit_marginal.tensor_core import (
    LocalUnitary,
    StateTensor,
    apply_local_unitary,
    canonicalize,
    eigh3,
    eigh3_batch,
    normalize,
    permute_axes,
    random_amplitudes,
    random_state,
    random_unitary,
    rdm,
    spectra,
    spectra_batch,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_product_state_is_pure_on_each_qutrit():
    s = StateTensor.from_dict({(3, 3, 3): 1.0})
    for ax in (1, 2, 3):
        assert np.allclose(spectra(s).lam[ax - 1], [0, 0, 1])


def test_ghz_has_half_half_marginals():
    s = StateTensor.from_dict({(1, 1, 1): 1.0, (2, 2, 2): 1.0})
    assert np.allclose(spectra(s).lam, [[0, 0.5, 0.5]] * 3)


def test_zero_state_rejected():
    with pytest.raises(DomainError):
        normalize(np.zeros((3, 3, 3)))


def test_bad_axis_rejected():
    with pytest.raises(DomainError):
        rdm(random_state(0), 4)


def test_non_hermitian_rejected():
    with pytest.raises(DomainError):
        eigh3(np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]]))


def test_non_unitary_rejected():
    with pytest.raises(DomainError):
        LocalUnitary(1, 2 * np.eye(3))


def test_json_round_trip():
    s = random_state(3)
    assert np.array_equal(StateTensor.from_json(s.to_json()).amps, s.amps)
    with pytest.raises(DomainError):
        StateTensor.from_json({"re": [[1]]})


@given(seeds)
def test_rdm_is_density_matrix(seed):
    s = random_state(seed)
    for ax in (1, 2, 3):
        rho = rdm(s, ax)
        assert np.allclose(rho, rho.conj().T, atol=0)
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-12


@given(seeds)
def test_jacobi_matches_lapack(seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((8, 3, 3)) + 1j * rng.standard_normal((8, 3, 3))
    h = z + np.conj(np.swapaxes(z, 1, 2))
    w, v = eigh3_batch(h)
    assert np.allclose(w, np.linalg.eigvalsh(h), atol=1e-12)
    recon = v @ (w[..., None] * np.conj(np.swapaxes(v, 1, 2)))
    assert np.allclose(recon, h, atol=1e-12)
    assert np.allclose(np.conj(np.swapaxes(v, 1, 2)) @ v, np.eye(3), atol=1e-12)


def test_jacobi_degenerate_input():
    w, v = eigh3(np.eye(3) / 3)
    assert np.allclose(w, 1 / 3)
    w, _ = eigh3(np.diag([0.5, 0.5, 0.0]))
    assert np.allclose(w, [0.0, 0.5, 0.5])


@given(seeds)
def test_spectra_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    s = StateTensor(random_amplitudes(rng, 1)[0])
    t = s
    for ax in (1, 2, 3):
        t = apply_local_unitary(t, LocalUnitary(ax, random_unitary(rng)))
    assert np.allclose(spectra(s).lam, spectra(t).lam, atol=1e-12)


@given(seeds)
def test_canonical_form_has_diagonal_rdms(seed):
    s = random_state(seed)
    c, us = canonicalize(s)
    for ax in (1, 2, 3):
        rho = rdm(c, ax)
        assert np.max(np.abs(rho - np.diag(np.diag(rho)))) < 1e-12
        assert np.allclose(np.diag(rho).real, spectra(s).lam[ax - 1], atol=1e-12)
    back = s
    for u in us:
        back = apply_local_unitary(back, u)
    assert np.allclose(back.amps, c.amps)


@given(seeds, st.permutations([1, 2, 3]))
def test_permute_axes_permutes_spectra(seed, perm):
    s = random_state(seed)
    assert np.allclose(spectra(permute_axes(s, perm)).lam, spectra(s).permuted(perm).lam)


def test_batch_matches_single():
    amps = random_amplitudes(np.random.default_rng(1), 5)
    lam = spectra_batch(amps)
    for a, l in zip(amps, lam):
        assert np.allclose(spectra(StateTensor(a)).lam, l)
