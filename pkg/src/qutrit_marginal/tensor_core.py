"""Pure three-qutrit states, their one-qutrit reduced density matrices and
local-unitary gauge fixing.

Amplitudes are stored as a ``(3, 3, 3)`` complex array indexed ``[i, j, k]``
with 0-based indices; qutrit labels (axes) are 1-based in the public API.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .polytope import EPoint, check_perm, invert_perm

NORM_FLOOR = 1e-15
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class StateTensor:
    amps: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amps, dtype=complex)
        if arr.shape != (3, 3, 3):
            raise DomainError(f"state needs 3x3x3 amplitudes, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "amps", arr)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    @classmethod
    def from_dict(cls, entries: dict) -> "StateTensor":
        """Build from ``{(i, j, k): amplitude}`` with 1-based indices, then normalize."""
        amps = np.zeros((3, 3, 3), dtype=complex)
        for (i, j, k), v in entries.items():
            amps[i - 1, j - 1, k - 1] = v
        return normalize(amps)

    def to_json(self) -> dict:
        return {"re": self.amps.real.tolist(), "im": self.amps.imag.tolist()}

    @classmethod
    def from_json(cls, obj) -> "StateTensor":
        try:
            re = np.array(obj["re"], dtype=float)
            im = np.array(obj.get("im", np.zeros((3, 3, 3))), dtype=float)
        except (TypeError, KeyError, ValueError) as exc:
            raise DomainError('state JSON must hold 3x3x3 "re" and "im" arrays') from exc
        if re.shape != (3, 3, 3) or im.shape != (3, 3, 3):
            raise DomainError('state JSON must hold 3x3x3 "re" and "im" arrays')
        return cls(re + 1j * im)


def normalize(state) -> StateTensor:
    amps = state.amps if isinstance(state, StateTensor) else np.asarray(state, dtype=complex)
    n = np.sqrt(np.sum(np.abs(amps) ** 2))
    if not np.isfinite(n) or n < NORM_FLOOR:
        raise DomainError("cannot normalize a (near-)zero state")
    return StateTensor(amps / n)


def _check_axis(axis) -> int:
    if axis not in (1, 2, 3):
        raise DomainError(f"axis must be 1, 2 or 3, got {axis!r}")
    return axis


_RDM_SUBSCRIPTS = {1: "...iJK,...jJK->...ij", 2: "...IiK,...IjK->...ij", 3: "...IJi,...IJj->...ij"}


def rdm_batch(amps: np.ndarray, axis: int) -> np.ndarray:
    """One-qutrit RDMs for amplitudes of shape ``(..., 3, 3, 3)``."""
    _check_axis(axis)
    rho = np.einsum(_RDM_SUBSCRIPTS[axis], amps, amps.conj())
    # exact Hermiticity by construction
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def rdm(state: StateTensor, axis: int) -> np.ndarray:
    """Reduced density matrix of qutrit ``axis`` (Hermitian 3x3, trace 1)."""
    return rdm_batch(state.amps, axis)


def eigh3_batch(mats: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic complex Jacobi diagonalization of a stack of Hermitian 3x3 matrices.

    Returns ``(w, V)`` with ascending eigenvalues ``w`` of shape ``(N, 3)`` and
    unitary ``V`` (columns are eigenvectors) so that ``m = V diag(w) V^†``.
    """
    a = np.array(mats, dtype=complex).reshape(-1, 3, 3)
    n = a.shape[0]
    v = np.broadcast_to(np.eye(3, dtype=complex), (n, 3, 3)).copy()
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    thresh = tol * scale
    idx = np.arange(n)
    for _ in range(max_sweeps):
        off = np.abs(a[:, [0, 0, 1], [1, 2, 2]])
        if off.max(initial=0.0) < thresh:
            break
        for p, q in _PAIRS:
            b = a[:, p, q]
            mag = np.abs(b)
            active = mag >= 0.1 * thresh
            if not active.any():
                continue
            phase = np.where(active, b / np.where(active, mag, 1.0), 1.0)
            alpha = a[:, p, p].real
            gamma = a[:, q, q].real
            diff = alpha - gamma
            sign = np.where(diff < 0.0, -1.0, 1.0)
            # small-angle branch |theta| <= pi/4
            theta = 0.5 * np.arctan2(2.0 * mag * sign, np.abs(diff))
            theta = np.where(active, theta, 0.0)
            c, s = np.cos(theta), np.sin(theta)
            g = np.broadcast_to(np.eye(3, dtype=complex), (n, 3, 3)).copy()
            # G = diag(1, e^{-i phi}) in the (p, q) block, followed by a real rotation
            g[idx, p, p] = c
            g[idx, p, q] = -s
            g[idx, q, p] = s * np.conj(phase)
            g[idx, q, q] = c * np.conj(phase)
            a = np.conj(np.swapaxes(g, 1, 2)) @ a @ g
            a[idx, p, q] = 0.0
            a[idx, q, p] = 0.0
            v = v @ g
    w = np.real(np.diagonal(a, axis1=1, axis2=2))
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def eigh3(m):
    """Ascending eigenvalues and eigenvector matrix of one Hermitian 3x3 matrix."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (3, 3):
        raise DomainError(f"eigh3 needs a 3x3 matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > 1e-9:
        raise DomainError("matrix is not Hermitian")
    w, v = eigh3_batch(m[None])
    return w[0], v[0]


def spectra_batch(amps: np.ndarray, with_vectors: bool = False):
    """Ascending RDM spectra, shape ``(N, 3, 3)``, for amplitudes ``(N, 3, 3, 3)``."""
    amps = np.asarray(amps, dtype=complex).reshape(-1, 3, 3, 3)
    n = amps.shape[0]
    mats = np.stack([rdm_batch(amps, ax) for ax in (1, 2, 3)], axis=1).reshape(-1, 3, 3)
    w, v = eigh3_batch(mats)
    w = w.reshape(n, 3, 3)
    if with_vectors:
        return w, v.reshape(n, 3, 3, 3)
    return w


def spectra(state: StateTensor) -> EPoint:
    return EPoint(spectra_batch(state.amps[None])[0])


@dataclass(frozen=True)
class LocalUnitary:
    axis: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_axis(self.axis)
        u = np.array(self.matrix, dtype=complex)
        if u.shape != (3, 3):
            raise DomainError("local unitary must be 3x3")
        if np.max(np.abs(u @ u.conj().T - np.eye(3))) > 1e-12:
            raise DomainError("matrix is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)


_APPLY_SUBSCRIPTS = {1: "ai,...ijk->...ajk", 2: "aj,...ijk->...iak", 3: "ak,...ijk->...ija"}


def apply_local_unitary(state: StateTensor, u: LocalUnitary) -> StateTensor:
    """Act with ``u`` on one qutrit: ``c'_{..a..} = Σ_i u_{ai} c_{..i..}``."""
    if not isinstance(u, LocalUnitary):
        u = LocalUnitary(*u)
    return StateTensor(np.einsum(_APPLY_SUBSCRIPTS[u.axis], u.matrix, state.amps))


def apply_local_unitaries_batch(amps: np.ndarray, mats: np.ndarray) -> np.ndarray:
    """Apply per-sample unitaries ``mats`` of shape ``(N, 3, 3, 3)`` (axis-major)."""
    out = np.einsum("nai,nijk->najk", mats[:, 0], amps)
    out = np.einsum("naj,nijk->niak", mats[:, 1], out)
    return np.einsum("nak,nijk->nija", mats[:, 2], out)


def canonicalize_batch(amps: np.ndarray):
    """Rotate each qutrit into its RDM eigenbasis; returns ``(amps, w, U)``.

    ``U[n, a]`` is the unitary applied on qutrit ``a+1`` (the conjugate
    transpose of the eigenvector matrix), ``w`` the ascending spectra.
    """
    amps = np.asarray(amps, dtype=complex).reshape(-1, 3, 3, 3)
    w, v = spectra_batch(amps, with_vectors=True)
    u = np.conj(np.swapaxes(v, -1, -2))
    return apply_local_unitaries_batch(amps, u), w, u


def canonicalize(state: StateTensor):
    """Return the state in the gauge where all three RDMs are diagonal and ascending,
    together with the three local unitaries that map the input onto it."""
    out, _, u = canonicalize_batch(state.amps[None])
    unitaries = tuple(LocalUnitary(a + 1, u[0, a]) for a in range(3))
    return StateTensor(out[0]), unitaries


def permute_axes(state: StateTensor, perm) -> StateTensor:
    """Relabel qutrits: old qutrit ``b`` becomes qutrit ``perm[b-1]``."""
    inv = invert_perm(check_perm(perm))
    return StateTensor(np.transpose(state.amps, [s - 1 for s in inv]))


def random_amplitudes(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` Haar-random normalized states, shape ``(n, 3, 3, 3)``."""
    z = rng.standard_normal((n, 27)) + 1j * rng.standard_normal((n, 27))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z.reshape(n, 3, 3, 3)


def random_state(seed) -> StateTensor:
    return StateTensor(random_amplitudes(np.random.default_rng(seed), 1)[0])


def random_unitary(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Haar-random 3x3 unitaries via QR of a complex Ginibre matrix."""
    shape = (3, 3) if n is None else (n, 3, 3)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]
