"""Batched projected-gradient descent of spectral objectives on the unit sphere.

The objective sees only the sorted RDM spectra. In the gauge where all three
RDMs are diagonal and ascending, the first-order change of ``λ_i^(a)`` under a
perturbation ``δc`` is ``2 Re Σ conj(c) δc`` restricted to index ``i`` on
qutrit ``a``, so the Euclidean gradient of ``F(λ)`` is ``2 L_ijk c_ijk`` with
``L_ijk = ∂F/∂λ_i^(1) + ∂F/∂λ_j^(2) + ∂F/∂λ_k^(3)``.
"""
from __future__ import annotations

import numpy as np

from .tensor_core import canonicalize_batch

STEP0 = 0.1
SHRINK = 0.5
MAX_HALVINGS = 40
ARMIJO_C = 1e-4
GAP_TOL = 1e-9
KICK = 1e-6


def _levels(dlam):
    return dlam[:, 0, :, None, None] + dlam[:, 1, None, :, None] + dlam[:, 2, None, None, :]


def _tangent_grad(c, dlam):
    grad = 2.0 * _levels(dlam) * c
    radial = np.real(np.sum(np.conj(c) * grad, axis=(1, 2, 3)))
    return grad - radial[:, None, None, None] * c


def _normalize(c):
    return c / np.sqrt(np.sum(np.abs(c) ** 2, axis=(1, 2, 3)))[:, None, None, None]


def _min_gap(w):
    return np.min(np.diff(w, axis=2), axis=(1, 2))


def descend(amps0, objective, rng, max_iters=1000, gtol=1e-10):
    """Minimize ``objective`` from each start in ``amps0`` (shape ``(N, 3, 3, 3)``).

    ``objective(w)`` maps spectra ``(M, 3, 3)`` to ``(values (M,), dF/dλ (M, 3, 3))``.
    Returns ``(amps, values, spectra)`` of the best iterate per start.
    """
    c, w, _ = canonicalize_batch(amps0)
    f, g = objective(w)
    best_c, best_f, best_w = c.copy(), f.copy(), w.copy()
    active = np.ones(len(c), dtype=bool)
    for _ in range(max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        grad = _tangent_grad(c[idx], g[idx])
        gn2 = np.sum(np.abs(grad) ** 2, axis=(1, 2, 3))
        small = gn2 < gtol * gtol
        active[idx[small]] = False
        keep = ~small
        idx, grad, gn2 = idx[keep], grad[keep], gn2[keep]
        step = np.full(idx.size, STEP0)
        pending = np.ones(idx.size, dtype=bool)
        for _h in range(MAX_HALVINGS + 1):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            trial = _normalize(c[idx[p]] - step[p, None, None, None] * grad[p])
            ct, wt, _ = canonicalize_batch(trial)
            ft, gt = objective(wt)
            ok = ft <= f[idx[p]] - ARMIJO_C * step[p] * gn2[p]
            acc = idx[p[ok]]
            c[acc], w[acc], f[acc], g[acc] = ct[ok], wt[ok], ft[ok], gt[ok]
            pending[p[ok]] = False
            step[p[~ok]] *= SHRINK
        stalled = idx[pending]
        if stalled.size:
            degenerate = _min_gap(w[stalled]) < GAP_TOL
            active[stalled[~degenerate]] = False
            kick = stalled[degenerate]
            if kick.size:
                z = rng.standard_normal(c[kick].shape) + 1j * rng.standard_normal(c[kick].shape)
                ck, wk, _ = canonicalize_batch(_normalize(c[kick] + KICK * z))
                fk, gk = objective(wk)
                c[kick], w[kick], f[kick], g[kick] = ck, wk, fk, gk
        better = f < best_f
        best_c[better], best_f[better], best_w[better] = c[better], f[better], w[better]
    better = f < best_f
    best_c[better], best_f[better], best_w[better] = c[better], f[better], w[better]
    return best_c, best_f, best_w


def linear_objective(matrix, const=0.0):
    """Objective ``Σ M·λ + const`` for a fixed ``(3, 3)`` coefficient matrix."""
    m = np.asarray(matrix, dtype=float)

    def obj(w):
        return np.einsum("nai,ai->n", w, m) + const, np.broadcast_to(m, w.shape).copy()

    return obj


def least_squares_objective(target):
    t = np.asarray(target, dtype=float)

    def obj(w):
        d = w - t
        return np.sum(d * d, axis=(1, 2)), 2.0 * d

    return obj
