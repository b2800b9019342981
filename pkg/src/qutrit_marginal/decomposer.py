"""Convex-combination machinery: barycentric coordinates in a 6-simplex and a
small dense Phase-I simplex method for hull membership."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSimplexError, DomainError, NotInHullError
from .polytope import CornerPoint, EPoint

PIVOT_TOL = 1e-11
HULL_TOL = 1e-8
CLAMP_TOL = 1e-12


@dataclass
class BarycentricDecomposition:
    labels: list
    weights: np.ndarray

    def pairs(self):
        return list(zip(self.labels, (float(w) for w in self.weights)))

    def to_json(self) -> dict:
        return {"weights": [{"label": lab, "w": float(w)} for lab, w in zip(self.labels, self.weights)]}


def _points_and_labels(corners):
    pts, labels = [], []
    for n, c in enumerate(corners):
        if isinstance(c, CornerPoint):
            pts.append(c.point.lam)
            labels.append(c.label)
        elif isinstance(c, EPoint):
            pts.append(c.lam)
            labels.append(str(n))
        else:
            pts.append(np.asarray(c, dtype=float).reshape(3, 3))
            labels.append(str(n))
    return np.array(pts), labels


def _system(points: np.ndarray, x: EPoint):
    """Equality system ``M w = rhs``: six coordinates plus the weight-sum row."""
    m = np.vstack([points[:, :, :2].reshape(len(points), 6).T, np.ones(len(points))])
    rhs = np.concatenate([x.coords6(), [1.0]])
    return m, rhs


def reconstruct(points, weights) -> np.ndarray:
    return np.tensordot(np.asarray(weights), np.asarray(points), axes=1)


def solve_simplex_coords(corners, x: EPoint) -> BarycentricDecomposition:
    """Barycentric coordinates of ``x`` w.r.t. seven affinely independent corners.

    Negative weights are returned as-is; they signal that ``x`` is outside.
    """
    points, labels = _points_and_labels(corners)
    if len(points) != 7:
        raise DomainError(f"a 6-simplex needs 7 corners, got {len(points)}")
    m, rhs = _system(points, x)
    if np.linalg.matrix_rank(m, tol=1e-10) < 7:
        raise DegenerateSimplexError("corners are affinely dependent")
    return BarycentricDecomposition(labels, np.linalg.solve(m, rhs))


def phase_one(m: np.ndarray, rhs: np.ndarray, pivot_tol: float = PIVOT_TOL):
    """Find ``w >= 0`` with ``m w = rhs`` by the Phase-I simplex method (Bland's rule).

    Returns ``(w, infeasibility)`` where infeasibility is the optimal sum of
    artificial variables.
    """
    m = np.array(m, dtype=float)
    rhs = np.array(rhs, dtype=float)
    rows, cols = m.shape
    flip = rhs < 0
    m[flip] *= -1.0
    rhs[flip] *= -1.0
    # tableau: [m | I | rhs], basis starts on the artificials
    tab = np.hstack([m, np.eye(rows), rhs[:, None]])
    basis = list(range(cols, cols + rows))
    cost = np.zeros(cols + rows)
    cost[cols:] = 1.0
    for _ in range(50 * (cols + rows)):
        reduced = cost - cost[basis] @ tab[:, :-1]
        entering = next((j for j in range(cols + rows) if reduced[j] < -pivot_tol), None)
        if entering is None:
            break
        col = tab[:, entering]
        ratios = [
            (tab[r, -1] / col[r], basis[r], r) for r in range(rows) if col[r] > pivot_tol
        ]
        if not ratios:  # unbounded direction cannot occur in Phase I
            break
        best = min(q for q, _, _ in ratios)
        # Bland: among minimal ratios leave the smallest basic variable index
        _, _, pivot_row = min(
            ((q, b, r) for q, b, r in ratios if q <= best + pivot_tol), key=lambda t: t[1]
        )
        tab[pivot_row] /= tab[pivot_row, entering]
        for r in range(rows):
            if r != pivot_row and tab[r, entering] != 0.0:
                tab[r] -= tab[r, entering] * tab[pivot_row]
        basis[pivot_row] = entering
    w = np.zeros(cols + rows)
    for r, b in enumerate(basis):
        w[b] = tab[r, -1]
    infeasibility = float(w[cols:].sum())
    x = w[:cols]
    # polish the basic solution against the original system
    basic = [b for b in basis if b < cols]
    if basic:
        sol, *_ = np.linalg.lstsq(m[:, basic], rhs, rcond=None)
        if np.all(sol >= -CLAMP_TOL):
            x = np.zeros(cols)
            x[basic] = sol
    return np.maximum(x, 0.0), infeasibility


def lp_decompose(corners, x: EPoint, tol: float = HULL_TOL) -> BarycentricDecomposition:
    """Express ``x`` as a convex combination of ``corners`` (any feasible weights)."""
    points, labels = _points_and_labels(corners)
    if len(points) == 0:
        raise DomainError("no corners given")
    m, rhs = _system(points, x)
    w, infeas = phase_one(m, rhs)
    residual = float(np.max(np.abs(m @ w - rhs)))
    if infeas > tol or residual > tol:
        raise NotInHullError(
            f"point is not in the convex hull (residual {max(infeas, residual):.3g})",
            residual=max(infeas, residual),
        )
    w = np.where(w < CLAMP_TOL, 0.0, w)
    w /= w.sum()
    return BarycentricDecomposition(labels, w)


def in_hull(corners, x: EPoint, tol: float = HULL_TOL) -> bool:
    try:
        lp_decompose(corners, x, tol)
    except NotInHullError:
        return False
    return True
