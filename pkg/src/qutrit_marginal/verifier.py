"""Empirical checks of the feasibility criterion.

Necessity is probed with Haar-random states, tightness by minimizing the
boundary functionals over states, sufficiency by round-tripping targets
through :func:`~qutrit_marginal.constructor.construct`. All runs are seeded
and reports contain no timing data, so output is reproducible.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._descent import descend, linear_objective
from .constructor import construct
from .decomposer import in_hull
from .polytope import (
    ALL_INEQUALITIES,
    INEQUALITY_FORMS,
    PERMS,
    EPoint,
    Functional,
    InequalityId,
    all_slacks,
    corner_points,
    facet_simplices,
    membership_batch,
    perm_str,
    simplex_violations_batch,
)
from .tensor_core import StateTensor, random_amplitudes, spectra_batch

CHUNK = 10_000
TIGHT_FUNCTIONALS = ("P1", "P4", "P5", "P6", "P7")


@dataclass
class SweepReport:
    samples: int
    min_slack_overall: float
    worst_inequality: InequalityId
    failures: int

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "min_slack_overall": self.min_slack_overall,
            "worst_inequality": str(self.worst_inequality),
            "failures": self.failures,
        }


def necessity_sweep(n: int, seed=0, tol: float = 1e-10) -> SweepReport:
    """Check membership for the spectra of ``n`` Haar-random states."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    best, worst, failures = np.inf, ALL_INEQUALITIES[0], 0
    for start in range(0, n, CHUNK):
        m = min(CHUNK, n - start)
        lam = spectra_batch(random_amplitudes(rng, m))
        slacks = all_slacks(lam)
        failures += int(np.sum(np.minimum(slacks.min(axis=1), simplex_violations_batch(lam).min(axis=1)) < -tol))
        j = np.unravel_index(np.argmin(slacks), slacks.shape)
        if slacks[j] < best:
            best, worst = float(slacks[j]), ALL_INEQUALITIES[j[1]]
    return SweepReport(n, best, worst, failures)


@dataclass
class MinimizationReport:
    functional: Functional
    best_value: float
    best_state: StateTensor
    restarts: int

    def to_json(self, with_state: bool = True) -> dict:
        out = {
            "functional": str(self.functional),
            "best_value": self.best_value,
            "restarts": self.restarts,
        }
        if with_state:
            out["best_state"] = self.best_state.to_json()
        return out


def minimize_functional(f: Functional, restarts: int = 64, seed=0, max_iters: int = 500):
    """Projected-gradient minimization of ``f(spectra(state))`` over unit states."""
    form = f.form
    rng = np.random.default_rng(seed)
    amps, values, _ = descend(
        random_amplitudes(rng, restarts), linear_objective(form.matrix(f.perm), form.const),
        rng, max_iters=max_iters,
    )
    best = int(np.argmin(values))
    return MinimizationReport(f, float(values[best]), StateTensor(amps[best]), restarts)


# ---------------------------------------------------------------------------
# point sets


def sample_interior(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` member E-points by rejection from the box ``[0,1/3] x [0,1/2]`` per qutrit."""
    out, have = [], 0
    while have < n:
        l1 = rng.uniform(0.0, 1 / 3, (4 * n + 64, 3))
        l2 = rng.uniform(0.0, 0.5, (4 * n + 64, 3))
        lam = np.stack([l1, l2, 1.0 - l1 - l2], axis=-1)
        ok = np.all((l1 <= l2) & (l2 <= lam[..., 2]), axis=1)
        lam = lam[ok]
        lam = lam[membership_batch(lam)[0]]
        out.append(lam)
        have += len(lam)
    return np.concatenate(out)[:n]


def ordered_spectra(den: int) -> np.ndarray:
    """All ascending spectra with entries in ``(1/den) Z``."""
    rows = [(i, j, den - i - j) for i in range(den + 1) for j in range(i, den + 1) if den - i - j >= j]
    return np.array(rows, dtype=float) / den


def grid_sample(n: int, seed=0, den: int = 24) -> np.ndarray:
    """``n`` distinct points of the grid of triples of ascending spectra (step ``1/den``)."""
    spec = ordered_spectra(den)
    m = len(spec)
    rng = np.random.default_rng(seed)
    flat = rng.choice(m**3, size=min(n, m**3), replace=False)
    flat.sort()
    i, j, k = np.unravel_index(flat, (m, m, m))
    return np.stack([spec[i], spec[j], spec[k]], axis=1)


def qubit_slice(den: int = 60) -> np.ndarray:
    """All grid points with ``λ1 = 0`` on every qutrit."""
    spec = ordered_spectra(den)
    spec = spec[spec[:, 0] == 0.0]
    return np.array([np.stack(t) for t in itertools.product(spec, repeat=3)])


# ---------------------------------------------------------------------------
# suites


def qubit_check(den: int = 60) -> dict:
    pts = qubit_slice(den)
    member = membership_batch(pts)[0]
    l2 = pts[:, :, 1]
    tri = np.ones(len(pts), dtype=bool)
    for a in range(3):
        b, c = [q for q in range(3) if q != a]
        tri &= l2[:, a] <= l2[:, b] + l2[:, c] + 1e-12
    return {"points": len(pts), "disagreements": int(np.sum(member != tri)), "members": int(member.sum())}


def hv_check(points: np.ndarray, tol: float = 1e-9) -> dict:
    corners = corner_points()
    member = membership_batch(points, tol)[0]
    dis = 0
    for lam, m in zip(points, member):
        dis += int(in_hull(corners, EPoint(lam), tol) != bool(m))
    return {"points": len(points), "members": int(member.sum()), "disagreements": dis}


def _family_slacks(points, families):
    lam = np.asarray(points).reshape(-1, 9)
    cols = [INEQUALITY_FORMS[k].matrix(p).reshape(9) for k in families for p in PERMS]
    return lam @ np.array(cols).T


def redundancy_check(points: np.ndarray, tol: float = 1e-10) -> dict:
    """Families 1, 4, 5 and 8 together should imply 2, 3, 6 and 7."""
    premise = np.all(_family_slacks(points, (1, 4, 5, 8)) >= -tol, axis=1)
    premise &= np.all(simplex_violations_batch(points) >= -tol, axis=1)
    implied = np.all(_family_slacks(points, (2, 3, 6, 7)) >= -tol, axis=1)
    return {
        "points": len(points),
        "premise_holds": int(premise.sum()),
        "counterexamples": int(np.sum(premise & ~implied)),
    }


def _rank_exact(rows) -> int:
    m = [list(r) for r in rows]
    rank, ncol = 0, len(m[0]) if m else 0
    for col in range(ncol):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                fac = m[r][col] / m[rank][col]
                m[r] = [a - fac * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def _coords6(rows):
    return [v for r in rows for v in r[:2]]


def facet_suite() -> dict:
    """Exact equalities, affine rank 5 (exact and float), and the opposite hyperplanes."""
    results = []
    for spec in facet_simplices():
        exact = [c.exact for c in spec.corners]
        form = INEQUALITY_FORMS[spec.id.family]
        eq_ok = all(form.evaluate(rows, spec.id.perm) == 0 for rows in exact)
        base = _coords6(exact[0])
        diffs = [[a - b for a, b in zip(_coords6(rows), base)] for rows in exact[1:]]
        rank_exact = _rank_exact(diffs)
        rank_float = int(np.linalg.matrix_rank(np.array(diffs, dtype=float), tol=1e-9))
        planes_ok = True
        for n, plane in enumerate(spec.boundaries):
            rest = [plane.value(rows) for m, rows in enumerate(exact) if m != n]
            planes_ok &= all(v == 0 for v in rest) and plane.value(exact[n]) != 0
        passed = eq_ok and rank_exact == 5 and rank_float == 5 and planes_ok
        results.append({
            "facet": str(spec.id), "equality": eq_ok, "rank_exact": rank_exact,
            "rank_float": rank_float, "hyperplanes": bool(planes_ok), "pass": bool(passed),
        })
    return {"facets": len(results), "pass": all(r["pass"] for r in results), "details": results}


def _facet_barycenters():
    out = []
    for spec in facet_simplices():
        rows = [[sum(c.exact[q][i] for c in spec.corners) / 6 for i in range(3)] for q in range(3)]
        out.append((f"barycenter {spec.id}", EPoint(np.array(rows, dtype=float))))
    return out


def round_trip_suite(n: int = 1000, seed=0, tol: float = 1e-8) -> dict:
    """Construct witnesses for corners, facet barycenters and ``n`` interior points."""
    groups = {
        "corners": [(c.label, c.point) for c in corner_points()],
        "barycenters": _facet_barycenters(),
        "interior": [(str(m), EPoint(lam)) for m, lam in enumerate(sample_interior(n, np.random.default_rng(seed)))],
    }
    summary = {}
    for name, items in groups.items():
        worst, failures, regions = 0.0, [], {}
        for label, x in items:
            try:
                _, trace = construct(x)
            except Exception as exc:  # reported, not raised
                failures.append({"point": label, "error": f"{type(exc).__name__}: {exc}"})
                continue
            regions[trace.region] = regions.get(trace.region, 0) + 1
            worst = max(worst, trace.residual)
            if not trace.residual < tol:
                failures.append({"point": label, "residual": trace.residual})
        summary[name] = {
            "points": len(items), "max_residual": worst, "failures": failures,
            "regions": dict(sorted(regions.items())),
        }
    return {"pass": all(not g["failures"] for g in summary.values()), "groups": summary}


def tightness_suite(restarts: int = 64, seed=0, max_iters: int = 500,
                    lo: float = -1e-6, hi: float = 1e-3) -> dict:
    rows = []
    for n, (tag, perm) in enumerate(itertools.product(TIGHT_FUNCTIONALS, PERMS)):
        rep = minimize_functional(Functional(tag, perm), restarts, seed=[seed, n], max_iters=max_iters)
        rows.append({"functional": f"{tag}({perm_str(perm)})", "best_value": rep.best_value,
                     "pass": bool(lo <= rep.best_value <= hi)})
    return {"pass": all(r["pass"] for r in rows), "results": rows}


def run_suites(suite: str = "all", seed=0, necessity_n: int = 100_000, interior_n: int = 1000) -> dict:
    """Aggregate report for ``facets``, ``roundtrip``, ``necessity`` or ``all``."""
    names = ("facets", "roundtrip", "necessity") if suite == "all" else (suite,)
    out = {"seed": seed, "suites": {}}
    for name in names:
        if name == "facets":
            rep = facet_suite()
        elif name == "roundtrip":
            rep = round_trip_suite(interior_n, seed)
        elif name == "necessity":
            sweep = necessity_sweep(necessity_n, seed)
            rep = dict(sweep.to_json(), **{"pass": sweep.failures == 0})
        else:
            raise ValueError(f"unknown suite {name!r}")
        out["suites"][name] = rep
    out["pass"] = all(r["pass"] for r in out["suites"].values())
    return out


__all__ = [
    "SweepReport", "MinimizationReport", "necessity_sweep", "minimize_functional",
    "sample_interior", "grid_sample", "qubit_slice", "qubit_check", "hv_check",
    "redundancy_check", "facet_suite", "round_trip_suite", "tightness_suite", "run_suites",
]
