"""Acceptance criteria, one test each, at the stated sizes and tolerances.

Each test records a one-line verdict; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""
import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np

from qutrit_marginal import verifier as V
from qutrit_marginal.decomposer import in_hull
from qutrit_marginal.polytope import (
    PERMS,
    SPEC_A,
    SPEC_B,
    SPEC_O,
    Functional,
    corner,
    corner_points,
    eval_functional,
    membership,
)

RESULTS = {}
GRID = V.grid_sample(10_000, seed=2024)


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def test_01_necessity():
    t = time.perf_counter()
    rep = V.necessity_sweep(100_000, seed=1)
    dt = time.perf_counter() - t
    ok = rep.failures == 0 and rep.min_slack_overall >= -1e-10 and dt < 60
    record(1, ok, f"10^5 states, failures={rep.failures}, min slack={rep.min_slack_overall:.3e}, {dt:.1f}s")


def test_02_round_trip():
    t = time.perf_counter()
    rep = V.round_trip_suite(n=1000, seed=2)
    dt = time.perf_counter() - t
    worst = max(g["max_residual"] for g in rep["groups"].values())
    sizes = "/".join(str(g["points"]) for g in rep["groups"].values())
    record(2, rep["pass"] and dt < 120, f"corners/barycenters/interior={sizes}, max residual={worst:.2e}, {dt:.1f}s")


def test_03_exclusions():
    corners = corner_points()
    bad = 0
    for rows in [(SPEC_O, SPEC_O, SPEC_A), (SPEC_O, SPEC_O, SPEC_B), (SPEC_O, SPEC_A, SPEC_B)]:
        for p in PERMS:
            x = corner(*rows).permuted(p).point
            bad += membership(x).member or in_hull(corners, x)
    record(3, bad == 0, f"18 permuted exclusions, accepted by either test: {bad}")


def test_04_facets():
    rep = V.facet_suite()
    failed = [d["facet"] for d in rep["details"] if not d["pass"]]
    record(4, rep["pass"], f"{rep['facets']} facets, exact equality + rank 5 + omission hyperplanes, failed={failed}")


def test_05_functional_values():
    q, y, x = (F(1, 4), F(1, 4), F(1, 2)), (F(0), F(1, 4), F(3, 4)), (F(0), F(1, 3), F(2, 3))
    got = (
        eval_functional(Functional("P8"), corner(SPEC_A, q, y).exact),
        eval_functional(Functional("tildeP9"), corner(SPEC_B, x, x).exact),
        eval_functional(Functional("Q3"), corner(SPEC_A, SPEC_A, SPEC_A).exact),
    )
    record(5, got == (F(-1, 4), F(-1, 3), F(-1, 2)), f"P8, tildeP9, Q3 = {', '.join(map(str, got))}")


def test_06_tightness():
    t = time.perf_counter()
    rep = V.tightness_suite(restarts=64, seed=6)
    dt = time.perf_counter() - t
    vals = [r["best_value"] for r in rep["results"]]
    record(6, rep["pass"] and dt < 600,
           f"30 functionals x 64 restarts, best in [{min(vals):.2e}, {max(vals):.2e}], {dt:.1f}s")


def test_07_qubit_slice():
    rep = V.qubit_check(60)
    record(7, rep["disagreements"] == 0, f"{rep['points']} slice points, disagreements={rep['disagreements']}")


def test_08_hv_equivalence():
    rep = V.hv_check(GRID, tol=1e-9)
    record(8, rep["disagreements"] == 0,
           f"{rep['points']} grid points ({rep['members']} members), disagreements={rep['disagreements']}")


def test_09_redundancy():
    rep = V.redundancy_check(GRID)
    record(9, rep["counterexamples"] == 0,
           f"{rep['points']} grid points, premise holds on {rep['premise_holds']}, counterexamples={rep['counterexamples']}")


def test_10_determinism():
    cmd = [sys.executable, "-m", "qutrit_marginal", "verify", "--suite", "all", "--seed", "42"]
    outs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
    same = outs[0].stdout == outs[1].stdout and len(outs[0].stdout) > 0
    record(10, same and outs[0].returncode == 0,
           f"two runs, {len(outs[0].stdout)} bytes, identical={same}, exit={outs[0].returncode}")


if __name__ == "__main__":
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_")):
        try:
            fn()
        except AssertionError:
            pass
