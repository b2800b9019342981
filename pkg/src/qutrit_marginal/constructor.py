"""Explicit witness states for feasible E-points.

The feasible set is cut into pieces, each covered by a parametrized family of
states whose RDMs are diagonal by design:

* ``S0``: a seven-parameter family with rotated blocks (any point in the hull
  of nine corner orbits).
* ``P1``-boundary family, optionally with an extra ``c_322`` amplitude (the
  simplex ``D2``).
* the nine-amplitude family behind the simplices ``C1`` and ``C3``.
* support simplices whose index triples never share two coordinates, so the
  spectra are affine in ``|c_ijk|^2`` (``D1``, ``D3`` and ``S6^(a)``).

:func:`construct` picks the piece by the sign of a few linear functionals,
after moving the target into a canonical qutrit ordering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._descent import descend, least_squares_objective
from .decomposer import lp_decompose, solve_simplex_coords
from .errors import InfeasibleError, NotInHullError, RangeError, RegionError
from .polytope import (
    PERMS,
    CornerPoint,
    EPoint,
    Functional,
    eval_functional,
    invert_perm,
    membership,
    permute_exact,
)
from .polytope import SPEC_A as A
from .polytope import SPEC_B as B
from .polytope import SPEC_O as O
from .polytope import SPEC_W as W
from .polytope import SPEC_X as X
from .polytope import SPEC_Y as Y
from .polytope import SPEC_Z as Z
from .tensor_core import StateTensor, permute_axes, random_amplitudes, spectra

TOL = 1e-10
ANGLE_TOL = 1e-12


@dataclass
class ConstructionTrace:
    region: str
    perm: tuple
    params: dict = field(default_factory=dict)
    residual: float = float("nan")

    def to_json(self) -> dict:
        return {
            "region": self.region,
            "perm": list(self.perm),
            "residual": float(self.residual),
            "params": _jsonable(self.params),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _residual(state: StateTensor, x: EPoint) -> float:
    return float(np.max(np.abs(spectra(state).lam - x.lam)))


def _sqrt(v: float) -> float:
    return math.sqrt(max(v, 0.0))


def _corner(rows) -> CornerPoint:
    return CornerPoint.from_exact(rows)


# ---------------------------------------------------------------------------
# Angle pairs


def solve_angle_pair(u: float, v: float, f_target: float, tol: float = ANGLE_TOL):
    """Angles with ``u sin2θ = v sin2φ`` and ``u cos2θ + v cos2φ = f_target``.

    Works with the two planar vectors ``u e^{2iθ}`` and ``v e^{-2iφ}``, which
    must add up to the real number ``f_target``.
    """
    au, av, af = abs(u), abs(v), abs(f_target)
    if af > au + av + tol or af < abs(au - av) - tol:
        raise RangeError(
            f"f={f_target!r} outside attainable range [{abs(au - av)!r}, {au + av!r}]"
        )
    if au <= tol and av <= tol:
        return 0.0, 0.0
    if af <= tol:
        # u e^{2iθ} = -v e^{-2iφ}: take the perpendicular pair
        big_u = 1j * au
    else:
        re = (f_target**2 + u * u - v * v) / (2.0 * f_target)
        re = min(max(re, -au), au)
        # au^2 - re^2 in factored form, exact when the triangle degenerates
        im2 = ((av + au - f_target) * (av - au + f_target)
               * (f_target + au - av) * (f_target + au + av)) / (4.0 * f_target**2)
        big_u = complex(re, math.sqrt(max(im2, 0.0)))
    big_v = f_target - big_u
    theta = 0.5 * math.atan2(big_u.imag, big_u.real) if au > tol else 0.0
    if u < 0:
        theta += math.pi / 2
    if av > tol:
        phi = -0.5 * math.atan2(big_v.imag, big_v.real)
        if v < 0:
            phi += math.pi / 2
    else:
        phi = 0.0
    return theta, phi


# ---------------------------------------------------------------------------
# S0 family

_S0_BASE = (
    ((B, B, B), dict(a=1 / 4, b=1 / 6, c=1 / 6, d=1 / 6, f=1 / 12, g=1 / 12, h=1 / 12)),
    ((B, A, A), dict(a=1 / 3, b=1 / 3, c=1 / 6, d=1 / 6)),
    ((A, B, B), dict(a=1 / 3, b=1 / 12, c=1 / 4, d=1 / 4, f=1 / 12)),
    ((O, B, B), dict(a=1 / 3, b=1 / 3, f=1 / 3)),
    ((A, A, A), dict(a=1 / 4, b=1 / 4, c=1 / 4, d=1 / 4)),
    ((O, A, A), dict(a=1 / 2, b=1 / 2)),
    ((O, O, O), dict(a=1.0)),
    ((A, B, W), dict(a=1 / 3, d=1 / 3, c=1 / 6, f=1 / 6)),
    ((A, Z, Y), dict(a=1 / 2, c=1 / 4, d=1 / 4)),
)
_PER_QUTRIT = (("b", "f"), ("c", "g"), ("d", "h"))


def _permute_s0_params(params: dict, perm) -> dict:
    out = {"a": params.get("a", 0.0)}
    for q in range(3):
        dst = perm[q] - 1
        out[_PER_QUTRIT[dst][0]] = params.get(_PER_QUTRIT[q][0], 0.0)
        out[_PER_QUTRIT[dst][1]] = params.get(_PER_QUTRIT[q][1], 0.0)
    return out


def _s0_table():
    seen, corners, params = set(), [], []
    for rows, p in _S0_BASE:
        for perm in PERMS:
            img = permute_exact(rows, perm)
            if img in seen:
                continue
            seen.add(img)
            corners.append(_corner(img))
            params.append(_permute_s0_params(p, perm))
    return corners, params


S0_CORNERS, S0_PARAMS = _s0_table()
_S0_BY_LABEL = {c.label: p for c, p in zip(S0_CORNERS, S0_PARAMS)}


def s0_state(params: dict, x: EPoint) -> StateTensor:
    """Assemble the S0-family state with squared parameters ``params`` matching ``x``."""
    sq = {k: max(params.get(k, 0.0), 0.0) for k in "abcdfgh"}
    beta = (sq["b"], sq["c"], sq["d"])
    phi_sq = (sq["f"], sq["g"], sq["h"])
    angles = []
    for q in range(3):
        others = sum(phi_sq) - phi_sq[q]
        u = sq["a"] + phi_sq[q] - others
        delta = x.lam[q, 2] - x.lam[q, 0]
        if u < -TOL:
            raise RegionError("S0 sign condition violated")
        try:
            t1, t2 = solve_angle_pair(u, beta[q], delta, tol=1e-9)
        except RangeError as exc:
            raise RegionError(f"S0 angle range violated on qutrit {q + 1}: {exc}") from exc
        angles.append((t1, -t2))
    (th1, th2), (ph1, ph2), (ch1, ch2) = angles
    amp = {k: _sqrt(v) for k, v in sq.items()}
    c = np.zeros((3, 3, 3))
    i3, i1, i2 = 2, 0, 1
    ct, st = math.cos(th1), math.sin(th1)
    # rotated block on the first qutrit: (index 3, index 1) pairs
    c[i3, i3, i3], c[i1, i3, i3] = amp["a"] * ct, amp["a"] * st
    c[i3, i3, i1], c[i1, i3, i1] = -amp["g"] * st, amp["g"] * ct
    c[i3, i1, i3], c[i1, i1, i3] = -amp["h"] * st, amp["h"] * ct
    c[i3, i1, i1], c[i1, i1, i1] = amp["f"] * ct, amp["f"] * st
    cp, sp = math.cos(ph1), math.sin(ph1)
    for i in (i1, i3):
        for k in (i1, i3):
            b3, b1 = c[i, i3, k], c[i, i1, k]
            c[i, i3, k], c[i, i1, k] = cp * b3 - sp * b1, sp * b3 + cp * b1
    cc, sc = math.cos(ch1), math.sin(ch1)
    for i in (i1, i3):
        for j in (i1, i3):
            d3, d1 = c[i, j, i3], c[i, j, i1]
            c[i, j, i3], c[i, j, i1] = cc * d3 - sc * d1, sc * d3 + cc * d1
    c[i3, i2, i2], c[i1, i2, i2] = amp["b"] * math.cos(th2), amp["b"] * math.sin(th2)
    c[i2, i3, i2], c[i2, i1, i2] = amp["c"] * math.cos(ph2), amp["c"] * math.sin(ph2)
    c[i2, i2, i3], c[i2, i2, i1] = amp["d"] * math.cos(ch2), amp["d"] * math.sin(ch2)
    return StateTensor(c.astype(complex))


def build_s0(x: EPoint, weights: dict | None = None):
    """Witness from the S0 family; ``weights`` maps S0 corner labels to convex weights."""
    if weights is None:
        try:
            dec = lp_decompose(S0_CORNERS, x)
        except NotInHullError as exc:
            raise RegionError("E-point is outside S0") from exc
        weights = dict(dec.pairs())
    params = {k: 0.0 for k in "abcdfgh"}
    for label, w in weights.items():
        if w == 0.0:
            continue
        for k, v in _S0_BY_LABEL[label].items():
            params[k] += w * v
    state = s0_state(params, x)
    trace = ConstructionTrace("S0", (1, 2, 3), dict(params), _residual(state, x))
    return state, trace


# ---------------------------------------------------------------------------
# P1 boundary family (optionally with c_322)


def p1_boundary_params(x: EPoint, with_c322: bool) -> dict:
    lam = x.lam
    p1 = lam[1, 0] + lam[1, 1] + lam[2, 0] + lam[2, 1] - lam[0, 0] - lam[0, 1]
    if with_c322:
        t = 0.5 * p1
    else:
        if abs(p1) > 1e-9:
            raise RegionError(f"E-point is off the P1 = 0 boundary (P1 = {p1:.3g})")
        t = 0.0
    params = dict(
        a=lam[1, 0], b=lam[1, 1] - t, d=lam[2, 0], f=lam[2, 1] - t, g=lam[0, 2] - t, c322=t
    )
    if min(params.values()) < -1e-9:
        raise RegionError("negative squared amplitude in the P1-boundary family")
    return params


def build_p1_boundary(x: EPoint, with_c322: bool = False):
    sq = p1_boundary_params(x, with_c322)
    u, v = sq["b"] - sq["a"], sq["f"] - sq["d"]
    delta = x.lam[0, 1] - x.lam[0, 0]
    try:
        theta, phi = solve_angle_pair(u, v, delta, tol=1e-9)
    except RangeError as exc:
        raise RegionError(f"P1-boundary range violated: {exc}") from exc
    a, b, d, f, g, t = (_sqrt(sq[k]) for k in ("a", "b", "d", "f", "g", "c322"))
    ct, st, cf, sf = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    c = np.zeros((3, 3, 3))
    c[0, 0, 2], c[1, 0, 2] = a * ct, a * st
    c[0, 1, 2], c[1, 1, 2] = -b * st, b * ct
    c[0, 2, 0], c[1, 2, 0] = d * cf, -d * sf
    c[0, 2, 1], c[1, 2, 1] = f * sf, f * cf
    c[2, 2, 2] = g
    c[2, 1, 1] = t
    state = StateTensor(c.astype(complex))
    params = dict(sq, theta=theta, phi=phi)
    region = "D2" if with_c322 else "P1-boundary"
    return state, ConstructionTrace(region, (1, 2, 3), params, _residual(state, x))


# ---------------------------------------------------------------------------
# Nine-amplitude family (r, a, f, g, p, q; angles theta, phi, alpha)

# Lemma-frame qutrit -> (real qutrit, real spectral indices playing λ1, λ2, λ3)
RELABEL_IDENTITY = ((1, (1, 2, 3)), (2, (1, 2, 3)), (3, (1, 2, 3)))
RELABEL_C1 = ((1, (2, 3, 1)), (2, (2, 3, 1)), (3, (1, 2, 3)))
RELABEL_C3 = ((2, (1, 3, 2)), (3, (1, 2, 3)), (1, (1, 3, 2)))


def l28_frame(x: EPoint, relabel) -> np.ndarray:
    """Target eigenvalues rearranged into the family's own frame (rows: frame qutrits)."""
    return np.array([[x.lam[q - 1, i - 1] for i in idx] for q, idx in relabel])


def l28_scalars(lf: np.ndarray) -> dict:
    r2 = lf[1, 0] + lf[1, 1] + lf[2, 0] + lf[2, 1] - lf[0, 0] - lf[0, 1]
    a2 = lf[0, 0] + lf[0, 1] - lf[1, 0] - lf[1, 1] - lf[2, 0]
    s2 = lf[0, 0] + lf[0, 1] - lf[2, 0] - lf[2, 1]
    return dict(r2=r2, a2=a2, s2=s2, f2=lf[2, 0], g2=lf[0, 2])


def _bisect(fn, lo, hi, tol=1e-12, max_iter=200):
    flo = fn(lo)
    if flo == 0.0:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0 or hi - lo < tol:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_l28(x: EPoint, relabel=RELABEL_IDENTITY, tol: float = 1e-9):
    lf = l28_frame(x, relabel)
    sc = l28_scalars(lf)
    r2, a2, s2, f2, g2 = (sc[k] for k in ("r2", "a2", "s2", "f2", "g2"))
    l1, l2 = lf[1, 0], lf[1, 1]
    delta = lf[0, 1] - lf[0, 0]
    margin = a2 - f2 - 2 * r2
    checks = {
        "r2>=0": r2, "a2>=0": a2, "s2>=0": s2, "f2>=0": f2, "g2>=0": g2,
        "l1>=r2": l1 - r2, "l2>=l1": l2 - l1, "s2>=l2": s2 - l2, "a2-f2-2r2>=0": margin,
        "window_low": delta - abs(margin - (l2 - l1)), "window_high": margin + (l2 - l1) - delta,
    }
    bad = {k: v for k, v in checks.items() if v < -tol}
    if bad:
        raise RegionError(f"nine-amplitude family window violated: {bad}")
    r2, a2, s2, f2, g2 = (max(v, 0.0) for v in (r2, a2, s2, f2, g2))
    l2 = max(l2, l1)
    target = delta * delta
    if l1 - r2 <= tol or s2 - l2 <= 0.0:
        # degenerate end: p = 0, q^2 = s^2 and sin^2(theta+phi) is free
        q2, p2 = s2, 0.0
        w = r2 + f2 - a2
        denom = 4.0 * w * q2
        sin2 = 0.0 if abs(denom) < 1e-300 else (target - (w - q2) ** 2) / denom
    else:
        def excess(q2):
            p2 = s2 - q2
            w = r2 + f2 - a2 - p2
            return (w - q2) ** 2 + 4.0 * w * (l1 * l2 - q2 * r2) / p2 - target

        q2 = _bisect(excess, l1, l2)
        p2 = s2 - q2
        sin2 = (l1 * l2 - q2 * r2) / (p2 * q2)
    sin2 = min(max(sin2, 0.0), 1.0)
    w = r2 + f2 - a2 - p2
    try:
        theta, phi_shift = solve_angle_pair(w, q2, delta, tol=1e-9)
    except RangeError as exc:
        raise RegionError(f"nine-amplitude family angle range violated: {exc}") from exc
    phi = phi_shift - math.pi / 2
    if abs(w) <= 1e-12 or q2 <= 1e-12:
        # the angle pair leaves theta + phi free; pin it to the required value
        s_target = math.asin(math.sqrt(sin2))
        if abs(w) <= 1e-12:
            theta = s_target - phi
        else:
            phi = s_target - theta
    cos_sum = math.cos(theta + phi)
    a, f, g, p, q, r = (_sqrt(v) for v in (a2, f2, g2, p2, q2, r2))
    alpha = 0.5 * math.atan2(2.0 * p * q * cos_sum, r2 + p2 - q2)
    ct, st, cf, sf = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    ca, sa = math.cos(alpha), math.sin(alpha)
    c = np.zeros((3, 3, 3))

    def put(i, j, k, v):
        c[i - 1, j - 1, k - 1] = v

    put(1, 3, 2, a * ct)
    put(2, 3, 2, -a * st)
    put(1, 1, 2, r * sa * st)
    put(2, 1, 2, r * sa * ct)
    put(1, 2, 2, r * ca * st)
    put(2, 2, 2, r * ca * ct)
    put(1, 3, 1, f * st)
    put(2, 3, 1, f * ct)
    put(1, 1, 3, p * sa * ct - q * ca * cf)
    put(2, 1, 3, -p * sa * st - q * ca * sf)
    put(1, 2, 3, p * ca * ct + q * sa * cf)
    put(2, 2, 3, -p * ca * st + q * sa * sf)
    put(3, 3, 3, g)
    frame_state = StateTensor(c.astype(complex))
    to_real = tuple(q_ for q_, _ in relabel)
    state = permute_axes(frame_state, to_real)
    params = dict(a2=a2, f2=f2, g2=g2, p2=p2, q2=q2, r2=r2, s2=s2,
                  theta=theta, phi=phi, alpha=alpha, sin2_sum=sin2)
    return state, ConstructionTrace("L28", (1, 2, 3), params, _residual(state, x))


# ---------------------------------------------------------------------------
# Support simplices


def _triple_perm(t, perm):
    out = [0, 0, 0]
    for b in range(3):
        out[perm[b] - 1] = t[b]
    return tuple(out)


@dataclass(frozen=True)
class SupportSimplex:
    name: str
    support: tuple  # 1-based index triples
    corners: tuple  # CornerPoint
    assignments: tuple  # dict triple -> |c|^2 per corner

    def __post_init__(self):
        sup = self.support
        for n, s in enumerate(sup):
            for t in sup[n + 1:]:
                if sum(u == v for u, v in zip(s, t)) > 1:
                    raise ValueError(f"support triples {s} and {t} share two indices")

    @property
    def corner_assignments(self) -> dict:
        return {c.label: a for c, a in zip(self.corners, self.assignments)}

    def permuted(self, perm, name=None) -> "SupportSimplex":
        return SupportSimplex(
            name or self.name,
            tuple(_triple_perm(t, perm) for t in self.support),
            tuple(c.permuted(perm) for c in self.corners),
            tuple({_triple_perm(t, perm): v for t, v in a.items()} for a in self.assignments),
        )

    def with_images(self, perm) -> "SupportSimplex":
        """Add the images of all corners under ``perm`` (which must fix the support)."""
        img = self.permuted(perm)
        if set(img.support) != set(self.support):
            raise ValueError("permutation does not preserve the support")
        corners, assigns, seen = list(self.corners), list(self.assignments), {c.exact for c in self.corners}
        for c, a in zip(img.corners, img.assignments):
            if c.exact not in seen:
                seen.add(c.exact)
                corners.append(c)
                assigns.append(a)
        return SupportSimplex(self.name, self.support, tuple(corners), tuple(assigns))


def _parse_assign(text: str) -> dict:
    out = {}
    for part in text.split(","):
        key, val = part.split("=")
        num, _, den = val.partition("/")
        out[tuple(int(ch) for ch in key.strip())] = float(num) / float(den or 1)
    return out


def _support_simplex(name, support, table) -> SupportSimplex:
    return SupportSimplex(
        name,
        tuple(tuple(int(ch) for ch in s) for s in support),
        tuple(_corner(rows) for rows, _ in table),
        tuple(_parse_assign(a) for _, a in table),
    )


D1_SIMPLEX = _support_simplex(
    "D1",
    ("333", "113", "223", "121", "231", "322", "132"),
    (
        ((B, X, X), "132=1/3,223=1/3,333=1/3"),
        ((O, O, O), "333=1"),
        ((B, O, B), "333=1/3,231=1/3,132=1/3"),
        ((B, B, O), "333=1/3,113=1/3,223=1/3"),
        ((B, A, A), "132=1/3,223=1/3,322=1/6,333=1/6"),
        ((A, A, O), "333=1/2,223=1/2"),
        ((B, A, W), "121=1/6,132=1/6,333=1/3,223=1/3"),
    ),
)
D3_SIMPLEX = D1_SIMPLEX.permuted((1, 3, 2), name="D3")

_S6_BASE = _support_simplex(
    "S6(1)",
    ("333", "113", "131", "223", "232", "211", "321", "312", "122"),
    (
        ((O, O, O), "333=1"),
        ((B, B, B), ",".join(f"{t}=1/9" for t in
                             ("333", "113", "131", "223", "232", "211", "321", "312", "122"))),
        ((B, A, B), "333=1/6,223=1/6,131=1/6,232=1/6,321=1/6,122=1/6"),
        ((A, B, B), "333=1/6,223=1/6,211=1/6,232=1/6,321=1/6,312=1/6"),
        ((B, B, O), "333=1/3,113=1/3,223=1/3"),
        ((O, B, B), "333=1/3,312=1/3,321=1/3"),
        ((B, A, A), "333=1/3,122=1/3,232=1/6,223=1/6"),
        ((A, B, A), "333=1/6,232=1/6,312=1/3,223=1/3"),
        ((A, A, O), "333=1/2,223=1/2"),
        ((A, W, W), "211=1/6,232=1/6,223=1/6,333=1/2"),
        ((W, A, W), "223=1/6,122=1/6,321=1/6,333=1/2"),
        ((A, B, W), "211=1/6,312=1/6,333=1/3,223=1/3"),
        ((W, B, A), "333=1/3,312=1/3,223=1/6,122=1/6"),
        ((B, W, A), "122=1/6,113=1/6,333=1/3,232=1/3"),
    ),
).with_images((1, 3, 2))
S6_SIMPLICES = {
    1: _S6_BASE,
    2: _S6_BASE.permuted((2, 1, 3), name="S6(2)"),
    3: _S6_BASE.permuted((3, 2, 1), name="S6(3)"),
}


def support_state(ss: SupportSimplex, weights) -> tuple[StateTensor, dict]:
    amps = {}
    for w, assign in zip(weights, ss.assignments):
        if w == 0.0:
            continue
        for t, v in assign.items():
            amps[t] = amps.get(t, 0.0) + w * v
    c = np.zeros((3, 3, 3))
    for (i, j, k), v in amps.items():
        c[i - 1, j - 1, k - 1] = _sqrt(v)
    return StateTensor(c.astype(complex)), amps


def build_support_simplex(ss: SupportSimplex, x: EPoint, weights=None):
    """Witness on an orthogonality-free support: mix ``|c_ijk|^2`` with hull weights."""
    if weights is None:
        try:
            weights = lp_decompose(ss.corners, x).weights
        except NotInHullError as exc:
            raise RegionError(f"E-point is outside {ss.name}") from exc
    state, amps = support_state(ss, np.asarray(weights, dtype=float))
    params = {"".join(map(str, t)): v for t, v in sorted(amps.items())}
    return state, ConstructionTrace(ss.name, (1, 2, 3), params, _residual(state, x))


# ---------------------------------------------------------------------------
# Region data

C_COMMON = ((O, O, O), (B, B, O), (A, A, O), (A, B, W), (A, Z, Y))
C_SIMPLICES = {
    "C1": C_COMMON + ((A, B, A), (X, B, X)),
    "C2": C_COMMON + ((A, O, A), (A, B, A)),
    "C3": C_COMMON + ((A, O, A), (A, W, W)),
}
D_COMMON = ((B, X, X), (O, O, O), (B, B, O), (B, O, B), (B, A, A))
D_SIMPLICES = {
    "D1": D_COMMON + ((A, A, O), (B, A, W)),
    "D2": D_COMMON + ((A, A, O), (A, O, A)),
    "D3": D_COMMON + ((A, O, A), (B, W, A)),
}
Q3_SIMPLEX = ((A, A, A), (O, A, A), (A, O, A), (A, A, O), (B, A, A), (A, B, A), (A, A, B))

_S5_EXCLUDED = {(A, Z, Y), (B, X, X), (A, A, A)}


def _s5_corners():
    from .polytope import corner_points

    excluded = set()
    for rows in _S5_EXCLUDED:
        for p in PERMS:
            excluded.add(permute_exact(rows, p))
    return [c for c in corner_points() if c.exact not in excluded]


S5_CORNERS = _s5_corners()
# per qutrit a: (W-type corner, O-type corner, three corners of the identity's right side)
RESHUFFLE = {
    1: ((A, W, W), (O, A, A), ((A, A, O), (A, O, A), (O, B, B))),
    2: ((W, A, W), (A, O, A), ((A, A, O), (O, A, A), (B, O, B))),
    3: ((W, W, A), (A, A, O), ((A, O, A), (O, A, A), (B, B, O))),
}


def reshuffle_identity_holds(a: int) -> bool:
    """Exact check ``2 W_a + O_a = sum of the three right-hand corners``."""
    w_rows, o_rows, rhs = RESHUFFLE[a]
    left = [[2 * w + o for w, o in zip(wr, orow)] for wr, orow in zip(w_rows, o_rows)]
    right = [[sum(r[q][i] for r in rhs) for i in range(3)] for q in range(3)]
    return left == right


def _label(rows) -> str:
    return _corner(rows).label


def reshuffle(weights: dict, max_passes: int = 3):
    """Rewrite S5 weights so the W-type or O-type weight vanishes for some qutrit.

    Returns ``(weights, route)`` where route is ``("S6", a)`` or ``("S0", None)``.
    """
    wts = dict(weights)
    pair = {a: (_label(RESHUFFLE[a][0]), _label(RESHUFFLE[a][1]),
                [_label(r) for r in RESHUFFLE[a][2]]) for a in (1, 2, 3)}
    for a in (1, 2, 3):
        wl, ol, rhs = pair[a]
        if wts.get(wl, 0.0) >= 2.0 * wts.get(ol, 0.0):
            alpha2 = wts.get(ol, 0.0)
            wts[wl] = wts.get(wl, 0.0) - 2.0 * alpha2
            wts[ol] = 0.0
            for lab in rhs:
                wts[lab] = wts.get(lab, 0.0) + alpha2
            return wts, ("S6", a)
    passes = 0
    for a in (1, 2, 3):
        wl, ol, rhs = pair[a]
        alpha1 = wts.get(wl, 0.0)
        if alpha1 == 0.0:
            continue
        passes += 1
        if passes > max_passes:
            raise RegionError("reshuffle did not terminate within the allotted passes")
        wts[ol] = wts.get(ol, 0.0) - 0.5 * alpha1
        wts[wl] = 0.0
        for lab in rhs:
            wts[lab] = wts.get(lab, 0.0) + 0.5 * alpha1
    if min(wts.values()) < -1e-12:
        raise RegionError("reshuffle produced a negative weight")
    return {k: max(v, 0.0) for k, v in wts.items()}, ("S0", None)


# ---------------------------------------------------------------------------
# Dispatch


def _best_simplex(table: dict, y: EPoint):
    """Simplex names ordered by their smallest barycentric weight (largest first)."""
    scored = []
    for name, rows in table.items():
        dec = solve_simplex_coords([_corner(r) for r in rows], y)
        scored.append((-float(dec.weights.min()), name, dec))
    scored.sort(key=lambda t: t[0])
    return [(name, dec) for _, name, dec in scored]


def _clamped(dec):
    w = np.where(dec.weights < 1e-12, 0.0, dec.weights)
    return w / w.sum()


def _build_c(name, y, dec):
    if name == "C2":
        return build_s0(y)
    relabel = RELABEL_C1 if name == "C1" else RELABEL_C3
    return build_l28(y, relabel)


def _build_d(name, y, dec):
    if name == "D2":
        return build_p1_boundary(y, with_c322=True)
    ss = D1_SIMPLEX if name == "D1" else D3_SIMPLEX
    by_label = dict(zip(dec.labels, _clamped(dec)))
    return build_support_simplex(ss, y, [by_label[c.label] for c in ss.corners])


def _try_simplices(table, builder, y):
    errors = []
    for name, dec in _best_simplex(table, y):
        if dec.weights.min() < -1e-7:
            break
        try:
            state, trace = builder(name, y, dec)
        except RegionError as exc:
            errors.append(f"{name}: {exc}")
            continue
        trace.region = name
        return state, trace
    raise RegionError("; ".join(errors) or "no simplex contains the point")


def construct(x: EPoint, tol: float = TOL):
    """Witness state whose RDM spectra equal ``x``; raises InfeasibleError for non-members."""
    report = membership(x, tol)
    if not report.member:
        raise InfeasibleError("E-point violates the feasibility inequalities", report)
    attempts = []
    for sigma in PERMS:
        y = x.permuted(sigma)
        if eval_functional(Functional("P8"), y) <= tol:
            attempts.append(("C", sigma, y))
    for sigma in PERMS:
        y = x.permuted(sigma)
        if eval_functional(Functional("tildeP9"), y) <= tol:
            attempts.append(("D", sigma, y))
    errors = []
    for kind, sigma, y in attempts:
        try:
            if kind == "C":
                state, trace = _try_simplices(C_SIMPLICES, _build_c, y)
            else:
                state, trace = _try_simplices(D_SIMPLICES, _build_d, y)
        except RegionError as exc:
            errors.append(str(exc))
            continue
        return _finish(state, trace, sigma, x)
    if eval_functional(Functional("Q3"), x) <= tol:
        try:
            dec = solve_simplex_coords([_corner(r) for r in Q3_SIMPLEX], x)
            if dec.weights.min() >= -1e-7:
                state, trace = build_s0(x)
                trace.region = "Q3-simplex"
                return _finish(state, trace, (1, 2, 3), x)
        except RegionError as exc:
            errors.append(str(exc))
    state, trace = build_s5(x)
    return _finish(state, trace, (1, 2, 3), x)


def build_s5(x: EPoint):
    try:
        dec = lp_decompose(S5_CORNERS, x)
    except NotInHullError as exc:
        raise RegionError("E-point is outside S5") from exc
    weights, route = reshuffle(dict(dec.pairs()))
    if route[0] == "S0":
        state, trace = build_s0(x, {k: v for k, v in weights.items() if v > 0.0})
    else:
        ss = S6_SIMPLICES[route[1]]
        by_label = {c.label: n for n, c in enumerate(ss.corners)}
        w = np.zeros(len(ss.corners))
        for lab, v in weights.items():
            if v > 0.0:
                w[by_label[lab]] += v
        state, trace = build_support_simplex(ss, x, w / w.sum())
    trace.region = "S5-reshuffle"
    trace.params = dict(trace.params, route=f"{route[0]}{route[1] or ''}")
    return state, trace


def _finish(state, trace, sigma, x):
    out = permute_axes(state, invert_perm(sigma))
    trace.perm = tuple(sigma)
    trace.residual = _residual(out, x)
    return out, trace


def construct_numeric(x: EPoint, seed=0, restarts: int = 32, max_iters: int = 5000):
    """Least-squares search for a state with spectra ``x``; returns ``(state, residual)``.

    Independent of the region analysis, so it doubles as an oracle for
    :func:`construct`. The residual is the max-norm spectral mismatch.
    """
    rng = np.random.default_rng(seed)
    amps0 = random_amplitudes(rng, restarts)
    amps, values, w = descend(amps0, least_squares_objective(x.lam), rng, max_iters=max_iters)
    res = np.max(np.abs(w - x.lam), axis=(1, 2))
    best = int(np.argmin(res))
    return StateTensor(amps[best]), float(res[best])
