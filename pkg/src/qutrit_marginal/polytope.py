"""H- and V-representation of the set of feasible one-qutrit spectra.

An E-point collects the ascending spectra of the three one-qutrit reduced
density matrices of a pure three-qutrit state.  The feasible E-points form a
convex polytope described either by 42 linear inequalities (seven families,
each under all six qutrit permutations) or by its corner points.

Permutation convention used throughout the package: a permutation is a tuple
``(s1, s2, s3)`` of 1-based qutrit labels.  Applied to an E-point it sends the
spectrum of qutrit ``b`` to position ``s_b``.  Evaluated on a linear form it
substitutes ``(a, b, c) = (s1, s2, s3)`` for the form's three qutrit slots.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError

PERMS: tuple[tuple[int, int, int], ...] = tuple(itertools.permutations((1, 2, 3)))
IDENTITY = (1, 2, 3)


def check_perm(perm) -> tuple[int, int, int]:
    try:
        p = tuple(int(v) for v in perm)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"invalid permutation {perm!r}") from exc
    if sorted(p) != [1, 2, 3]:
        raise DomainError(f"invalid permutation {perm!r}")
    return p  # type: ignore[return-value]


def parse_perm(text: str) -> tuple[int, int, int]:
    """Parse ``"132"`` or ``"1,3,2"`` into a permutation tuple."""
    digits = [ch for ch in str(text) if ch.isdigit()]
    return check_perm(digits)


def invert_perm(perm) -> tuple[int, int, int]:
    p = check_perm(perm)
    inv = [0, 0, 0]
    for b, s in enumerate(p, start=1):
        inv[s - 1] = b
    return tuple(inv)  # type: ignore[return-value]


def compose_perm(outer, inner) -> tuple[int, int, int]:
    """Return ``outer ∘ inner`` (apply ``inner`` first)."""
    o, i = check_perm(outer), check_perm(inner)
    return tuple(o[i[k] - 1] for k in range(3))  # type: ignore[return-value]


def perm_str(perm) -> str:
    return "".join(str(v) for v in check_perm(perm))


# ---------------------------------------------------------------------------
# E-points


@dataclass(frozen=True)
class EPoint:
    """Nine eigenvalues; row ``a`` holds ``(λ1, λ2, λ3)`` of qutrit ``a+1``."""

    lam: np.ndarray

    def __post_init__(self):
        arr = np.array(self.lam, dtype=float)
        if arr.shape != (3, 3):
            raise DomainError(f"E-point needs a 3x3 array of eigenvalues, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("E-point coordinates must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "lam", arr)

    @classmethod
    def from_spectra(cls, *spectra) -> "EPoint":
        return cls(np.array([[float(v) for v in s] for s in spectra]))

    def permuted(self, perm) -> "EPoint":
        p = check_perm(perm)
        out = np.empty((3, 3))
        for b in range(3):
            out[p[b] - 1] = self.lam[b]
        return EPoint(out)

    def coords6(self) -> np.ndarray:
        """The six independent coordinates ``(λ1^(a), λ2^(a))``."""
        return self.lam[:, :2].reshape(6)

    def to_json(self) -> dict:
        return {"lambda": [[float(v) for v in row] for row in self.lam]}

    @classmethod
    def from_json(cls, obj) -> "EPoint":
        try:
            rows = obj["lambda"]
        except (TypeError, KeyError) as exc:
            raise DomainError('E-point JSON must have a "lambda" key') from exc
        if not isinstance(rows, list) or len(rows) != 3 or any(
            not isinstance(r, list) or len(r) != 3 for r in rows
        ):
            raise DomainError('"lambda" must be a 3x3 nested list')
        return cls(np.array(rows, dtype=float))

    def __eq__(self, other):
        return isinstance(other, EPoint) and np.array_equal(self.lam, other.lam)

    def __hash__(self):
        return hash(self.lam.tobytes())


def permute_exact(rows, perm) -> tuple:
    """Permute a nested tuple of exact spectra with the same convention as EPoint."""
    p = check_perm(perm)
    out = [None, None, None]
    for b in range(3):
        out[p[b] - 1] = tuple(rows[b])
    return tuple(out)


# ---------------------------------------------------------------------------
# Linear forms: inequalities and auxiliary functionals


@dataclass(frozen=True)
class LinearForm:
    """``const + Σ_slot Σ_i coef[slot][i] * λ_i^(perm[slot])``."""

    coef: tuple
    const: int = 0

    def evaluate(self, lam, perm=IDENTITY):
        p = check_perm(perm)
        total = self.const
        for slot in range(3):
            row = lam[p[slot] - 1]
            for i in range(3):
                c = self.coef[slot][i]
                if c:
                    total = total + c * row[i]
        return total

    def matrix(self, perm=IDENTITY) -> np.ndarray:
        """Coefficient array indexed ``[qutrit-1, i-1]`` for the given permutation."""
        p = check_perm(perm)
        out = np.zeros((3, 3))
        for slot in range(3):
            out[p[slot] - 1] += np.array(self.coef[slot], dtype=float)
        return out


def _neg(t):
    return tuple(-v for v in t)


# Slack (right side minus left side) of each family with slots (a, b, c).
INEQUALITY_FORMS: dict[int, LinearForm] = {
    1: LinearForm((_neg((1, 1, 0)), (1, 1, 0), (1, 1, 0))),
    2: LinearForm((_neg((1, 0, 1)), (1, 1, 0), (1, 0, 1))),
    3: LinearForm((_neg((0, 1, 1)), (1, 1, 0), (0, 1, 1))),
    4: LinearForm((_neg((1, 2, 0)), (1, 2, 0), (1, 2, 0))),
    5: LinearForm((_neg((2, 1, 0)), (1, 2, 0), (2, 1, 0))),
    6: LinearForm((_neg((0, 2, 1)), (1, 2, 0), (0, 2, 1))),
    7: LinearForm((_neg((0, 2, 1)), (2, 1, 0), (0, 1, 2))),
    # Not part of the membership test: the auxiliary family used to split off
    # the region around the [A, 0 1/4 3/4, 1/4 1/4 1/2] corners.
    8: LinearForm((_neg((0, 2, 1)), (2, 1, 0), (0, 2, 1))),
}

FAMILIES = (1, 2, 3, 4, 5, 6, 7)

FUNCTIONAL_FORMS: dict[str, LinearForm] = {
    "P1": INEQUALITY_FORMS[1],
    "P4": INEQUALITY_FORMS[4],
    "P5": INEQUALITY_FORMS[5],
    "P6": INEQUALITY_FORMS[6],
    "P7": INEQUALITY_FORMS[7],
    "P8": LinearForm(((0, -2, -1), (0, 2, 1), (2, 1, 0))),
    "P9": LinearForm(((2, 1, 0), (-2, -1, 0), (2, 1, 0))),
    "tildeP9": LinearForm(((-2, -1, 0), (2, 1, 0), (2, 1, 0))),
    "P10": LinearForm(((0, 1, 0), (0, -1, 0), (0, -1, 0))),
    "Q1": LinearForm(((-1, 1, 0), (1, -1, 0), (-1, 1, 0))),
    "Q2": LinearForm(((-1, 1, 0), (-1, 1, 0), (1, -1, 0))),
    "Q3": LinearForm(((1, -1, 0), (1, -1, 0), (1, -1, 0)), const=1),
}


@dataclass(frozen=True, order=True)
class InequalityId:
    family: int
    perm: tuple = IDENTITY

    def __post_init__(self):
        if self.family not in INEQUALITY_FORMS:
            raise DomainError(f"unknown inequality family {self.family!r}")
        object.__setattr__(self, "perm", check_perm(self.perm))

    def __str__(self):
        return f"ineq{self.family}({perm_str(self.perm)})"

    @classmethod
    def parse(cls, text: str) -> "InequalityId":
        text = text.strip()
        if not text.startswith("ineq") or "(" not in text:
            raise DomainError(f"cannot parse inequality id {text!r}")
        fam, rest = text[4:].split("(", 1)
        return cls(int(fam), parse_perm(rest.rstrip(")")))


ALL_INEQUALITIES: tuple[InequalityId, ...] = tuple(
    InequalityId(k, p) for k in FAMILIES for p in PERMS
)


@dataclass(frozen=True)
class Functional:
    tag: str
    perm: tuple = IDENTITY

    def __post_init__(self):
        if self.tag not in FUNCTIONAL_FORMS:
            raise DomainError(f"unknown functional tag {self.tag!r}")
        object.__setattr__(self, "perm", check_perm(self.perm))

    @property
    def form(self) -> LinearForm:
        return FUNCTIONAL_FORMS[self.tag]

    def __str__(self):
        return f"{self.tag}({perm_str(self.perm)})"


def _lam_of(x):
    return x.lam if isinstance(x, EPoint) else x


def eval_inequality(ineq: InequalityId, x) -> float:
    """Slack of one inequality; non-negative means satisfied.

    ``x`` may be an :class:`EPoint` or any nested 3x3 sequence (exact
    :class:`~fractions.Fraction` entries give exact slacks).
    """
    if not isinstance(ineq, InequalityId):
        raise DomainError(f"expected an InequalityId, got {ineq!r}")
    return INEQUALITY_FORMS[ineq.family].evaluate(_lam_of(x), ineq.perm)


def eval_functional(f: Functional, x) -> float:
    if not isinstance(f, Functional):
        raise DomainError(f"expected a Functional, got {f!r}")
    return f.form.evaluate(_lam_of(x), f.perm)


# (42, 9) matrix of slacks for batched evaluation.
_INEQ_MATRIX = np.stack(
    [INEQUALITY_FORMS[i.family].matrix(i.perm).reshape(9) for i in ALL_INEQUALITIES]
)


def all_slacks(lam_batch) -> np.ndarray:
    """Slacks of the 42 inequalities for a batch of shape ``(N, 3, 3)``."""
    lam_batch = np.asarray(lam_batch, dtype=float)
    return lam_batch.reshape(-1, 9) @ _INEQ_MATRIX.T


def simplex_violations_batch(lam_batch) -> np.ndarray:
    """Per-point, per-constraint slacks of the ``L x L x L`` constraints, shape (N, 12).

    Order per qutrit: λ1 ≥ 0, λ2 − λ1 ≥ 0, λ3 − λ2 ≥ 0, −|Σλ − 1|.
    """
    lam = np.asarray(lam_batch, dtype=float).reshape(-1, 3, 3)
    cols = [lam[:, :, 0], lam[:, :, 1] - lam[:, :, 0], lam[:, :, 2] - lam[:, :, 1],
            -np.abs(lam.sum(axis=2) - 1.0)]
    return np.stack(cols, axis=2).reshape(-1, 12)


_SIMPLEX_TAGS = [
    tag.format(a=a)
    for a in (1, 2, 3)
    for tag in ("l1({a})>=0", "l2({a})>=l1({a})", "l3({a})>=l2({a})", "sum({a})=1")
]


@dataclass
class MembershipReport:
    member: bool
    min_slack: float
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "min_slack": float(self.min_slack),
            "violations": [{"id": str(k), "slack": float(s)} for k, s in self.violations],
        }


def membership(x: EPoint, tol: float = 1e-10) -> MembershipReport:
    """Test ``x`` against the simplex constraints and all 42 inequalities."""
    lam = _lam_of(x)
    lam = np.asarray(lam, dtype=float)
    simplex = simplex_violations_batch(lam[None])[0]
    slacks = all_slacks(lam[None])[0]
    violations = [(tag, float(s)) for tag, s in zip(_SIMPLEX_TAGS, simplex) if s < -tol]
    violations += [(ineq, float(s)) for ineq, s in zip(ALL_INEQUALITIES, slacks) if s < -tol]
    min_slack = float(min(simplex.min(), slacks.min()))
    return MembershipReport(member=not violations, min_slack=min_slack, violations=violations)


def membership_batch(lam_batch, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized membership: returns ``(member mask, min slack)`` per point."""
    simplex = simplex_violations_batch(lam_batch)
    slacks = all_slacks(lam_batch)
    both = np.concatenate([simplex, slacks], axis=1)
    mins = both.min(axis=1)
    return mins >= -tol, mins


def general_marginal_inequality(spectra: Sequence[Sequence[float]]) -> float:
    """Slack of the n-party, d-level sum inequality.

    ``Σ_{a<n} Σ_{i<d} λ_i^(a) − Σ_{i<d} λ_i^(n)`` for ascending spectra.
    """
    try:
        rows = [list(s) for s in spectra]
    except TypeError as exc:
        raise DomainError("spectra must be a list of sequences") from exc
    if len(rows) < 2:
        raise DomainError("need at least two parties")
    d = len(rows[0])
    if d < 2 or any(len(r) != d for r in rows):
        raise DomainError("spectra must all have the same length d >= 2")
    head = sum(sum(r[: d - 1]) for r in rows[:-1])
    return head - sum(rows[-1][: d - 1])


# ---------------------------------------------------------------------------
# Corner points and facets (exact rationals)

F = Fraction
SPEC_O = (F(0), F(0), F(1))
SPEC_A = (F(0), F(1, 2), F(1, 2))
SPEC_B = (F(1, 3), F(1, 3), F(1, 3))
SPEC_X = (F(0), F(1, 3), F(2, 3))  # 0 1/3 2/3
SPEC_Y = (F(0), F(1, 4), F(3, 4))  # 0 1/4 3/4
SPEC_Z = (F(1, 4), F(1, 4), F(1, 2))  # 1/4 1/4 1/2
SPEC_W = (F(1, 6), F(1, 6), F(2, 3))  # 1/6 1/6 2/3

_NAMED = {SPEC_O: "O", SPEC_A: "A", SPEC_B: "B"}


def spectrum_label(s) -> str:
    s = tuple(F(v) for v in s)
    if s in _NAMED:
        return _NAMED[s]
    return " ".join(str(v) for v in s)


def exact_label(rows) -> str:
    return "[" + ",".join(spectrum_label(r) for r in rows) + "]"


def exact_to_epoint(rows) -> EPoint:
    return EPoint(np.array([[float(v) for v in r] for r in rows]))


@dataclass(frozen=True)
class CornerPoint:
    label: str
    exact: tuple
    point: EPoint

    @classmethod
    def from_exact(cls, rows) -> "CornerPoint":
        rows = tuple(tuple(F(v) for v in r) for r in rows)
        return cls(exact_label(rows), rows, exact_to_epoint(rows))

    def permuted(self, perm) -> "CornerPoint":
        return CornerPoint.from_exact(permute_exact(self.exact, perm))

    def to_json(self) -> dict:
        return {"label": self.label, **self.point.to_json()}


O, A, B, X, Y, Z, W = SPEC_O, SPEC_A, SPEC_B, SPEC_X, SPEC_Y, SPEC_Z, SPEC_W

BASE_CORNERS: tuple = (
    (O, O, O), (O, A, A), (O, B, B), (A, A, A), (A, A, B), (A, B, B), (B, B, B),
    (B, X, X), (A, Y, Z), (A, B, W), (A, W, W),
)


def corner(*rows) -> CornerPoint:
    return CornerPoint.from_exact(rows)


def orbit(points) -> list[CornerPoint]:
    """Deduplicated qutrit-permutation orbit, in first-appearance order."""
    seen = set()
    out = []
    for rows in points:
        rows = tuple(tuple(F(v) for v in r) for r in rows)
        for p in PERMS:
            img = permute_exact(rows, p)
            if img not in seen:
                seen.add(img)
                out.append(CornerPoint.from_exact(img))
    return out


_CORNERS = None


def corner_points() -> list[CornerPoint]:
    global _CORNERS
    if _CORNERS is None:
        _CORNERS = tuple(orbit(BASE_CORNERS))
    return list(_CORNERS)


# Boundary hyperplanes used to certify the facet simplices.  ``("eq", a, i, j)``
# means λ_i^(a) = λ_j^(a); ``("zero", a)`` means λ_1^(a) = 0; ``("ineq", k,
# perm)`` is the equality version of inequality k.
@dataclass(frozen=True)
class Hyperplane:
    kind: str
    args: tuple

    def value(self, rows):
        if self.kind == "eq":
            a, i, j = self.args
            return rows[a - 1][i - 1] - rows[a - 1][j - 1]
        if self.kind == "zero":
            return rows[self.args[0] - 1][0]
        if self.kind == "ineq":
            k, p = self.args
            return INEQUALITY_FORMS[k].evaluate(rows, p)
        if self.kind == "functional":
            tag, p = self.args
            return FUNCTIONAL_FORMS[tag].evaluate(rows, p)
        raise DomainError(f"unknown hyperplane kind {self.kind!r}")

    def permuted(self, perm) -> "Hyperplane":
        p = check_perm(perm)
        if self.kind == "eq":
            a, i, j = self.args
            return Hyperplane("eq", (p[a - 1], i, j))
        if self.kind == "zero":
            return Hyperplane("zero", (p[self.args[0] - 1],))
        k, q = self.args
        return Hyperplane(self.kind, (k, compose_perm(p, q)))

    def __str__(self):
        if self.kind == "eq":
            a, i, j = self.args
            return f"l{i}({a})=l{j}({a})"
        if self.kind == "zero":
            return f"l1({self.args[0]})=0"
        k, q = self.args
        name = f"ineq{k}" if self.kind == "ineq" else str(k)
        return f"{name}({perm_str(q)})=0"


def _eq(a, i, j):
    return Hyperplane("eq", (a, i, j))


def _zero(a):
    return Hyperplane("zero", (a,))


def _ineq(k, perm):
    return Hyperplane("ineq", (k, parse_perm(perm)))


# Facet corners at (abc) = (123), each paired with the hyperplane that holds
# the other five corners.
FACET_TABLE: dict[int, tuple] = {
    1: (
        ((O, O, O), _eq(1, 2, 3)),
        ((B, O, B), _zero(3)),
        ((B, B, O), _zero(2)),
        ((A, O, A), _ineq(5, "132")),
        ((A, A, O), _ineq(5, "123")),
        ((B, X, X), _ineq(4, "123")),
    ),
    2: (
        ((O, O, O), _eq(3, 2, 3)),
        ((B, O, B), _zero(3)),
        ((A, O, A), _eq(1, 1, 2)),
        ((O, A, A), _ineq(6, "321")),
        ((W, W, A), _zero(2)),
        ((Z, Y, A), _ineq(4, "321")),
    ),
    3: (
        ((O, O, O), _ineq(7, "123")),
        ((B, O, B), _zero(1)),
        ((A, O, A), _eq(3, 1, 2)),
        ((X, X, B), _ineq(6, "123")),
        ((A, Y, Z), _ineq(5, "321")),
        ((A, W, B), _zero(2)),
    ),
    4: (
        ((O, O, O), _eq(1, 2, 3)),
        ((B, O, B), _ineq(2, "231")),
        ((B, B, O), _ineq(2, "321")),
        ((A, O, A), _eq(3, 1, 2)),
        ((A, A, O), _eq(2, 1, 2)),
        ((A, W, W), _ineq(1, "123")),
    ),
    5: (
        ((O, O, O), _eq(1, 2, 3)),
        ((B, O, B), _zero(3)),
        ((B, B, O), _ineq(3, "321")),
        ((A, O, A), _eq(1, 1, 2)),
        ((B, X, X), _eq(2, 1, 2)),
        ((B, W, A), _ineq(1, "123")),
    ),
    6: (
        ((O, O, O), _eq(1, 2, 3)),
        ((B, O, B), _zero(1)),
        ((A, O, A), _eq(3, 1, 2)),
        ((A, Y, Z), _eq(2, 1, 2)),
        ((A, W, W), _ineq(3, "123")),
        ((A, W, B), _ineq(2, "321")),
    ),
    7: (
        ((A, A, B), _ineq(3, "123")),
        ((B, O, B), _zero(1)),
        ((A, O, A), _eq(3, 1, 2)),
        ((X, X, B), _eq(1, 2, 3)),
        ((A, Y, Z), _eq(3, 2, 3)),
        ((A, W, B), _zero(2)),
    ),
}


@dataclass(frozen=True)
class FacetSpec:
    id: InequalityId
    corners: tuple  # six CornerPoint
    boundaries: tuple  # Hyperplane opposite each corner

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.corners]

    def to_json(self) -> dict:
        return {
            "id": str(self.id),
            "corners": self.labels,
            "opposite_hyperplanes": [str(h) for h in self.boundaries],
        }


_FACETS = None


def facet_simplices() -> list[FacetSpec]:
    """All 42 facet 5-simplices: the seven tabulated ones and their permutation images."""
    global _FACETS
    if _FACETS is None:
        out = []
        for k in FAMILIES:
            base = FACET_TABLE[k]
            for p in PERMS:
                corners = tuple(CornerPoint.from_exact(permute_exact(rows, p)) for rows, _ in base)
                planes = tuple(h.permuted(p) for _, h in base)
                out.append(FacetSpec(InequalityId(k, p), corners, planes))
        _FACETS = tuple(out)
    return list(_FACETS)
