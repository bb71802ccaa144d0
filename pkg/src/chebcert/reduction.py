"""Practical necessary conditions for polynomial minimax optimality.

Two families of checks work directly on the signed extremal points instead of
the full lifted space:

* degree reduction: shift one coordinate so the extreme points along it sit
  at zero, drop them, lower the degree by one, repeat down to degree 1 and
  test plain convex-hull intersection in R^d;
* hyperplane cuts: pick a hyperplane through ``d`` of the points, flip the
  signs on its negative side, drop the points on it, and require the
  degree ``m - 1`` condition for the re-signed set.

Both are necessary for optimality, not sufficient. Each exploration also
checks the degenerate alternative in which every optimality weight sits on
the points a step removes (then the step says nothing about the rest).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .optimality import hull_intersection, hulls_intersect
from .poly_basis import enumerate_monomials

DEFAULT_BUDGET = 10_000
PLANE_TOL = 1e-9

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class SignedPointSet:
    """Extremal points with deviation signs (+1 / -1) and the current degree.

    ``labels`` carry the original point indices through reductions.
    """

    points: np.ndarray
    signs: Tuple[int, ...]
    degree: int
    labels: Tuple[int, ...] = ()

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        signs = tuple(int(s) for s in self.signs)
        if P.size == 0:
            P = P.reshape(0, P.shape[1] if P.ndim == 2 else 1)
        elif P.ndim == 1:
            P = P.reshape(-1, 1)
        if P.shape[0] != len(signs):
            raise ValueError(f"{P.shape[0]} points but {len(signs)} signs")
        if any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        labels = tuple(int(l) for l in self.labels) or tuple(range(len(signs)))
        if len(labels) != len(signs):
            raise ValueError("one label per point")
        P.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_sets(cls, positive, negative, degree: int) -> "SignedPointSet":
        Pp = np.atleast_2d(np.asarray(positive, dtype=float))
        Pn = np.atleast_2d(np.asarray(negative, dtype=float))
        return cls(np.vstack([Pp, Pn]), (1,) * len(Pp) + (-1,) * len(Pn), degree)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def side(self, sign: int) -> np.ndarray:
        return self.points[np.array(self.signs, dtype=int) == sign]

    @property
    def both_sides(self) -> bool:
        return 1 in self.signs and -1 in self.signs

    def __len__(self) -> int:
        return len(self.signs)

    def subset(self, mask, *, signs=None, degree=None) -> "SignedPointSet":
        mask = np.asarray(mask, dtype=bool)
        s = np.array(self.signs if signs is None else signs, dtype=int)
        return SignedPointSet(self.points[mask], tuple(s[mask]),
                              self.degree if degree is None else degree,
                              tuple(int(l) for l in np.array(self.labels, dtype=int)[mask]))


def lifted_condition(s: SignedPointSet, degree: Optional[int] = None) -> bool:
    """Full hull test for ``s`` in the monomial lift of ``degree`` (default: its own)."""
    if not s.both_sides:
        return False
    basis = enumerate_monomials(s.dimension, s.degree if degree is None else degree)
    cert, _ = hull_intersection(basis.lift(s.side(1)), basis.lift(s.side(-1)), reduce=False)
    return cert is not None


def _linear_condition(s: SignedPointSet) -> bool:
    return s.both_sides and hulls_intersect(s.side(1), s.side(-1))


# ---------------------------------------------------------------------------
# degree reduction


def _reduce(s: SignedPointSet, j: int, kind: str):
    if s.degree <= 1:
        raise ValueError("degree reduction needs degree > 1")
    if not 0 <= j < s.dimension:
        raise ValueError(f"dimension {j} out of range for {s.dimension}-d points")
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    if len(s) == 0:
        return s, 0.0, ()
    col = s.points[:, j]
    P = s.points.copy()
    if kind == "min":
        delta = float(col.min())
        P[:, j] = col - delta
    else:
        delta = float(col.max())
        P[:, j] = delta - col
    zero = np.abs(P[:, j]) <= PLANE_TOL * max(1.0, abs(delta))
    removed = tuple(int(l) for l, z in zip(s.labels, zero) if z)
    keep = ~zero
    out = SignedPointSet(P[keep], tuple(np.array(s.signs)[keep]), s.degree - 1,
                         tuple(np.array(s.labels, dtype=int)[keep]))
    return out, delta, removed


def reduce_step(s: SignedPointSet, dimension: int, kind: str) -> SignedPointSet:
    """One reduction: shift coordinate ``dimension`` by its min (or reflect about its max).

    Points landing on zero are removed and the degree drops by one. An empty
    result is a legal terminal state.
    """
    return _reduce(s, dimension, kind)[0]


@dataclass
class ReductionNode:
    set: SignedPointSet
    dimension: Optional[int] = None
    kind: Optional[str] = None
    delta: Optional[float] = None
    removed: Tuple[int, ...] = ()
    children: List["ReductionNode"] = field(default_factory=list)
    leaf_result: Optional[bool] = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {"degree": self.set.degree,
             "remaining": list(self.set.labels),
             "signs": list(self.set.signs)}
        if self.dimension is not None:
            d.update(dimension=self.dimension, kind=self.kind, delta=self.delta,
                     removed=list(self.removed))
        if self.leaf_result is not None:
            d["hulls_intersect"] = self.leaf_result
        if self.note:
            d["note"] = self.note
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d


@dataclass
class ReductionTrace:
    root: ReductionNode
    verdict: str
    violating_path: List[dict] = field(default_factory=list)
    nodes: int = 0

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def leaves(self):
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            if not node.children:
                yield node, depth
            stack.extend((c, depth + 1) for c in reversed(node.children))

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "nodes": self.nodes,
                "violating_path": self.violating_path, "tree": self.root.to_dict()}


def verify_necessary_condition(s: SignedPointSet, *, budget: int = DEFAULT_BUDGET,
                               all_branches: bool = True) -> ReductionTrace:
    """Run degree reduction over every (dimension, min/max) choice.

    The verdict is ``violated`` when the input has only one sign, or some
    branch ends at degree 1 with both signs present and disjoint convex
    hulls; ``inconclusive`` when the node
    budget runs out first. ``all_branches=False`` follows only the first
    choice (dimension 0, min) at every level.
    """
    cache = {}
    state = {"nodes": 0, "path": None, "exceeded": False}

    def leaf_ok(node: ReductionNode) -> bool:
        key = (node.set.labels, node.set.signs)
        if key not in cache:
            cache[key] = _linear_condition(node.set)
        return cache[key]

    def explore(node: ReductionNode, path):
        state["nodes"] += 1
        if state["nodes"] > budget:
            state["exceeded"] = True
            raise BudgetExceeded
        s = node.set
        if s.degree == 1 or not s.both_sides:
            if s.both_sides:
                node.leaf_result = leaf_ok(node)
                if not node.leaf_result and state["path"] is None:
                    excuse = _degenerate_excuse(path)
                    if excuse:
                        node.note = excuse
                    else:
                        state["path"] = [_step_dict(p) for p in path]
            return
        choices = [(j, k) for j in range(s.dimension) for k in ("min", "max")]
        if not all_branches:
            choices = choices[:1]
        for j, kind in choices:
            child_set, delta, removed = _reduce(s, j, kind)
            child = ReductionNode(child_set, j, kind, delta, removed)
            node.children.append(child)
            explore(child, path + [(node, child)])

    root = ReductionNode(s)
    if not s.both_sides:
        # an empty side has no hull point in common with anything
        root.leaf_result = False
        root.note = "extremal points of only one sign"
        return ReductionTrace(root, VIOLATED, [], 1)
    try:
        explore(root, [])
    except BudgetExceeded:
        pass
    if state["path"] is not None:
        verdict = VIOLATED
    elif state["exceeded"]:
        verdict = INCONCLUSIVE
    else:
        verdict = HOLDS
    return ReductionTrace(root, verdict, state["path"] or [], state["nodes"])


def _step_dict(step) -> dict:
    parent, child = step
    return {"dimension": child.dimension, "kind": child.kind, "delta": child.delta,
            "removed": list(child.removed), "degree": child.set.degree}


def _degenerate_excuse(path) -> str:
    """Non-empty when some step removed a subset that is optimal on its own."""
    for parent, child in path:
        removed = set(child.removed)
        mask = np.array([l in removed for l in parent.set.labels], dtype=bool)
        sub = parent.set.subset(mask)
        if sub.both_sides and lifted_condition(sub):
            return (f"removed points {sorted(removed)} already satisfy the degree-"
                    f"{parent.set.degree} condition; branch is not decisive")
    return ""


# ---------------------------------------------------------------------------
# hyperplane cuts


@dataclass
class CutCheck:
    through: Tuple[int, ...]
    normal: np.ndarray
    offset: float
    flipped: Tuple[int, ...]
    on_plane: Tuple[int, ...]
    degree_after: int
    feasible: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {"through": list(self.through), "normal": self.normal.tolist(),
                "offset": self.offset, "flipped": list(self.flipped),
                "on_plane": list(self.on_plane), "degree_after": self.degree_after,
                "feasible": self.feasible, "reason": self.reason}


@dataclass
class CutReport:
    checks: List[CutCheck]
    notes: List[str]
    verdict: str

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "notes": self.notes,
                "checks": [c.to_dict() for c in self.checks]}


def _hyperplane(X: np.ndarray):
    """Unit normal and offset of the hyperplane through the rows of ``X`` (d x d)."""
    d = X.shape[1]
    M = np.hstack([X, -np.ones((X.shape[0], 1))])
    _, sv, vt = np.linalg.svd(M)
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
    if rank < d:
        return None
    v = vt[-1]
    u, a = v[:d], v[d]
    norm = np.linalg.norm(u)
    if norm < 1e-12:
        return None
    u, a = u / norm, a / norm
    lead = np.flatnonzero(np.abs(u) > 1e-12)[0]
    if u[lead] < 0:
        u, a = -u, -a
    return u, float(a)


def _cut_holds(s: SignedPointSet, counter: dict, budget: int) -> bool:
    """Recursive degree-(m-1) cut condition; degree 1 is plain hull intersection."""
    counter["nodes"] += 1
    if counter["nodes"] > budget:
        raise BudgetExceeded
    if s.degree == 1:
        return _linear_condition(s)
    if not s.both_sides:
        return False
    for check in _enumerate_cuts(s, counter, budget, notes=None):
        if not check.feasible:
            return False
    return True


def _enumerate_cuts(s: SignedPointSet, counter: dict, budget: int, notes):
    d = s.dimension
    P = s.points
    scale = max(1.0, float(np.max(np.abs(P), initial=0.0)))
    signs = np.array(s.signs, dtype=int)
    for combo in itertools.combinations(range(len(s)), d):
        plane = _hyperplane(P[list(combo)])
        through = tuple(s.labels[i] for i in combo)
        if plane is None:
            if notes is not None:
                notes.append(f"points {list(through)} do not span a unique hyperplane; skipped")
            continue
        u, a = plane
        vals = P @ u - a
        on = np.abs(vals) <= PLANE_TOL * scale
        below = (vals < 0) & ~on
        new_signs = np.where(below, -signs, signs)
        resigned = s.subset(~on, signs=new_signs, degree=s.degree - 1)
        ok = resigned.both_sides and _cut_holds(resigned, counter, budget)
        reason = "re-signed sets meet" if ok else ""
        if not ok:
            on_set = s.subset(on)
            if on_set.both_sides and lifted_condition(on_set):
                ok = True
                reason = "points on the hyperplane satisfy the full condition"
        yield CutCheck(through, u, a,
                       tuple(int(s.labels[i]) for i in np.flatnonzero(below)),
                       tuple(int(s.labels[i]) for i in np.flatnonzero(on)),
                       s.degree - 1, bool(ok), reason)


def cut_condition_check(s: SignedPointSet, degree: Optional[int] = None, *,
                        budget: int = DEFAULT_BUDGET) -> CutReport:
    """Evaluate every hyperplane through ``d`` of the points.

    ``degree`` overrides ``s.degree`` (the model degree ``m >= 2``). The
    overall verdict holds iff every cut is feasible.
    """
    m = s.degree if degree is None else int(degree)
    if m < 2:
        raise ValueError("cut conditions need degree >= 2 (degree 1 is the plain hull test)")
    s = SignedPointSet(s.points, s.signs, m, s.labels)
    notes: List[str] = []
    counter = {"nodes": 0}
    checks = []
    try:
        for check in _enumerate_cuts(s, counter, budget, notes):
            checks.append(check)
    except BudgetExceeded:
        return CutReport(checks, notes + ["node budget exhausted"], INCONCLUSIVE)
    verdict = HOLDS if all(c.feasible for c in checks) else VIOLATED
    return CutReport(checks, notes, verdict)


def alternation_count(points: Sequence[float], signs: Sequence[int]) -> int:
    """Length of the longest alternating-sign subsequence of 1-D points sorted by position."""
    order = np.argsort(np.asarray(points, dtype=float).reshape(-1), kind="stable")
    s = np.asarray(signs, dtype=int)[order]
    if s.size == 0:
        return 0
    return int(1 + np.count_nonzero(s[1:] != s[:-1]))
