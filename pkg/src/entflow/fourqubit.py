"""A nongeneric four-qubit family and a transformation without intermediate states.

States are psi(gamma) = G(gamma)^(1/2) applied on one party, with
G(gamma) = 1/2 + sum_k gamma_k sigma_k.  Deterministic conversion
gamma -> xi is decided by four linear inequalities in r = gamma / xi,
i.e. r must lie in the tetrahedron spanned by (1,1,1), (1,-1,-1),
(-1,1,-1), (-1,-1,1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .errors import EmptyRegion, InvalidInput, InvariantViolation, NotApplicable, ResolutionTooCoarse

SLACK_TOL = 1e-12
NORM_MARGIN = 1e-9
MIN_GRID, MAX_GRID = 1e-4, 1e-1
MIN_REGION_POINTS = 8


@dataclass(frozen=True)
class GammaVector:
    gamma: tuple

    def __init__(self, gamma: Sequence[float]):
        vals = tuple(float(x) for x in gamma)
        if len(vals) != 3 or not all(math.isfinite(x) for x in vals):
            raise InvalidInput("gamma must be three finite reals")
        if vals[0] < 0 or vals[1] < 0:
            raise InvariantViolation("gamma_1 and gamma_2 must be nonnegative")
        if math.hypot(*vals) >= 0.5:
            raise InvariantViolation(f"|gamma| = {math.hypot(*vals)!r} must be below 1/2")
        object.__setattr__(self, "gamma", vals)

    @property
    def norm(self) -> float:
        return math.hypot(*self.gamma)

    def mirrored(self) -> "GammaVector":
        return GammaVector((self.gamma[0], self.gamma[1], -self.gamma[2]))

    def to_json(self) -> list:
        return list(self.gamma)

    def __repr__(self) -> str:
        return "GammaVector(" + ", ".join(f"{x:.6g}" for x in self.gamma) + ")"


def _as_gamma(g) -> GammaVector:
    return g if isinstance(g, GammaVector) else GammaVector(g)


def _slacks(r: np.ndarray) -> np.ndarray:
    # r has shape (..., 3); returns shape (..., 4)
    r1, r2, r3 = r[..., 0], r[..., 1], r[..., 2]
    return np.stack([1 + r1 + r2 + r3, 1 + r1 - r2 - r3, 1 + r2 - r1 - r3, 1 + r3 - r1 - r2], axis=-1)


class Feasibility(NamedTuple):
    feasible: bool
    r: tuple
    slack: tuple


def locc_feasible(src, dst) -> Feasibility:
    """Whether psi(src) converts deterministically into psi(dst)."""
    a, b = _as_gamma(src), _as_gamma(dst)
    if 0.0 in a.gamma or 0.0 in b.gamma:
        raise NotApplicable("the inequality test needs all components nonzero")
    r = np.array(a.gamma) / np.array(b.gamma)
    slack = _slacks(r)
    return Feasibility(bool(np.all(slack >= -SLACK_TOL)), tuple(float(x) for x in r), tuple(float(x) for x in slack))


def norm_measure(g) -> float:
    """1/2 - |gamma|, which cannot increase under deterministic conversion."""
    return 0.5 - _as_gamma(g).norm


# ---------------------------------------------------------------- grid search

def _check_grid(rho: float) -> float:
    rho = float(rho)
    if not MIN_GRID <= rho <= MAX_GRID:
        raise InvalidInput(f"grid resolution {rho} outside [{MIN_GRID}, {MAX_GRID}]")
    return rho


def _grid_slices(rho: float):
    """Yield arrays of grid points rho*(i, j, k), i, j >= 1, k != 0, inside the ball, one k-slice at a time."""
    limit = 0.5 - NORM_MARGIN
    top = int(math.floor(limit / rho))
    ij = np.arange(1, top + 1) * rho
    x, y = np.meshgrid(ij, ij, indexing="ij")
    x, y = x.ravel(), y.ravel()
    base = x * x + y * y
    for k in list(range(-top, 0)) + list(range(1, top + 1)):
        z = k * rho
        keep = base + z * z < limit * limit
        if np.any(keep):
            yield np.column_stack([x[keep], y[keep], np.full(int(keep.sum()), z)])


def _feasible_from(src: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return np.all(_slacks(src / pts) >= -SLACK_TOL, axis=-1)


def _feasible_to(pts: np.ndarray, dst: np.ndarray) -> np.ndarray:
    return np.all(_slacks(pts / dst) >= -SLACK_TOL, axis=-1)


def _not_equal(pts: np.ndarray, point: np.ndarray) -> np.ndarray:
    return np.any(pts != point, axis=-1)


@dataclass
class Regions:
    """Grid points reachable from ``src``, split by the sign of the third component.

    The source itself is excluded as a trivial transformation.
    """

    src: GammaVector
    grid: float
    k_plus: np.ndarray
    k_minus: np.ndarray
    min_gap: float

    def same_side(self) -> np.ndarray:
        return self.k_plus if self.src.gamma[2] > 0 else self.k_minus

    def opposite_side(self) -> np.ndarray:
        return self.k_minus if self.src.gamma[2] > 0 else self.k_plus


def _min_gap(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) == 0 or len(b) == 0:
        return math.inf
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    dist, _ = cKDTree(large).query(small, k=1)
    return float(np.min(dist))


def accessible_region(src, grid: float = 1e-2, gap: bool = True) -> Regions:
    """Enumerate grid destinations reachable from src."""
    s = _as_gamma(src)
    if 0.0 in s.gamma:
        raise NotApplicable("the inequality test needs all components nonzero")
    rho = _check_grid(grid)
    alpha = np.array(s.gamma)
    plus, minus = [], []
    for pts in _grid_slices(rho):
        ok = _feasible_from(alpha, pts) & _not_equal(pts, alpha)
        if np.any(ok):
            (plus if pts[0, 2] > 0 else minus).append(pts[ok])
    k_plus = np.concatenate(plus) if plus else np.empty((0, 3))
    k_minus = np.concatenate(minus) if minus else np.empty((0, 3))
    if len(k_plus) == 0 and len(k_minus) == 0:
        raise EmptyRegion(f"no reachable grid points at resolution {rho}")
    return Regions(s, rho, k_plus, k_minus, _min_gap(k_plus, k_minus) if gap else math.nan)


def _best(pts: np.ndarray, sign: float) -> np.ndarray:
    # extremal norm (sign=+1 max, -1 min), ties to the lexicographically smallest point
    norms = np.einsum("ij,ij->i", pts, pts)
    target = norms.max() if sign > 0 else norms.min()
    ties = pts[norms == target]
    order = np.lexsort(ties.T[::-1])
    return ties[order[0]]


def _refine(start: np.ndarray, allowed, slack_fns, sign: float) -> np.ndarray:
    """Polish a grid extremizer with SLSQP, then pull back toward the grid point until feasible."""
    start = np.asarray(start, dtype=float)
    bounds = [(1e-9, 0.5), (1e-9, 0.5), (1e-9, 0.5) if start[2] > 0 else (-0.5, -1e-9)]
    cons = [{"type": "ineq", "fun": fn} for fn in slack_fns]
    cons.append({"type": "ineq", "fun": lambda b: (0.5 - NORM_MARGIN) ** 2 - b @ b})
    res = minimize(lambda b: -sign * (b @ b), start, jac=lambda b: -2 * sign * b, method="SLSQP",
                   bounds=bounds, constraints=cons, options={"ftol": 1e-15, "maxiter": 500})
    cand = np.asarray(res.x, dtype=float)
    if not np.all(np.isfinite(cand)) or sign * (cand @ cand - start @ start) <= 0:
        return start
    if allowed(cand[None, :])[0]:
        return cand
    lo, hi = 0.0, 1.0  # fraction of the step from start to cand
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if allowed((start + mid * (cand - start))[None, :])[0]:
            lo = mid
        else:
            hi = mid
    return start + lo * (cand - start)


class WitnessCertificate(NamedTuple):
    feasible: bool
    checked: int
    violations: int
    k_size: int
    k_minus_size: int
    note: str


class Witness(NamedTuple):
    xi_plus: GammaVector
    xi_minus: GammaVector
    certificate: WitnessCertificate

    def to_json(self) -> dict:
        return {
            "xi_plus": self.xi_plus.to_json(),
            "xi_minus": self.xi_minus.to_json(),
            "feasible": self.certificate.feasible,
            "certificate_checked": self.certificate.checked,
            "violations": self.certificate.violations,
            "k_size": self.certificate.k_size,
            "k_minus_size": self.certificate.k_minus_size,
            "note": self.certificate.note,
        }


def no_intermediate_witness(alpha, grid: float = 5e-3, refine: bool = True) -> Witness:
    """Find xi_plus -> xi_minus, a feasible conversion with no intermediate state.

    xi_minus has minimal norm among reachable points on the opposite side of
    the third component; xi_plus has maximal norm among same-side reachable
    points that still reach xi_minus.  The certificate checks on the grid
    that no candidate intermediate can be entered from xi_plus or can reach
    xi_minus.
    """
    a = _as_gamma(alpha)
    regions = accessible_region(a, grid, gap=False)
    rho = regions.grid
    same, opp = regions.same_side(), regions.opposite_side()
    if len(same) == 0 or len(opp) == 0:
        raise EmptyRegion("both sides of the accessible region must be nonempty")
    if len(same) < MIN_REGION_POINTS or len(opp) < MIN_REGION_POINTS:
        raise ResolutionTooCoarse(f"regions have only {len(same)} and {len(opp)} grid points")
    src = np.array(a.gamma)
    side = math.copysign(1.0, a.gamma[2])

    def reachable_opposite(pts):
        return (np.sign(pts[:, 2]) == -side) & _feasible_from(src, pts)

    def from_src(b):
        return _slacks(src / b)

    xi_minus = _best(opp, -1.0)
    if refine:
        xi_minus = _refine(xi_minus, reachable_opposite, [from_src], -1.0)

    def in_k(pts):
        return (np.sign(pts[:, 2]) == side) & _feasible_from(src, pts) & _feasible_to(pts, xi_minus)

    k_grid = same[_feasible_to(same, xi_minus)]
    k_set = np.vstack([k_grid, src[None, :]])
    xi_plus = _best(k_set, 1.0)
    if refine:
        if _not_equal(xi_plus[None, :], src)[0]:
            xi_plus = _refine(xi_plus, in_k, [from_src, lambda b: _slacks(b / xi_minus)], 1.0)
    for name, point in (("xi_plus", xi_plus), ("xi_minus", xi_minus)):
        if 0.5 - float(np.linalg.norm(point)) <= rho:
            raise ResolutionTooCoarse(f"{name} lies within one grid cell of the ball boundary")

    feasible = bool(np.all(_slacks(xi_plus / xi_minus) >= -SLACK_TOL))
    # xi_plus must not reach any other point of K
    check_k = k_set[_not_equal(k_set, xi_plus)]
    bad_k = int(np.sum(_feasible_from(xi_plus, check_k)))
    # no other point of K_minus may reach xi_minus
    check_m = opp[_not_equal(opp, xi_minus)]
    bad_m = int(np.sum(_feasible_to(check_m, xi_minus)))
    cert = WitnessCertificate(
        feasible=feasible,
        checked=len(check_k) + len(check_m),
        violations=bad_k + bad_m + (0 if feasible else 1),
        k_size=len(k_set),
        k_minus_size=len(opp),
        note="grid-resolution certificate; separable operations reach the same set here",
    )
    return Witness(GammaVector(xi_plus), GammaVector(xi_minus), cert)
