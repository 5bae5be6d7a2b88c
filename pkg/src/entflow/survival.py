"""Survival analysis along paths of states.

The hazard h(t) is the rate at which the optimal probability of moving
along the path is lost.  Its integral Lambda gives the path probability
exp(-Lambda), which never exceeds the direct endpoint probability and
matches it exactly for optimal paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bipartite import SchmidtVector, max_prob
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    InvalidInput,
    NonDifferentiablePoint,
    NonIntegrableHazard,
)
from .multipartite import (
    GenericStateDescriptor,
    OperatorPath,
    apply_local,
    max_prob_generic,
    path_optimality_defect,
)
from .paths import BipartitePath, Path
from .spectra import congruence, hermitian_part, inv_sqrt, lambda_max

FD_STEP = 1e-4
DEFAULT_TOL = 1e-8
OPTIMALITY_GAP = 1e-6
MAX_DEPTH = 40


def pairwise_prob(path: Path, t1: float, t2: float) -> float:
    """Optimal probability to go from psi(t1) to psi(t2) directly."""
    if not 0.0 <= t1 <= t2 <= 1.0:
        raise InvalidInput(f"need 0 <= t1 <= t2 <= 1, got {t1}, {t2}")
    if t1 == t2:
        return 1.0
    return path.pair_prob(t1, t2)


# ---------------------------------------------------------------- hazard

def _fd_hazard(path: Path, seg: int, t: float) -> float:
    a, b = path.segment_bounds(seg)
    step = min(FD_STEP, (b - a) / 4)

    # -log P has the same limit as 1 - P but no O(h^2 dt) curvature term
    def rate(h):
        p = path.local_prob(seg, t, t + h) if t + h <= b else path.local_prob(seg, t - h, t)
        return -math.log(p) / h if p > 0.0 else math.inf

    coarse, fine = rate(step), rate(step / 2)
    value = 2.0 * fine - coarse
    if not (math.isfinite(coarse) and math.isfinite(fine)) or abs(coarse - fine) > 0.25 * (1.0 + abs(value)):
        raise NonIntegrableHazard(f"finite differences diverge at t = {t} ({coarse!r}, {fine!r})")
    return max(value, 0.0)


def _analytic_hazard(path: Path, seg: int, t: float) -> float:
    if isinstance(path, BipartitePath):
        tails = path.tails_on(seg, t)
        slopes = path.tail_slopes(seg)
        return max(0.0, max(s / e for s, e in zip(slopes, tails)))
    if isinstance(path, OperatorPath):
        mats = path.ops_on(seg, t)
        dmats = path.dops_on(seg, t)
        tensor = path.seed.reshape((path.d,) * path.n)
        norm = path.norm_sq_of(mats)
        dnorm = 0.0
        total = 0.0
        for i, dm in enumerate(dmats):
            if not np.any(dm):
                continue
            swapped = list(mats)
            swapped[i] = dm
            dnorm += float(np.real(np.vdot(tensor, apply_local(tensor, swapped))))
            total += lambda_max(congruence(inv_sqrt(mats[i]), hermitian_part(dm, tol=1e-8)))
        return max(0.0, total - dnorm / norm)
    raise InvalidInput(f"no analytic hazard for {type(path).__name__}")


_HAZARDS = {"fd": _fd_hazard, "analytic": _analytic_hazard}


def _hazard_fn(method: str):
    try:
        return _HAZARDS[method]
    except KeyError:
        raise InvalidInput(f"method must be one of {sorted(_HAZARDS)}") from None


def hazard(path: Path, t: float, method: str = "fd", at_joint: str = "raise") -> float:
    """Hazard rate at t, by Richardson-extrapolated finite differences or in closed form.

    At a segment joint the hazard is undefined; ``at_joint="right"`` returns
    the right limit instead of raising.
    """
    fn = _hazard_fn(method)
    if path.is_joint(t) and at_joint != "right":
        raise NonDifferentiablePoint(f"t = {t} is a segment joint")
    return fn(path, path.segment_index(t), t)


def hazard_analytic(path: Path, t: float) -> float:
    return hazard(path, t, method="analytic")


# ---------------------------------------------------------------- integration

class _Counter:
    def __init__(self, fn, path, seg):
        self.fn, self.path, self.seg = fn, path, seg
        self.calls = 0

    def __call__(self, t):
        self.calls += 1
        return self.fn(self.path, self.seg, t)


def _adaptive_simpson(f, a: float, b: float, tol: float, panels: int = 4) -> float:
    def simpson(fa, fm, fb, width):
        return width * (fa + 4.0 * fm + fb) / 6.0

    def refine(x0, x1, f0, fm, f1, whole, eps, depth):
        m = 0.5 * (x0 + x1)
        lm, rm = 0.5 * (x0 + m), 0.5 * (m + x1)
        flm, frm = f(lm), f(rm)
        left = simpson(f0, flm, fm, m - x0)
        right = simpson(fm, frm, f1, x1 - m)
        delta = left + right - whole
        if depth >= MAX_DEPTH or abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        return (refine(x0, m, f0, flm, fm, left, eps / 2, depth + 1)
                + refine(m, x1, fm, frm, f1, right, eps / 2, depth + 1))

    edges = np.linspace(a, b, panels + 1)
    values = [f(x) for x in edges]
    total = 0.0
    for k in range(panels):
        x0, x1 = float(edges[k]), float(edges[k + 1])
        fm = f(0.5 * (x0 + x1))
        whole = simpson(values[k], fm, values[k + 1], x1 - x0)
        total += refine(x0, x1, values[k], fm, values[k + 1], whole, tol / panels, 0)
    return total


def _integrate(path: Path, tol: float, method: str, t_start: float = 0.0, t_end: float = 1.0) -> tuple:
    fn = _hazard_fn(method)
    if not 0.0 <= t_start <= t_end <= 1.0:
        raise InvalidInput(f"need 0 <= t_start <= t_end <= 1, got {t_start}, {t_end}")
    pieces = []
    for seg in range(path.n_segments):
        a, b = path.segment_bounds(seg)
        lo, hi = max(a, t_start), min(b, t_end)
        if hi > lo:
            pieces.append((seg, lo, hi))
    total, calls = 0.0, 0
    width = max(t_end - t_start, 1e-300)
    for seg, lo, hi in pieces:
        counter = _Counter(fn, path, seg)
        total += _adaptive_simpson(counter, lo, hi, tol * (hi - lo) / width)
        calls += counter.calls
    if not math.isfinite(total):
        raise NonIntegrableHazard("cumulative hazard is not finite")
    return max(total, 0.0), calls


def cumulative_hazard(path: Path, tol: float = DEFAULT_TOL, method: str = "fd",
                      t_start: float = 0.0, t_end: float = 1.0) -> float:
    """Integral of the hazard over [t_start, t_end], split at segment joints."""
    return _integrate(path, tol, method, t_start, t_end)[0]


def _bipartite_gap(path: BipartitePath, seg: int, t: float) -> float:
    # h(t) minus the growth rate of -log P(psi(0), psi(t)); zero iff the path is optimal at t
    h = _analytic_hazard(path, seg, t)
    start = path.tails_at(0.0)
    tails = path.tails_on(seg, t)
    slopes = path.tail_slopes(seg)
    ratios = [x / y for x, y in zip(start, tails)]
    best = min(ratios)
    active = [s / e for s, e, r in zip(slopes, tails, ratios) if r <= best * (1.0 + 1e-9)]
    return max(h - max(active), 0.0)


def optimality_defect(path: Path, t: float) -> float:
    """Pointwise optimality defect for either path family."""
    if path.is_joint(t):
        raise NonDifferentiablePoint(f"t = {t} is a segment joint")
    if isinstance(path, OperatorPath):
        return path_optimality_defect(path, t)
    return _bipartite_gap(path, path.segment_index(t), t)


def sample_times(path: Path, per_segment: int) -> list:
    """Midpoints of ``per_segment`` equal cells on each segment, ascending."""
    out = []
    for seg in range(path.n_segments):
        a, b = path.segment_bounds(seg)
        out.extend(a + (k + 0.5) * (b - a) / per_segment for k in range(per_segment))
    return out


@dataclass
class SurvivalReport:
    Lambda: float
    probability: float
    P_endpoint: float
    optimal: bool
    defect_max: float
    hazard_samples: list = field(default_factory=list)
    hazard_evaluations: int = 0
    gap_tolerance: float = OPTIMALITY_GAP
    product_integral: float | None = None

    @property
    def gap(self) -> float:
        return self.P_endpoint - self.probability

    def to_json(self) -> dict:
        out = {
            "Lambda": self.Lambda,
            "P": self.probability,
            "P_endpoint": self.P_endpoint,
            "optimal": self.optimal,
            "defect_max": self.defect_max,
            "gap": self.gap,
            "gap_tolerance": self.gap_tolerance,
            "hazard_evaluations": self.hazard_evaluations,
            "samples": [[t, h] for t, h in self.hazard_samples],
        }
        if self.product_integral is not None:
            out["product_integral"] = self.product_integral
        return out


def path_probability(path: Path, tol: float = DEFAULT_TOL, method: str = "fd", samples: int = 32,
                     product_steps: int | None = None) -> SurvivalReport:
    """Integrate the hazard and compare exp(-Lambda) with the endpoint probability.

    The path is declared optimal when the two agree to a relative gap of
    1e-6.  ``samples`` hazard and defect values per segment are included for
    inspection.
    """
    lam, calls = _integrate(path, tol, method)
    prob = math.exp(-lam)
    endpoint = pairwise_prob(path, 0.0, 1.0)
    fn = _hazard_fn(method)
    times = sample_times(path, samples) if samples else []
    hazards = [(t, fn(path, path.segment_index(t), t)) for t in times]
    defects = [optimality_defect(path, t) for t in times]
    report = SurvivalReport(
        Lambda=lam,
        probability=prob,
        P_endpoint=endpoint,
        optimal=(endpoint - prob) <= OPTIMALITY_GAP * endpoint,
        defect_max=max(defects, default=0.0),
        hazard_samples=hazards,
        hazard_evaluations=calls,
    )
    if product_steps:
        report.product_integral = product_integral(path, product_steps, method)
    return report


def product_integral(path: Path, steps: int, method: str = "fd") -> float:
    """Right product integral prod_k (1 - h(t_k) dt) on a uniform grid, t_k = k/N."""
    if steps < 2:
        raise InvalidInput("need at least 2 steps")
    fn = _hazard_fn(method)
    dt = 1.0 / steps
    out = 1.0
    for k in range(1, steps + 1):
        t = k / steps
        out *= 1.0 - fn(path, path.segment_index(t), t) * dt
    return out


def path_length(path: Path, tol: float = DEFAULT_TOL, method: str = "fd") -> float:
    """Lambda of the path plus Lambda of its time reversal."""
    return cumulative_hazard(path, tol, method) + cumulative_hazard(path.reverse(), tol, method)


def _prob(a, b) -> float:
    if isinstance(a, SchmidtVector) and isinstance(b, SchmidtVector):
        if min(a.coeffs) <= 0.0 or min(b.coeffs) <= 0.0:
            raise DegenerateInput("both states must be fully entangled")
        return max_prob(a, b).p
    if isinstance(a, GenericStateDescriptor) and isinstance(b, GenericStateDescriptor):
        a.op.same_shape(b.op)
        if not np.array_equal(a.seed, b.seed):
            raise InvalidInput("descriptors must share one seed state")
        return max_prob_generic(a, b.op).p
    raise DimensionMismatch("states must belong to the same family")


def interconversion_distance(a, b) -> float:
    """-log(P(a, b) P(b, a)); zero exactly when the canonical forms coincide."""
    if isinstance(a, SchmidtVector) and isinstance(b, SchmidtVector) and a.d != b.d:
        raise DimensionMismatch(f"dimensions {a.d} and {b.d} differ")
    forward, backward = _prob(a, b), _prob(b, a)
    if isinstance(a, SchmidtVector) and a.coeffs == b.coeffs:
        return 0.0
    return max(-math.log(forward * backward), 0.0) + 0.0


class TwofoldCertificate(NamedTuple):
    twofold: bool
    geodesic: bool
    forward: SurvivalReport
    reverse: SurvivalReport
    length: float
    distance: float


def certify_twofold_optimal(path: Path, tol: float = DEFAULT_TOL, method: str = "fd",
                            samples: int = 32) -> TwofoldCertificate:
    """Both-direction optimality; such paths are exactly the distance-minimizing geodesics."""
    fwd = path_probability(path, tol, method, samples)
    rev = path_probability(path.reverse(), tol, method, samples)
    twofold = fwd.optimal and rev.optimal
    distance = -math.log(fwd.P_endpoint * rev.P_endpoint) + 0.0
    return TwofoldCertificate(twofold, twofold, fwd, rev, fwd.Lambda + rev.Lambda, max(distance, 0.0))
