"""Explicit optimal protocols for bipartite conversions.

Includes the optimal intermediate state xi together with its (zeta, eta)
generalization, the most and least entangled intermediates reachable at a
given probability, the straight, most-entangled and least-entangled paths,
and the three-outcome measurement for qutrit pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .bipartite import TOL, SchmidtVector, majorizes, max_prob, tail_sums
from .errors import (
    CompletenessViolation,
    DeterministicCase,
    DimensionMismatch,
    InvalidInput,
    InvalidSegments,
    ProbabilityOutOfRange,
)
from .paths import BipartitePath
from .spectra import eig_hermitian


def _same_d(a: SchmidtVector, b: SchmidtVector) -> None:
    if a.d != b.d:
        raise DimensionMismatch(f"dimensions {a.d} and {b.d} differ")


class XiResult(NamedTuple):
    xi: SchmidtVector
    ratios: tuple
    boundaries: tuple


def _smallest_argmin(values: Sequence[float]) -> int:
    best = min(values)
    return next(i for i, v in enumerate(values) if v <= best * (1.0 + TOL))


def xi_state(psi: SchmidtVector, phi: SchmidtVector) -> XiResult:
    """Optimal intermediate state xi for psi -> phi that keeps the success probability.

    The tail index range is peeled from the bottom: each step picks the
    smallest minimizer of the tail-difference ratio above the previous
    boundary.  ``boundaries`` are 1-based (l_1 > l_2 > ... > l_k = 1).
    """
    _same_d(psi, phi)
    d = psi.d
    ep = tail_sums(psi.coeffs) + [0.0]
    ef = tail_sums(phi.coeffs) + [0.0]
    if max_prob(psi, phi).p >= 1.0:
        warnings.warn("conversion is deterministic; xi is a deterministic waypoint", stacklevel=2)
    upper = d + 1  # l_0
    ratios, bounds = [], []
    while upper > 1:
        cand = [(ep[l - 1] - ep[upper - 1]) / (ef[l - 1] - ef[upper - 1]) for l in range(1, upper)]
        l = _smallest_argmin(cand) + 1
        ratios.append(cand[l - 1])
        bounds.append(l)
        upper = l
    coeffs = [0.0] * d
    upper = d + 1
    for r, l in zip(ratios, bounds):
        for i in range(l, upper):
            coeffs[i - 1] = r * phi.coeffs[i - 1]
        upper = l
    return XiResult(SchmidtVector.normalized(coeffs), tuple(ratios), tuple(bounds))


@dataclass(frozen=True)
class SegmentedUnitVectors:
    """Per-segment unit vectors for the (zeta, eta) construction.

    ``boundaries`` are l_1 > ... > l_k = 1 (1-based); segment j covers
    indices l_j .. l_{j-1} - 1 with l_0 = d + 1.  ``vectors[j]`` is a full
    length-d nonnegative vector summing to 1 and vanishing off its segment.
    """

    boundaries: tuple
    vectors: tuple

    def segments(self, d: int) -> list:
        out, upper = [], d + 1
        for l in self.boundaries:
            out.append((l - 1, upper - 1))  # 0-based half-open
            upper = l
        return out


def _segment_shape(coeffs: Sequence[float], lo: int, hi: int) -> list:
    part = list(coeffs[lo:hi])
    total = math.fsum(part)
    return [c / total for c in part]


def _majorized_by(a: Sequence[float], b: Sequence[float]) -> bool:
    # a is majorized by b (both unit 1-norm, any order)
    sa, sb = 0.0, 0.0
    for x, y in zip(sorted(a, reverse=True), sorted(b, reverse=True)):
        sa += x
        sb += y
        if sa > sb + TOL:
            return False
    return True


def default_units(psi: SchmidtVector, phi: SchmidtVector, shape_of: str = "phi") -> SegmentedUnitVectors:
    """Units obtained by normalizing phi (default) or psi on each xi segment."""
    src = {"phi": phi, "psi": psi}[shape_of]
    bounds = xi_state(psi, phi).boundaries
    vecs = []
    for lo, hi in SegmentedUnitVectors(bounds, ()).segments(psi.d):
        v = [0.0] * psi.d
        v[lo:hi] = _segment_shape(src.coeffs, lo, hi)
        vecs.append(tuple(v))
    return SegmentedUnitVectors(bounds, tuple(vecs))


def zeta_eta(psi: SchmidtVector, phi: SchmidtVector, units: SegmentedUnitVectors | None = None) -> tuple:
    """The pair (zeta, eta) with psi -> zeta and eta -> phi deterministic and P(zeta, eta) = P(psi, phi).

    Without ``units`` the target-shaped default applies, which yields (xi, phi).
    """
    _same_d(psi, phi)
    d = psi.d
    xi = xi_state(psi, phi)
    bounds = xi.boundaries
    if units is None:
        # target-shaped units: each eta segment is phi's own, so eta = phi and zeta = xi
        return xi.xi, phi
    if tuple(units.boundaries) != tuple(bounds):
        raise InvalidSegments(f"unit boundaries {units.boundaries} do not match {bounds}")
    if len(units.vectors) != len(bounds):
        raise InvalidSegments("one unit vector per segment is required")
    zeta, eta = [0.0] * d, [0.0] * d
    for j, ((lo, hi), vec) in enumerate(zip(units.segments(d), units.vectors)):
        vec = [float(x) for x in vec]
        if len(vec) != d:
            raise InvalidSegments(f"vectors[{j}] must have length {d}")
        if min(vec) < -TOL or abs(math.fsum(vec) - 1.0) > TOL:
            raise InvalidSegments(f"vectors[{j}] is not a nonnegative unit vector")
        if any(abs(x) > TOL for i, x in enumerate(vec) if not lo <= i < hi):
            raise InvalidSegments(f"vectors[{j}] has support outside its segment")
        inside = vec[lo:hi]
        if not (_majorized_by(_segment_shape(psi.coeffs, lo, hi), inside)
                and _majorized_by(inside, _segment_shape(phi.coeffs, lo, hi))):
            raise InvalidSegments(f"vectors[{j}] violates the per-segment majorization sandwich")
        mass_psi = math.fsum(psi.coeffs[lo:hi])
        mass_phi = math.fsum(phi.coeffs[lo:hi])
        for i in range(lo, hi):
            zeta[i] = mass_psi * vec[i]
            eta[i] = mass_phi * vec[i]
    return SchmidtVector.normalized(zeta), SchmidtVector.normalized(eta)


def chi_max(psi: SchmidtVector, p: float) -> SchmidtVector:
    """Most entangled state reachable from psi with probability p.

    Coefficients below the first are psi / p; when the remainder left for
    the first is too small, the top m entries are levelled to a common
    value with the smallest m that restores descending order.
    """
    d = psi.d
    lo = d * psi.coeffs[-1]
    if not (lo - TOL <= p <= 1.0 + TOL):
        raise ProbabilityOutOfRange(f"p = {p} outside [{lo:.17g}, 1]")
    p = min(p, 1.0)
    if p == 1.0:
        return psi
    chi = [0.0] + [c / p for c in psi.coeffs[1:]]
    m = 1
    while m < d:
        level = (1.0 - math.fsum(chi[m:])) / m
        if level >= chi[m] - TOL:
            break
        m += 1
    level = (1.0 - math.fsum(chi[m:])) / m
    chi[:m] = [level] * m
    return SchmidtVector.normalized(chi)


def chi_min(phi: SchmidtVector, p: float) -> SchmidtVector:
    """Least entangled state from which phi is reachable with probability p."""
    if not (0.0 < p <= 1.0 + TOL):
        raise ProbabilityOutOfRange(f"p = {p} outside (0, 1]")
    p = min(p, 1.0)
    if p == 1.0:
        return phi
    rest = [p * c for c in phi.coeffs[1:]]
    return SchmidtVector([1.0 - math.fsum(rest)] + rest)


def straight_path(psi: SchmidtVector, phi: SchmidtVector) -> BipartitePath:
    _same_d(psi, phi)
    return BipartitePath([(psi, phi)])


def _nondeterministic(psi: SchmidtVector, phi: SchmidtVector) -> float:
    _same_d(psi, phi)
    p = max_prob(psi, phi).p
    if p >= 1.0 - TOL or majorizes(phi, psi):
        raise DeterministicCase("psi converts to phi deterministically")
    return p


def most_entangled_path(psi: SchmidtVector, phi: SchmidtVector) -> BipartitePath:
    """Straight one-branch segment to chi_max, then a deterministic straight segment to phi."""
    p = _nondeterministic(psi, phi)
    return BipartitePath([psi, chi_max(psi, p), phi])


def least_entangled_path(psi: SchmidtVector, phi: SchmidtVector) -> BipartitePath:
    """Deterministic straight segment to chi_min, then a one-branch straight segment to phi."""
    p = _nondeterministic(psi, phi)
    return BipartitePath([psi, chi_min(phi, p), phi])


@dataclass(frozen=True)
class MeasurementOperatorSet:
    operators: tuple
    branch_probs: tuple
    corrections: tuple  # permutation applied by party B on each branch
    completeness_defect_min: float

    def branch_outputs(self, psi: SchmidtVector) -> list:
        x = schmidt_state_vector(psi)
        d = psi.d
        outs = []
        for m, perm in zip(self.operators, self.corrections):
            pb = np.eye(d)[list(perm)]
            outs.append(np.kron(m, pb) @ x)
        return outs


def schmidt_state_vector(psi: SchmidtVector) -> np.ndarray:
    d = psi.d
    x = np.zeros(d * d, dtype=complex)
    for i, c in enumerate(psi.coeffs):
        x[i * d + i] = math.sqrt(c)
    return x


def emit_measurement_operators(psi: SchmidtVector, phi: SchmidtVector, branch_probs: Sequence[float]) -> MeasurementOperatorSet:
    """Three Kraus operators on party A realizing psi -> phi for qutrit pairs.

    Branch i applies sqrt(p_i) D_phi P_i D_psi^-1, with P_1 the identity and
    P_2, P_3 the transpositions (1 3) and (2 3); party B undoes P_i.
    """
    _same_d(psi, phi)
    if psi.d != 3:
        raise InvalidInput("the measurement emitter is defined for d = 3 only")
    probs = [float(q) for q in branch_probs]
    if len(probs) != 3 or min(probs) < 0.0:
        raise InvalidInput("branch_probs must be three nonnegative numbers")
    p = max_prob(psi, phi).p
    if math.fsum(probs) > p + 1e-12:
        raise ProbabilityOutOfRange(f"branch probabilities sum to {math.fsum(probs)!r} > P = {p!r}")
    d_phi = np.diag(np.sqrt(phi.coeffs))
    d_psi_inv = np.diag(1.0 / np.sqrt(psi.coeffs))
    perms = ((0, 1, 2), (2, 1, 0), (0, 2, 1))
    ops = []
    for q, perm in zip(probs, perms):
        pm = np.eye(3)[list(perm)]
        ops.append(math.sqrt(q) * d_phi @ pm @ d_psi_inv)
    total = sum(m.conj().T @ m for m in ops)
    defect = float(eig_hermitian(np.eye(3) - total)[0][0])
    if defect < -1e-10:
        raise CompletenessViolation(f"sum of M^dagger M exceeds identity (min eigenvalue of defect {defect:.3e})")
    return MeasurementOperatorSet(tuple(ops), tuple(probs), perms, defect)
