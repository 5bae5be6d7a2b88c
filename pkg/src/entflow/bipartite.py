"""Schmidt vectors, tail-sum monotones, majorization and its lattice.

A bipartite pure state is identified (up to local unitaries) with its
Schmidt vector, sorted in nonincreasing order.  The tail sums
``E_l = sum_{i >= l} lambda_i`` are entanglement monotones, and the best
single-copy conversion probability is the smallest ratio of tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate
from typing import NamedTuple, Sequence

from .errors import (
    DegenerateInput,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidInput,
    InvariantViolation,
)

TOL = 1e-12


@dataclass(frozen=True)
class SchmidtVector:
    """Sorted Schmidt coefficients of a bipartite pure state.

    Coefficients may be supplied in any order; they are stored sorted
    descending.  ``allow_degenerate`` permits zero coefficients, which only
    arise on failure branches of protocols.
    """

    coeffs: tuple
    allow_degenerate: bool = False

    def __init__(self, coeffs: Sequence[float], allow_degenerate: bool = False):
        vals = [float(c) for c in coeffs]
        if not vals:
            raise InvalidInput("a Schmidt vector needs at least one coefficient")
        if any(not math.isfinite(c) for c in vals):
            raise InvalidInput("Schmidt coefficients must be finite")
        if min(vals) < -TOL:
            raise InvariantViolation(f"negative Schmidt coefficient {min(vals)!r}")
        vals = sorted((max(c, 0.0) for c in vals), reverse=True)
        total = math.fsum(vals)
        if abs(total - 1.0) > TOL:
            raise InvariantViolation(f"coefficients sum to {total!r}, not 1")
        if not allow_degenerate and vals[-1] <= 0.0:
            raise DegenerateInput("state is not fully entangled (zero Schmidt coefficient)")
        object.__setattr__(self, "coeffs", tuple(vals))
        object.__setattr__(self, "allow_degenerate", allow_degenerate)

    @classmethod
    def normalized(cls, weights: Sequence[float], allow_degenerate: bool = False) -> "SchmidtVector":
        total = math.fsum(weights)
        if total <= 0:
            raise InvalidInput("weights must have positive sum")
        return cls([w / total for w in weights], allow_degenerate)

    @classmethod
    def maximally_entangled(cls, d: int) -> "SchmidtVector":
        return cls([1.0 / d] * d)

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def tails(self) -> list[float]:
        """[E_1, ..., E_d] with E_1 fixed to exactly 1."""
        return tail_sums(self.coeffs)

    def prefix_sums(self) -> list[float]:
        return prefix_sums(self.coeffs)

    def close_to(self, other: "SchmidtVector", tol: float = TOL) -> bool:
        return self.d == other.d and all(abs(a - b) <= tol for a, b in zip(self.coeffs, other.coeffs))

    def to_json(self) -> dict:
        return {"d": self.d, "lambda": list(self.coeffs)}

    @classmethod
    def from_json(cls, obj) -> "SchmidtVector":
        if isinstance(obj, dict):
            if "lambda" not in obj:
                raise InvalidInput("SchmidtVector JSON needs a 'lambda' field")
            vec = cls(obj["lambda"], bool(obj.get("allow_degenerate", False)))
            if "d" in obj and int(obj["d"]) != vec.d:
                raise InvalidInput(f"field 'd' = {obj['d']} but {vec.d} coefficients given")
            return vec
        return cls(obj)

    def __repr__(self) -> str:
        return "SchmidtVector(" + ", ".join(f"{c:.6g}" for c in self.coeffs) + ")"


def tail_sums(coeffs: Sequence[float]) -> list[float]:
    tails = list(accumulate(reversed(coeffs)))[::-1]
    tails[0] = 1.0
    return tails


def prefix_sums(coeffs: Sequence[float]) -> list[float]:
    sums = list(accumulate(coeffs))
    sums[-1] = 1.0
    return sums


def _same_d(a: SchmidtVector, b: SchmidtVector) -> None:
    if a.d != b.d:
        raise DimensionMismatch(f"dimensions {a.d} and {b.d} differ")


def monotone_E(psi: SchmidtVector, l: int) -> float:
    """Tail sum E_l(psi) = sum of coefficients l..d (1-based)."""
    if not 1 <= l <= psi.d:
        raise IndexOutOfRange(f"l = {l} outside 1..{psi.d}")
    return psi.tails()[l - 1]


def majorizes(a: SchmidtVector, b: SchmidtVector) -> bool:
    """True iff b is majorized by a, i.e. b can be turned into a deterministically."""
    _same_d(a, b)
    return all(x >= y - TOL for x, y in zip(a.prefix_sums(), b.prefix_sums()))


def locc_possible(source: SchmidtVector, target: SchmidtVector) -> bool:
    return majorizes(target, source)


class ProbabilityResult(NamedTuple):
    p: float
    argmin_l: int


def _min_ratio(tails_psi: Sequence[float], tails_phi: Sequence[float]) -> ProbabilityResult:
    ratios = [x / y for x, y in zip(tails_psi, tails_phi)]
    best = min(ratios)
    for l, r in enumerate(ratios, start=1):
        if r <= best * (1.0 + TOL):
            return ProbabilityResult(best, l)
    raise AssertionError("unreachable")


def max_prob(psi: SchmidtVector, phi: SchmidtVector) -> ProbabilityResult:
    """Optimal probability to convert psi into phi and the smallest minimizing tail index."""
    _same_d(psi, phi)
    if phi.coeffs[-1] <= 0.0:
        raise DegenerateInput("target has a vanishing tail sum")
    return _min_ratio(psi.tails(), phi.tails())


def _from_prefix(sums: Sequence[float]) -> list[float]:
    return [s - prev for s, prev in zip(sums, [0.0] + list(sums[:-1]))]


def _pool_nonincreasing(values: Sequence[float]) -> list[float]:
    # merge adjacent runs until the averages are nonincreasing
    blocks: list[list[float]] = []  # [sum, count]
    for v in values:
        blocks.append([v, 1])
        while len(blocks) > 1 and blocks[-2][0] / blocks[-2][1] < blocks[-1][0] / blocks[-1][1] - TOL:
            s, c = blocks.pop()
            blocks[-1][0] += s
            blocks[-1][1] += c
    out: list[float] = []
    for s, c in blocks:
        out.extend([s / c] * c)
    return out


def _lattice_vector(coeffs: Sequence[float], a: SchmidtVector, b: SchmidtVector) -> SchmidtVector:
    clean = [max(c, 0.0) for c in coeffs]
    return SchmidtVector.normalized(clean, a.allow_degenerate or b.allow_degenerate)


def lattice_meet(a: SchmidtVector, b: SchmidtVector) -> SchmidtVector:
    """Greatest lower bound under majorization."""
    _same_d(a, b)
    below, above = majorizes(b, a), majorizes(a, b)
    if below and above:
        # equal up to tolerance: a fixed tie-break keeps the operation commutative
        return a if a.coeffs <= b.coeffs else b
    if below:
        return a
    if above:
        return b
    sums = [min(x, y) for x, y in zip(a.prefix_sums(), b.prefix_sums())]
    return _lattice_vector(_from_prefix(sums), a, b)


def lattice_join(a: SchmidtVector, b: SchmidtVector) -> SchmidtVector:
    """Least upper bound under majorization.

    The pointwise maximum of partial sums need not be concave, so the induced
    coefficients are flattened (runs that increase are averaged) until they
    are nonincreasing.
    """
    _same_d(a, b)
    above, below = majorizes(a, b), majorizes(b, a)
    if above and below:
        return a if a.coeffs >= b.coeffs else b
    if above:
        return a
    if below:
        return b
    sums = [max(x, y) for x, y in zip(a.prefix_sums(), b.prefix_sums())]
    return _lattice_vector(_pool_nonincreasing(_from_prefix(sums)), a, b)


def in_interval(chi: SchmidtVector, psi: SchmidtVector, phi: SchmidtVector) -> bool:
    """Membership of chi in the majorization interval [psi, phi]."""
    _same_d(chi, psi)
    _same_d(chi, phi)
    return majorizes(chi, psi) and majorizes(phi, chi)


class IntermediateVerdict(NamedTuple):
    verdict: bool
    l: int
    reason: str


def is_intermediate(psi: SchmidtVector, chi: SchmidtVector, phi: SchmidtVector, tol: float = 1e-10) -> IntermediateVerdict:
    """Decide whether chi is an optimal intermediate state for psi -> phi.

    ``l`` is the minimizing tail index of P(psi, phi).  A chi equal to either
    endpoint is rejected with reason ``"TrivialEndpoint"``.
    """
    _same_d(chi, psi)
    _same_d(chi, phi)
    direct = max_prob(psi, phi)
    if chi.close_to(psi) or chi.close_to(phi):
        return IntermediateVerdict(False, direct.argmin_l, "TrivialEndpoint")
    product = max_prob(psi, chi).p * max_prob(chi, phi).p
    ok = abs(product - direct.p) <= tol
    return IntermediateVerdict(ok, direct.argmin_l, "" if ok else "probability drops through chi")


def osbp_direct_possible(psi: SchmidtVector, phi: SchmidtVector) -> bool:
    """Whether psi -> phi is optimally realized by a single-successful-branch protocol."""
    _same_d(psi, phi)
    ratios = [x / y for x, y in zip(psi.coeffs, phi.coeffs)]
    last = ratios[-1]
    if any(last > r + TOL for r in ratios):
        return False
    p = max_prob(psi, phi).p
    return abs(p - last) <= TOL and p < 1.0 - TOL
