"""Generic multiqudit states written as local operators applied to a seed.

A state is ``g |seed>`` with ``g = g_1 x ... x g_n`` invertible; only the
Gram operator ``G = g^dagger g`` matters up to local unitaries.  All global
spectral quantities are reduced to per-party d x d problems.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidInput,
    InvariantViolation,
    NonDifferentiablePoint,
    NotLocal,
    NotPositiveDefinite,
    RankDeficientFrame,
    ScheduleNotMonotone,
)
from .paths import Path, _check_breakpoints, uniform_breakpoints
from .spectra import (
    as_matrix,
    congruence,
    eig_hermitian,
    hermitian_part,
    inv_sqrt,
    lambda_max,
    relative_eig_max,
    sqrt_pd,
)

MAX_AMPLITUDES = 4096
DEFAULT_SEED = 42


# ---------------------------------------------------------------- json helpers

def matrix_from_json(obj) -> np.ndarray:
    try:
        rows = [[complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in row] for row in obj]
    except (TypeError, ValueError, IndexError):
        raise InvalidInput("matrix entries must be numbers or [re, im] pairs") from None
    return as_matrix(rows)


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m)
    if np.all(np.abs(m.imag) == 0):
        return [[float(x) for x in row] for row in m.real]
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def vector_from_json(obj) -> np.ndarray:
    try:
        return np.array([complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in obj])
    except (TypeError, ValueError, IndexError):
        raise InvalidInput("vector entries must be numbers or [re, im] pairs") from None


def vector_to_json(v: np.ndarray) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]


# ---------------------------------------------------------------- data types

class LocalPSDOperator:
    """Product operator G = G_1 x ... x G_n with each factor Hermitian positive definite."""

    def __init__(self, parties: Sequence, normalized: bool = False):
        if len(parties) == 0:
            raise EmptyInput("need at least one party")
        mats = [hermitian_part(p) for p in parties]
        d = mats[0].shape[0]
        if any(m.shape != (d, d) for m in mats):
            raise DimensionMismatch("all parties must share one local dimension")
        for k, m in enumerate(mats):
            vals = eig_hermitian(m)[0]
            if vals[0] <= 0.0:
                raise NotPositiveDefinite(f"parties[{k}] is not positive definite")
            if normalized and abs(vals[-1] - 1.0) > 1e-12:
                raise InvariantViolation(f"parties[{k}] does not have largest eigenvalue 1")
        self.parties = tuple(mats)
        self.n = len(mats)
        self.d = d

    @classmethod
    def identity(cls, n: int, d: int) -> "LocalPSDOperator":
        return cls([np.eye(d)] * n)

    @classmethod
    def _trusted(cls, mats: Sequence[np.ndarray]) -> "LocalPSDOperator":
        # skips validation; for internally generated operators
        obj = cls.__new__(cls)
        obj.parties = tuple(mats)
        obj.n = len(mats)
        obj.d = mats[0].shape[0]
        return obj

    def normalized(self) -> "LocalPSDOperator":
        return LocalPSDOperator._trusted([m / lambda_max(m) for m in self.parties])

    def dense(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for m in self.parties:
            out = np.kron(out, m)
        return out

    def same_shape(self, other: "LocalPSDOperator") -> None:
        if self.n != other.n or self.d != other.d:
            raise DimensionMismatch(f"operators on {self.n}x{self.d} and {other.n}x{other.d} systems")

    def to_json(self) -> dict:
        return {"parties": [matrix_to_json(m) for m in self.parties]}

    @classmethod
    def from_json(cls, obj) -> "LocalPSDOperator":
        parties = obj["parties"] if isinstance(obj, dict) else obj
        return cls([matrix_from_json(p) for p in parties])


class ProductState:
    """Product vector x_1 x ... x x_n of unit vectors."""

    def __init__(self, factors: Sequence, normalize: bool = False):
        vecs = [np.array(f, dtype=complex).reshape(-1) for f in factors]
        if not vecs:
            raise EmptyInput("need at least one factor")
        if any(v.shape != vecs[0].shape for v in vecs):
            raise DimensionMismatch("all factors must share one dimension")
        for k, v in enumerate(vecs):
            nrm = np.linalg.norm(v)
            if normalize:
                if nrm == 0:
                    raise InvalidInput(f"factors[{k}] is zero")
                vecs[k] = v / nrm
            elif abs(nrm - 1.0) > 1e-12:
                raise InvariantViolation(f"factors[{k}] has norm {nrm!r}")
        self.factors = tuple(vecs)
        self.n = len(vecs)
        self.d = vecs[0].shape[0]

    def dense(self) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for v in self.factors:
            out = np.kron(out, v)
        return out

    def to_json(self) -> dict:
        return {"factors": [vector_to_json(v) for v in self.factors]}

    @classmethod
    def from_json(cls, obj) -> "ProductState":
        factors = obj["factors"] if isinstance(obj, dict) else obj
        return cls([vector_from_json(f) for f in factors], normalize=bool(isinstance(obj, dict) and obj.get("normalize")))


def apply_local(tensor: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Apply one matrix per tensor axis."""
    out = tensor
    for axis, m in enumerate(mats):
        out = np.moveaxis(np.tensordot(m, out, axes=([1], [axis])), 0, axis)
    return out


def random_seed_state(n: int, d: int, rng: np.random.Generator | int | None = DEFAULT_SEED) -> np.ndarray:
    """Haar-random pure state; generic with probability one."""
    rng = np.random.default_rng(rng)
    v = rng.normal(size=d**n) + 1j * rng.normal(size=d**n)
    return v / np.linalg.norm(v)


class GenericStateDescriptor:
    """The state g|seed>, stored as the seed amplitudes and G = g^dagger g."""

    def __init__(self, seed, op: LocalPSDOperator, generic_asserted: bool = True, n: int | None = None, d: int | None = None):
        amps = np.array(seed, dtype=complex).reshape(-1)
        n = op.n if n is None else n
        d = op.d if d is None else d
        if (n, d) != (op.n, op.d):
            raise DimensionMismatch(f"declared {n} parties of dimension {d}, operator has {op.n} x {op.d}")
        if d**n > MAX_AMPLITUDES:
            raise InvalidInput(f"d^n = {d**n} exceeds {MAX_AMPLITUDES}")
        if amps.size != d**n:
            raise DimensionMismatch(f"seed has {amps.size} amplitudes, expected {d**n}")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise InvariantViolation("seed must be normalized")
        self.seed = amps
        self.op = op
        self.n, self.d = n, d
        self.generic_asserted = bool(generic_asserted)

    def seed_tensor(self) -> np.ndarray:
        return self.seed.reshape((self.d,) * self.n)

    def norm_sq(self, op: LocalPSDOperator | None = None) -> float:
        """<seed| G |seed> = ||g seed||^2."""
        t = self.seed_tensor()
        mats = (op or self.op).parties
        return float(np.real(np.vdot(t, apply_local(t, mats))))

    def with_op(self, op: LocalPSDOperator) -> "GenericStateDescriptor":
        self.op.same_shape(op)
        return GenericStateDescriptor(self.seed, op, self.generic_asserted)

    def normalized(self) -> "GenericStateDescriptor":
        """Rescale G so that ||g seed|| = 1."""
        s = self.norm_sq()
        mats = list(self.op.parties)
        mats[0] = mats[0] / s
        return GenericStateDescriptor(self.seed, LocalPSDOperator._trusted(mats), self.generic_asserted)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "seed": vector_to_json(self.seed),
            "g": self.op.to_json(),
            "generic_asserted": self.generic_asserted,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GenericStateDescriptor":
        try:
            op = LocalPSDOperator.from_json(obj["g"])
            seed = vector_from_json(obj["seed"])
        except KeyError as exc:
            raise InvalidInput(f"state descriptor is missing field {exc.args[0]!r}") from None
        return cls(seed, op, bool(obj.get("generic_asserted", True)), obj.get("n"), obj.get("d"))


# ---------------------------------------------------------------- probabilities and monotones

class GenericProbability(NamedTuple):
    p: float
    exact: bool


def max_prob_generic(psi: GenericStateDescriptor, h_op: LocalPSDOperator) -> GenericProbability:
    """Optimal probability to reach h|seed> from psi = g|seed>.

    Exact when genericity is asserted, otherwise a lower bound.
    """
    psi.op.same_shape(h_op)
    lam = 1.0
    for g, h in zip(psi.op.parties, h_op.parties):
        lam *= relative_eig_max(g, h)
    p = psi.norm_sq(h_op) / psi.norm_sq() / lam
    return GenericProbability(min(p, 1.0), psi.generic_asserted)


def _check_product(psi: GenericStateDescriptor, x: ProductState) -> None:
    if x.n != psi.n or x.d != psi.d:
        raise DimensionMismatch(f"product state on {x.n}x{x.d}, descriptor on {psi.n}x{psi.d}")


def monotone_Ex(psi: GenericStateDescriptor, x: ProductState, normalized: bool = False) -> float:
    """<x|G|x> as a product of one-party expectations.

    With ``normalized`` the value refers to the normalized state, i.e. it is
    divided by ||g seed||^2.
    """
    _check_product(psi, x)
    val = 1.0
    for m, v in zip(psi.op.parties, x.factors):
        val *= float(np.real(np.vdot(v, m @ v)))
    return val / psi.norm_sq() if normalized else val


class ProductRatioMin(NamedTuple):
    closed_form: float
    minimizer: ProductState
    sampled: float | None = None
    refined: float | None = None


def _random_unit_vectors(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    v = rng.normal(size=(count, d)) + 1j * rng.normal(size=(count, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _quad(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ki,ij,kj->k", v.conj(), m, v))


def min_ratio_over_products(psi: GenericStateDescriptor, h_op: LocalPSDOperator, samples: int = 0,
                            refine: bool = False, rng: np.random.Generator | int | None = DEFAULT_SEED,
                            refine_steps: int = 200) -> ProductRatioMin:
    """Minimum over product states x of E_x(psi) / E_x(h seed), both normalized.

    The closed form evaluates the ratio at the product of per-party
    generalized eigenvectors (top eigenvectors of G_i^-1 H_i).  Optional
    random sampling gives an upper estimate that can be refined by
    generalized power iteration from the best sample.
    """
    psi.op.same_shape(h_op)
    norm_ratio = psi.norm_sq(h_op) / psi.norm_sq()
    best = []
    for g, h in zip(psi.op.parties, h_op.parties):
        w = inv_sqrt(g)
        vals, vecs = eig_hermitian(congruence(w, h))
        x = w @ vecs[:, -1]
        best.append(x / np.linalg.norm(x))
    x_star = ProductState(best, normalize=True)
    value = norm_ratio
    for g, h, v in zip(psi.op.parties, h_op.parties, x_star.factors):
        value *= float(np.real(np.vdot(v, g @ v)) / np.real(np.vdot(v, h @ v)))
    sampled = refined = None
    if samples:
        rng = np.random.default_rng(rng)
        total = np.full(samples, norm_ratio)
        draws = []
        for g, h in zip(psi.op.parties, h_op.parties):
            v = _random_unit_vectors(rng, samples, psi.d)
            draws.append(v)
            total *= _quad(g, v) / _quad(h, v)
        k = int(np.argmin(total))
        sampled = float(total[k])
        if refine:
            refined = norm_ratio
            for g, h, v in zip(psi.op.parties, h_op.parties, draws):
                x = v[k]
                for _ in range(refine_steps):
                    x = np.linalg.solve(g, h @ x)
                    x = x / np.linalg.norm(x)
                refined *= float(np.real(np.vdot(x, g @ x)) / np.real(np.vdot(x, h @ x)))
    return ProductRatioMin(float(value), x_star, sampled, refined)


def local_measurement_branches(psi: GenericStateDescriptor, party: int, kraus: Sequence,
                               g_factor: np.ndarray | None = None) -> list:
    """Outcomes of a local measurement on one party of g|seed>.

    ``g_factor`` is that party's g_i (default: the positive square root of
    G_i).  Returns (probability, post-measurement descriptor) per outcome,
    post states normalized.
    """
    if not 0 <= party < psi.n:
        raise InvalidInput(f"party {party} outside 0..{psi.n - 1}")
    g = sqrt_pd(psi.op.parties[party]) if g_factor is None else as_matrix(g_factor)
    if g.shape != (psi.d, psi.d):
        raise DimensionMismatch("g_factor has the wrong shape")
    before = psi.norm_sq()
    out = []
    for a in kraus:
        a = as_matrix(a)
        ag = a @ g
        mats = list(psi.op.parties)
        mats[party] = hermitian_part(ag.conj().T @ ag, tol=1e-9)
        post = GenericStateDescriptor(psi.seed, LocalPSDOperator._trusted(mats), psi.generic_asserted)
        p = post.norm_sq() / before
        out.append((p, post.normalized()))
    return out


def is_intermediate_generic(g_op: LocalPSDOperator, h_op: LocalPSDOperator, tol: float = 1e-10) -> bool:
    """Whether g|seed> is an optimal intermediate state for seed -> h|seed>."""
    g_op.same_shape(h_op)
    lhs = sum(math.log(relative_eig_max(g, h)) for g, h in zip(g_op.parties, h_op.parties))
    rhs = sum(math.log(lambda_max(h)) - math.log(lambda_max(g)) for g, h in zip(g_op.parties, h_op.parties))
    return abs(lhs - rhs) <= tol


def sufficient_conditions_check(g_op: LocalPSDOperator, h_op: LocalPSDOperator, tol: float = 1e-10) -> tuple:
    """Per-party commutation and ordering test for intermediate states.

    Each party must satisfy [G_i, H_i] = 0 and H_i/lmax(H_i) <= G_i/lmax(G_i).
    For qubits these conditions are also necessary; for larger d they are
    only sufficient.
    """
    g_op.same_shape(h_op)
    report = []
    for g, h in zip(g_op.parties, h_op.parties):
        gn = g / lambda_max(g)
        hn = h / lambda_max(h)
        comm = float(np.max(np.abs(gn @ hn - hn @ gn)))
        gap = float(eig_hermitian(gn - hn)[0][0])
        report.append({
            "commutator": comm,
            "min_gap_eigenvalue": gap,
            "commute": comm <= tol,
            "ordered": gap >= -tol,
        })
    holds = all(r["commute"] and r["ordered"] for r in report)
    return holds, report


# ---------------------------------------------------------------- paths of local operators

OpsFn = Callable[[float, int], list]


class OperatorPath(Path):
    """Path t -> G(t)|seed> given per segment by G(t) and optionally G'(t)."""

    family = "multipartite"

    def __init__(self, seed, n: int, d: int, ops: OpsFn, dops: OpsFn | None = None,
                 breakpoints: Sequence[float] | None = None, kind: str = "custom",
                 params: dict | None = None, generic_asserted: bool = True):
        self.seed = np.array(seed, dtype=complex).reshape(-1)
        if self.seed.size != d**n:
            raise DimensionMismatch(f"seed has {self.seed.size} amplitudes, expected {d**n}")
        if abs(np.linalg.norm(self.seed) - 1.0) > 1e-12:
            raise InvariantViolation("seed must be normalized")
        self.n, self.d = n, d
        self._ops = ops
        self._dops = dops
        bp = breakpoints or uniform_breakpoints(1)
        self.breakpoints = _check_breakpoints(bp, len(bp) - 1)
        self.kind = kind
        self.params = params or {}
        self.generic_asserted = generic_asserted
        self._start = [hermitian_part(m) for m in ops(0.0, 0)]

    def ops_on(self, seg: int, t: float) -> list:
        return self._ops(t, seg)

    def ops(self, t: float) -> list:
        return self._ops(t, self.segment_index(t))

    @property
    def has_analytic_derivative(self) -> bool:
        return self._dops is not None

    def dops_on(self, seg: int, t: float, step: float = 1e-5) -> list:
        if self._dops is not None:
            return self._dops(t, seg)
        a, b = self.segment_bounds(seg)
        h = min(step, (b - a) / 8)

        def diff(hh):
            if t - hh >= a and t + hh <= b:
                lo, hi = self._ops(t - hh, seg), self._ops(t + hh, seg)
                return [(y - x) / (2 * hh) for x, y in zip(lo, hi)]
            sgn = 1.0 if t + 2 * hh <= b else -1.0
            f0, f1, f2 = self._ops(t, seg), self._ops(t + sgn * hh, seg), self._ops(t + 2 * sgn * hh, seg)
            return [sgn * (-3 * x + 4 * y - z) / (2 * hh) for x, y, z in zip(f0, f1, f2)]

        coarse, fine = diff(h), diff(h / 2)
        return [(4 * f - c) / 3 for c, f in zip(coarse, fine)]

    def norm_sq_of(self, mats: Sequence[np.ndarray]) -> float:
        t = self.seed.reshape((self.d,) * self.n)
        return float(np.real(np.vdot(t, apply_local(t, mats))))

    def local_prob(self, seg: int, t1: float, t2: float) -> float:
        return self._prob_between(self._ops(t1, seg), self._ops(t2, seg))

    def pair_prob(self, t1: float, t2: float) -> float:
        return self._prob_between(self.ops(t1), self.ops(t2))

    def _prob_between(self, g1: list, g2: list) -> float:
        lam = 1.0
        for a, b in zip(g1, g2):
            if a is b or np.array_equal(a, b):
                continue
            lam *= relative_eig_max(a, b)
        return min(self.norm_sq_of(g2) / self.norm_sq_of(g1) / lam, 1.0)

    def state(self, t: float) -> GenericStateDescriptor:
        return GenericStateDescriptor(self.seed, LocalPSDOperator(self.ops(t)), self.generic_asserted)

    @property
    def start_ops(self) -> list:
        return self._start

    def reverse(self) -> "OperatorPath":
        m = self.n_segments
        fwd_ops, fwd_dops = self._ops, self._dops
        breaks = [1.0 - x for x in reversed(self.breakpoints)]
        breaks[0], breaks[-1] = 0.0, 1.0

        def ops(t, seg):
            return fwd_ops(1.0 - t, m - 1 - seg)

        dops = None
        if fwd_dops is not None:
            def dops(t, seg):
                return [-x for x in fwd_dops(1.0 - t, m - 1 - seg)]

        rev = OperatorPath(self.seed, self.n, self.d, ops, dops, breaks, "reversed",
                           {"path": self}, self.generic_asserted)
        return rev

    def to_json(self) -> dict:
        base = {"family": "multipartite", "kind": self.kind, "n": self.n, "d": self.d,
                "seed": vector_to_json(self.seed), "generic_asserted": self.generic_asserted}
        if self.kind == "reversed":
            base["path"] = self.params["path"].to_json()
            return base
        for key, val in self.params.items():
            base[key] = val
        return base


def path_optimality_defect(path: OperatorPath, t: float) -> float:
    """Pointwise optimality defect of a local-operator path.

    With G(t) rebased to the path start and scaled so each party has top
    eigenvalue 1, this is the sum over parties of lmax(G_i^-1/2 G_i' G_i^-1/2);
    the path is optimal iff it vanishes for all t.
    """
    if path.is_joint(t):
        raise NonDifferentiablePoint(f"t = {t} is a segment joint")
    seg = path.segment_index(t)
    mats = path.ops_on(seg, t)
    dmats = path.dops_on(seg, t)
    total = 0.0
    for g0, g, gp in zip(path.start_ops, mats, dmats):
        if not np.any(gp):
            continue
        w = inv_sqrt(g)
        speed = lambda_max(congruence(w, hermitian_part(gp, tol=1e-8)))
        w0 = inv_sqrt(g0)
        vals, vecs = eig_hermitian(congruence(w0, g))
        top = vals[-1]
        block = vecs[:, vals >= top * (1.0 - 1e-9)]
        growth = lambda_max(congruence(w0, hermitian_part(gp, tol=1e-8)) if block.shape[1] == vecs.shape[1]
                            else block.conj().T @ congruence(w0, hermitian_part(gp, tol=1e-8)) @ block)
        total += speed - growth / top
    return max(total, 0.0)


def defect_scale(path: OperatorPath, t: float) -> float:
    """Largest per-party eigenvalue magnitude of G'(t), used to scale the optimality threshold."""
    seg = path.segment_index(t)
    return max(float(np.max(np.abs(eig_hermitian(hermitian_part(m, tol=1e-8))[0]))) for m in path.dops_on(seg, t))


# schedules ---------------------------------------------------------------

class Schedule:
    """Eigenvalue schedule r(t) for one party, r(0) = 1 and r(1) = r_final."""

    def __call__(self, t: float, r_final: np.ndarray) -> tuple:
        raise NotImplementedError

    knots: tuple = ()


class LinearSchedule(Schedule):
    def __call__(self, t, r_final):
        return 1.0 - (1.0 - r_final) * t, -(1.0 - r_final)

    def to_json(self):
        return "linear"


class ExpSchedule(Schedule):
    def __call__(self, t, r_final):
        r = r_final**t
        return r, r * np.log(r_final)

    def to_json(self):
        return "exp"


class TabulatedSchedule(Schedule):
    """Piecewise-linear eigenvalue schedule given at knot times."""

    def __init__(self, knots: Sequence[float], values: Sequence[Sequence[float]]):
        self.knots = tuple(float(k) for k in knots)
        self.values = np.array(values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != len(self.knots):
            raise InvalidInput("tabulated schedule needs one value row per knot")
        _check_breakpoints(self.knots, len(self.knots) - 1)

    def __call__(self, t, r_final):
        k = min(max(np.searchsorted(self.knots, t, side="right") - 1, 0), len(self.knots) - 2)
        t0, t1 = self.knots[k], self.knots[k + 1]
        s = (t - t0) / (t1 - t0)
        r = (1 - s) * self.values[k] + s * self.values[k + 1]
        return r, (self.values[k + 1] - self.values[k]) / (t1 - t0)

    def segment_call(self, t, seg):
        t0, t1 = self.knots[seg], self.knots[seg + 1]
        s = (t - t0) / (t1 - t0)
        r = (1 - s) * self.values[seg] + s * self.values[seg + 1]
        return r, (self.values[seg + 1] - self.values[seg]) / (t1 - t0)

    def to_json(self):
        return {"t": list(self.knots), "values": self.values.tolist()}


class CallableSchedule(Schedule):
    """User function r(t, r_final); derivative by central differences."""

    def __init__(self, fn: Callable):
        self.fn = fn

    def __call__(self, t, r_final):
        h = 1e-5
        lo, hi = max(t - h, 0.0), min(t + h, 1.0)
        r = np.asarray(self.fn(t, r_final), dtype=float)
        dr = (np.asarray(self.fn(hi, r_final)) - np.asarray(self.fn(lo, r_final))) / (hi - lo)
        return r, dr


def _schedule_from(obj) -> Schedule:
    if isinstance(obj, Schedule):
        return obj
    if obj == "linear":
        return LinearSchedule()
    if obj == "exp":
        return ExpSchedule()
    if callable(obj):
        return CallableSchedule(obj)
    if isinstance(obj, dict) and "t" in obj and "values" in obj:
        return TabulatedSchedule(obj["t"], obj["values"])
    raise InvalidInput(f"schedule: unknown form {obj!r}")


def _spectral_target(m: np.ndarray) -> tuple:
    # eigenvalues descending, top scaled to exactly 1
    vals, vecs = eig_hermitian(m)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    r = vals / vals[0]
    r[0] = 1.0
    return r, vecs


def _default_seed(n: int, d: int, seed) -> np.ndarray:
    return random_seed_state(n, d) if seed is None else np.array(seed, dtype=complex).reshape(-1)


def make_diag_interp_path(g_op: LocalPSDOperator, schedule="linear", seed=None,
                          generic_asserted: bool = True) -> OperatorPath:
    """Commuting path G_i(t) = U_i diag(r_i(t)) U_i^dagger from the identity to the normalized target.

    ``schedule`` is "linear", "exp", a Schedule, a callable r(t, r_final), a
    tabulated dict, or a list with one of those per party.  Every r_k must
    be nonincreasing with r_k(0) = 1 and r_k(1) equal to the normalized
    target eigenvalue.  Without ``seed`` a fixed Haar-random seed is used.
    """
    n, d = g_op.n, g_op.d
    raw = list(schedule) if isinstance(schedule, (list, tuple)) else [schedule] * n
    if len(raw) != n:
        raise InvalidInput(f"need {n} schedules, got {len(raw)}")
    scheds = [_schedule_from(s) for s in raw]
    targets = [_spectral_target(m) for m in g_op.parties]
    knots = sorted({0.0, 1.0} | {k for s in scheds for k in s.knots})
    grid = sorted(set(np.linspace(0.0, 1.0, 201)) | set(knots))
    for k, (s, (r_final, _)) in enumerate(zip(scheds, targets)):
        vals = np.array([s(t, r_final)[0] for t in grid])
        if np.any(np.abs(vals[0] - 1.0) > 1e-9) or np.any(np.abs(vals[-1] - r_final) > 1e-9):
            raise ScheduleNotMonotone(f"schedule {k} must run from 1 to the target eigenvalues")
        if np.any(np.diff(vals, axis=0) > 1e-12):
            raise ScheduleNotMonotone(f"schedule {k} increases somewhere")
    breaks = tuple(knots)

    def evaluate(t, seg):
        out, dout = [], []
        for s, (r_final, u) in zip(scheds, targets):
            if isinstance(s, TabulatedSchedule):
                own = np.searchsorted(s.knots, breaks[seg], side="right") - 1
                r, dr = s.segment_call(t, min(own, len(s.knots) - 2))
            else:
                r, dr = s(t, r_final)
            out.append((u * r) @ u.conj().T)
            dout.append((u * dr) @ u.conj().T)
        return out, dout

    params = {"target": g_op.to_json(), "schedule": [getattr(s, "to_json", lambda: "callable")() for s in scheds]}
    return OperatorPath(_default_seed(n, d, seed), n, d, lambda t, seg: evaluate(t, seg)[0],
                        lambda t, seg: evaluate(t, seg)[1], breaks, "diag_interp", params, generic_asserted)


def make_sequential_twofold_path(g_op: LocalPSDOperator, n: int | None = None, seed=None,
                                 generic_asserted: bool = True) -> OperatorPath:
    """Change one party at a time; during stage i party i follows lambda^(n t - i + 1).

    Both this path and its reverse are optimal.
    """
    n = g_op.n if n is None else n
    if n != g_op.n:
        raise DimensionMismatch(f"operator has {g_op.n} parties, not {n}")
    d = g_op.d
    targets = [_spectral_target(m) for m in g_op.parties]
    finals = [(u * r) @ u.conj().T for r, u in targets]
    eye = np.eye(d, dtype=complex)
    zero = np.zeros((d, d), dtype=complex)

    def ops(t, seg):
        s = n * t - seg
        out = []
        for j, (r, u) in enumerate(targets):
            if j < seg:
                out.append(finals[j])
            elif j == seg:
                out.append((u * r**s) @ u.conj().T)
            else:
                out.append(eye)
        return out

    def dops(t, seg):
        s = n * t - seg
        out = []
        for j, (r, u) in enumerate(targets):
            out.append((u * (n * np.log(r) * r**s)) @ u.conj().T if j == seg else zero)
        return out

    return OperatorPath(_default_seed(g_op.n, d, seed), g_op.n, d, ops, dops, uniform_breakpoints(n),
                        "sequential_twofold", {"target": g_op.to_json()}, generic_asserted)


def _qutrit_rotation(t):
    s, c = math.sin(t / 2), math.cos(t / 2)
    u = np.array([[1, 0, 0], [0, s, c], [0, -c, s]], dtype=complex)
    du = 0.5 * np.array([[0, 0, 0], [0, c, -s], [0, s, c]], dtype=complex)
    return u, du


def qutrit_counterexample_path(n: int = 4, seed=None, generic_asserted: bool = True) -> OperatorPath:
    """Optimal qutrit path whose reverse is not optimal.

    Party 1 follows g(t) = u(t) D(t) u(t)^dagger with D(t) = diag(1, 1 - t/4, 1 - t/2)
    and u(t) a rotation by t/2 in the span of the last two basis vectors;
    the other parties stay fixed.
    """
    if n < 1:
        raise InvalidInput("need at least one party")
    eye = np.eye(3, dtype=complex)
    zero = np.zeros((3, 3), dtype=complex)

    def ops(t, seg):
        u, _ = _qutrit_rotation(t)
        dd = np.array([1.0, (1 - t / 4) ** 2, (1 - t / 2) ** 2])
        return [(u * dd) @ u.conj().T] + [eye] * (n - 1)

    def dops(t, seg):
        u, du = _qutrit_rotation(t)
        dd = np.array([1.0, (1 - t / 4) ** 2, (1 - t / 2) ** 2])
        ddd = np.array([0.0, -0.5 * (1 - t / 4), -(1 - t / 2)])
        g1 = (du * dd) @ u.conj().T + (u * ddd) @ u.conj().T + (u * dd) @ du.conj().T
        return [g1] + [zero] * (n - 1)

    return OperatorPath(_default_seed(n, 3, seed), n, 3, ops, dops, (0.0, 1.0), "qutrit_counterexample",
                        {}, generic_asserted)


def make_sampled_path(samples: Sequence, seed=None, generic_asserted: bool = True) -> OperatorPath:
    """Piecewise-linear interpolation of G between (t, LocalPSDOperator) samples."""
    pts = sorted(((float(t), op) for t, op in samples), key=lambda p: p[0])
    if len(pts) < 2:
        raise InvalidInput("a sampled path needs at least two samples")
    times = [p[0] for p in pts]
    ops_list = [p[1] for p in pts]
    for op in ops_list[1:]:
        ops_list[0].same_shape(op)
    n, d = ops_list[0].n, ops_list[0].d
    breaks = _check_breakpoints(times, len(times) - 1)

    def ops(t, seg):
        t0, t1 = breaks[seg], breaks[seg + 1]
        s = (t - t0) / (t1 - t0)
        return [(1 - s) * a + s * b for a, b in zip(ops_list[seg].parties, ops_list[seg + 1].parties)]

    def dops(t, seg):
        t0, t1 = breaks[seg], breaks[seg + 1]
        return [(b - a) / (t1 - t0) for a, b in zip(ops_list[seg].parties, ops_list[seg + 1].parties)]

    params = {"samples": [{"t": t, **op.to_json()} for t, op in pts]}
    return OperatorPath(_default_seed(n, d, seed), n, d, ops, dops, breaks, "sampled", params, generic_asserted)


def operator_path_from_json(obj: dict) -> OperatorPath:
    kind = obj.get("kind")
    seed = vector_from_json(obj["seed"]) if "seed" in obj else None
    asserted = bool(obj.get("generic_asserted", True))
    if kind == "diag_interp":
        return make_diag_interp_path(LocalPSDOperator.from_json(obj["target"]), obj.get("schedule", "linear"),
                                     seed, asserted)
    if kind == "sequential_twofold":
        return make_sequential_twofold_path(LocalPSDOperator.from_json(obj["target"]), seed=seed,
                                            generic_asserted=asserted)
    if kind == "qutrit_counterexample":
        return qutrit_counterexample_path(int(obj.get("n", 4)), seed, asserted)
    if kind == "sampled":
        samples = [(s["t"], LocalPSDOperator.from_json(s)) for s in obj["samples"]]
        return make_sampled_path(samples, seed, asserted)
    if kind == "reversed":
        return operator_path_from_json(obj["path"]).reverse()
    raise InvalidInput(f"kind: unknown multipartite path kind {kind!r}")


# ---------------------------------------------------------------- fingerprints

def local_frame(d: int) -> list:
    """d^2 unit vectors whose projectors span the d x d Hermitian matrices.

    For qubits: |0>, |1>, |+>, |+i>.
    """
    eye = np.eye(d, dtype=complex)
    frame = [eye[j] for j in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            frame.append((eye[j] + eye[k]) / math.sqrt(2))
            frame.append((eye[j] + 1j * eye[k]) / math.sqrt(2))
    return frame


def product_frame(n: int, d: int) -> list:
    states = [[]]
    frame = local_frame(d)
    for _ in range(n):
        states = [s + [v] for s in states for v in frame]
    return [ProductState(s) for s in states]


def fingerprint(G, states: Sequence[ProductState]) -> list:
    """Values <x|G|x> for a LocalPSDOperator or a dense operator G."""
    out = []
    for x in states:
        if isinstance(G, LocalPSDOperator):
            val = 1.0
            for m, v in zip(G.parties, x.factors):
                val *= float(np.real(np.vdot(v, m @ v)))
        else:
            v = x.dense()
            val = float(np.real(np.vdot(v, np.asarray(G) @ v)))
        out.append((x, val))
    return out


def _features(v: np.ndarray) -> np.ndarray:
    # <v|G|v> is linear in (G_aa, Re G_ab, Im G_ab for a < b)
    outer = np.outer(v.conj(), v)
    iu = np.triu_indices(v.size, 1)
    return np.concatenate([np.real(np.diag(outer)), 2 * np.real(outer[iu]), -2 * np.imag(outer[iu])])


def reconstruct_G_from_fingerprint(values: Sequence, n: int, d: int, as_local: bool = False):
    """Recover the operator G from samples <x|G|x> on product states.

    Returns a dense Hermitian matrix, or a LocalPSDOperator when
    ``as_local`` is set and G factorizes.
    """
    dim = d**n
    if dim * dim > 4096:
        raise InvalidInput(f"reconstruction limited to (d^n)^2 <= 4096 unknowns, got {dim * dim}")
    rows, rhs = [], []
    for x, val in values:
        if x.n != n or x.d != d:
            raise DimensionMismatch("product state shape does not match n, d")
        rows.append(_features(x.dense()))
        rhs.append(float(val))
    if not rows:
        raise EmptyInput("no fingerprint values")
    a = np.array(rows)
    sing = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(sing > sing[0] * 1e-10)) if sing.size else 0
    if rank < dim * dim:
        raise RankDeficientFrame(f"product projectors span {rank} of {dim * dim} dimensions")
    coef = np.linalg.lstsq(a, np.array(rhs), rcond=None)[0]
    g = np.diag(coef[:dim]).astype(complex)
    iu = np.triu_indices(dim, 1)
    m = len(iu[0])
    g[iu] = coef[dim:dim + m] + 1j * coef[dim + m:]
    g[(iu[1], iu[0])] = np.conj(g[iu])
    vals, vecs = np.linalg.eigh(g)
    floor = 1e-12 * max(vals[-1], 1e-300)
    if vals[0] <= floor:
        warnings.warn("reconstructed operator was not positive definite; eigenvalues clipped", stacklevel=2)
        g = (vecs * np.maximum(vals, floor)) @ vecs.conj().T
    if as_local:
        return factorize_local(g, n, d)
    return g


def factorize_local(g: np.ndarray, n: int, d: int, tol: float = 1e-8) -> LocalPSDOperator:
    """Split a dense product operator into its factors via partial traces."""
    dense = np.asarray(g, dtype=complex)
    total = np.trace(dense).real
    factors = [_partial_trace_keep(dense, n, d, i) for i in range(n)]
    mats = [factors[0] / total ** (n - 1)] + factors[1:]
    op = LocalPSDOperator(mats)
    resid = float(np.max(np.abs(op.dense() - dense)))
    if resid > tol * max(float(np.max(np.abs(dense))), 1.0):
        raise NotLocal(f"operator is not a product across parties (residual {resid:.3e})")
    return op


def _partial_trace_keep(dense: np.ndarray, n: int, d: int, keep: int) -> np.ndarray:
    t = dense.reshape((d,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for j in range(n):
        if j != keep:
            cols[j] = rows[j]
    subscripts = "".join(rows) + "".join(cols) + "->" + rows[keep] + cols[keep]
    return np.einsum(subscripts, t)
