"""Piecewise paths of states on t in [0, 1].

A path is a list of segments with breakpoints ``0 = t_0 < ... < t_m = 1``.
Each segment is smooth on its closed interval; at a joint the right-hand
segment owns the point, except at t = 1.
"""

from __future__ import annotations

import bisect
from typing import Sequence

from .bipartite import SchmidtVector, _min_ratio, tail_sums
from .errors import DimensionMismatch, InvalidInput, InvalidSegments

JOINT_TOL = 1e-12


def _check_breakpoints(breaks: Sequence[float], count: int) -> tuple:
    b = tuple(float(x) for x in breaks)
    if len(b) != count + 1:
        raise InvalidSegments(f"{count} segments need {count + 1} breakpoints, got {len(b)}")
    if b[0] != 0.0 or b[-1] != 1.0:
        raise InvalidSegments("breakpoints must start at 0 and end at 1")
    if any(y <= x for x, y in zip(b, b[1:])):
        raise InvalidSegments("breakpoints must be strictly increasing")
    return b


def uniform_breakpoints(count: int) -> tuple:
    return tuple([k / count for k in range(count)] + [1.0])


class Path:
    """Common interface used by the survival engine."""

    family = ""
    breakpoints: tuple = (0.0, 1.0)

    @property
    def n_segments(self) -> int:
        return len(self.breakpoints) - 1

    def segment_bounds(self, seg: int) -> tuple:
        return self.breakpoints[seg], self.breakpoints[seg + 1]

    def segment_index(self, t: float) -> int:
        if not 0.0 <= t <= 1.0:
            raise InvalidInput(f"time {t} outside [0, 1]")
        if t >= 1.0:
            return self.n_segments - 1
        return bisect.bisect_right(self.breakpoints, t) - 1

    def interior_joints(self) -> tuple:
        return self.breakpoints[1:-1]

    def is_joint(self, t: float) -> bool:
        return any(abs(t - j) <= JOINT_TOL for j in self.interior_joints())

    def local_prob(self, seg: int, t1: float, t2: float) -> float:
        """Optimal probability from the state at t1 to the state at t2, both on segment ``seg``."""
        raise NotImplementedError

    def pair_prob(self, t1: float, t2: float) -> float:
        """Optimal probability from the state at t1 to the state at t2 (any segments)."""
        raise NotImplementedError

    def state(self, t: float):
        raise NotImplementedError

    def reverse(self) -> "Path":
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class BipartitePath(Path):
    """Concatenation of straight segments between Schmidt vectors."""

    family = "bipartite"

    def __init__(self, waypoints_or_segments, breakpoints: Sequence[float] | None = None):
        segs = list(waypoints_or_segments)
        if not segs:
            raise InvalidSegments("a path needs at least one segment")
        if all(isinstance(s, SchmidtVector) for s in segs):
            if len(segs) < 2:
                raise InvalidSegments("need at least two waypoints")
            segs = list(zip(segs[:-1], segs[1:]))
        self.segments = [(a, b) for a, b in segs]
        d = self.segments[0][0].d
        for k, (a, b) in enumerate(self.segments):
            if a.d != d or b.d != d:
                raise DimensionMismatch("all waypoints must share one dimension")
            if k and not a.close_to(self.segments[k - 1][1]):
                raise InvalidSegments(f"segment {k} does not start where segment {k - 1} ends")
        self.d = d
        count = len(self.segments)
        self.breakpoints = _check_breakpoints(breakpoints or uniform_breakpoints(count), count)
        self._tails = [(tail_sums(a.coeffs), tail_sums(b.coeffs)) for a, b in self.segments]

    def _local(self, seg: int, t: float) -> float:
        a, b = self.segment_bounds(seg)
        return (t - a) / (b - a)

    def coeffs_on(self, seg: int, t: float) -> list:
        s = self._local(seg, t)
        a, b = self.segments[seg]
        return [(1.0 - s) * x + s * y for x, y in zip(a.coeffs, b.coeffs)]

    def tails_on(self, seg: int, t: float) -> list:
        s = self._local(seg, t)
        ta, tb = self._tails[seg]
        out = [(1.0 - s) * x + s * y for x, y in zip(ta, tb)]
        out[0] = 1.0
        return out

    def tail_slopes(self, seg: int) -> list:
        a, b = self.segment_bounds(seg)
        ta, tb = self._tails[seg]
        return [(y - x) / (b - a) for x, y in zip(ta, tb)]

    def local_prob(self, seg: int, t1: float, t2: float) -> float:
        return _min_ratio(self.tails_on(seg, t1), self.tails_on(seg, t2)).p

    def tails_at(self, t: float) -> list:
        return self.tails_on(self.segment_index(t), t)

    def pair_prob(self, t1: float, t2: float) -> float:
        return _min_ratio(self.tails_at(t1), self.tails_at(t2)).p

    def state(self, t: float) -> SchmidtVector:
        seg = self.segment_index(t)
        return SchmidtVector.normalized(self.coeffs_on(seg, t))

    @property
    def start(self) -> SchmidtVector:
        return self.segments[0][0]

    @property
    def end(self) -> SchmidtVector:
        return self.segments[-1][1]

    def waypoints(self) -> list:
        return [self.segments[0][0]] + [b for _, b in self.segments]

    def reverse(self) -> "BipartitePath":
        segs = [(b, a) for a, b in reversed(self.segments)]
        breaks = [1.0 - x for x in reversed(self.breakpoints)]
        breaks[0], breaks[-1] = 0.0, 1.0
        return BipartitePath(segs, breaks)

    def to_json(self) -> dict:
        return {
            "kind": "straight" if len(self.segments) == 1 else "piecewise",
            "family": "bipartite",
            "breakpoints": list(self.breakpoints),
            "segments": [{"kind": "straight", "from": a.to_json(), "to": b.to_json()} for a, b in self.segments],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BipartitePath":
        try:
            raw = obj["segments"]
        except (KeyError, TypeError):
            raise InvalidInput("bipartite path JSON needs a 'segments' list") from None
        segs = []
        for k, s in enumerate(raw):
            if s.get("kind", "straight") != "straight":
                raise InvalidInput(f"segments[{k}].kind: only 'straight' segments are supported")
            segs.append((SchmidtVector.from_json(s["from"]), SchmidtVector.from_json(s["to"])))
        return cls(segs, obj.get("breakpoints"))


def path_from_json(obj: dict) -> Path:
    if not isinstance(obj, dict):
        raise InvalidInput("path JSON must be an object")
    family = obj.get("family", "bipartite")
    if family == "bipartite":
        return BipartitePath.from_json(obj)
    if family == "multipartite":
        from .multipartite import operator_path_from_json

        return operator_path_from_json(obj)
    raise InvalidInput(f"family: unknown path family {family!r}")
