"""Finite interval unions on the real line, generative set families, and
thickness classification.

A set is *thick* when some window length L and density gamma > 0 satisfy
|E ∩ [x, x+L]| >= gamma*L for every x, and *weakly thick* when
liminf_{x->+inf} |E ∩ [-x, x]|/x > 0.  Intervals are treated up to null
sets, so closed/open endpoint distinctions are ignored and touching
intervals merge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

Interval = tuple[float, float]

# Numeric thickness probe: the exists-gamma-exists-L search runs on this
# fixed grid; a finite grid yields a falsifiable report, never a proof.
PROBE_L_GRID = [2.0**j for j in range(-3, 7)]
PROBE_GAMMA_GRID = [0.01 * g for g in range(1, 51)]
WEAK_TRUE_FLOOR = 0.02
WEAK_FALSE_CEILING = 0.005


class HorizonError(ValueError):
    """A generated set was not expanded past the requested window."""


def _normalize(intervals: Sequence[Interval]) -> tuple[Interval, ...]:
    """Sort by left endpoint, drop empty intervals, merge touching ones."""
    items = sorted((float(a), float(b)) for a, b in intervals if b > a)
    merged: list[Interval] = []
    for a, b in items:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return tuple(merged)


@dataclass(frozen=True)
class HalfLine:
    a: float = 0.0

    def intervals_within(self, horizon: float) -> list[Interval]:
        return [(max(self.a, -horizon), horizon)] if self.a < horizon else []


@dataclass(frozen=True)
class Bounded:
    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("Bounded family needs R > 0")

    def intervals_within(self, horizon: float) -> list[Interval]:
        r = min(self.R, horizon)
        return [(-r, r)]


@dataclass(frozen=True)
class PeriodicPattern:
    """Union over all integers j of [j*x0, (j + 1/2)*x0]."""

    x0: float

    def __post_init__(self):
        if self.x0 <= 0:
            raise ValueError("PeriodicPattern needs x0 > 0")

    def intervals_within(self, horizon: float) -> list[Interval]:
        j0 = math.floor(-horizon / self.x0) - 1
        j1 = math.ceil(horizon / self.x0) + 1
        out = []
        for j in range(j0, j1 + 1):
            a, b = j * self.x0, (j + 0.5) * self.x0
            a, b = max(a, -horizon), min(b, horizon)
            if b > a:
                out.append((a, b))
        return out


@dataclass(frozen=True)
class DyadicGap:
    """Union over j >= 1 of [2^j, 2^(j+1) - a_j] and its reflection.

    The gap sequence is a_j = coeff*j (rule "linear") or a_j = coeff
    (rule "constant"); validity requires 0 < a_j <= 2^(j-1).
    """

    rule: str = "linear"
    coeff: float = 1.0

    def __post_init__(self):
        if self.rule not in ("linear", "constant"):
            raise ValueError(f"unknown dyadic gap rule {self.rule!r}")
        if self.coeff <= 0:
            raise ValueError("DyadicGap needs coeff > 0")

    def a(self, j: int) -> float:
        return self.coeff * j if self.rule == "linear" else self.coeff

    @property
    def bounded_gaps(self) -> bool:
        return self.rule == "constant"

    def intervals_within(self, horizon: float) -> list[Interval]:
        out = []
        j = 1
        while 2.0**j < horizon:
            aj = self.a(j)
            if not 0 < aj <= 2.0 ** (j - 1):
                raise ValueError(f"dyadic gap a_{j}={aj} outside (0, 2^(j-1)]")
            lo, hi = 2.0**j, 2.0 ** (j + 1) - aj
            hi = min(hi, horizon)
            if hi > lo:
                out.append((lo, hi))
                out.append((-hi, -lo))
            j += 1
        return out


@dataclass(frozen=True)
class PolynomialGap:
    """Union over j >= 1 of [j, j + (j+1)^(-eps)]."""

    eps: float

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("PolynomialGap needs eps > 0")

    def intervals_within(self, horizon: float) -> list[Interval]:
        out = []
        for j in range(1, int(math.floor(horizon)) + 1):
            hi = min(j + (j + 1.0) ** (-self.eps), horizon)
            if hi > j:
                out.append((float(j), hi))
        return out


Family = Union[HalfLine, Bounded, PeriodicPattern, DyadicGap, PolynomialGap]


@dataclass(frozen=True)
class RealSet:
    """A finite union of disjoint intervals, optionally backed by a family.

    For generated sets `intervals` is the materialization inside
    [-horizon, horizon]; expanding the horizon never changes the
    intersection with windows inside the old horizon.
    """

    intervals: tuple[Interval, ...]
    family: Optional[Family] = None
    horizon: float = math.inf

    @staticmethod
    def from_intervals(intervals: Sequence[Interval]) -> "RealSet":
        return RealSet(_normalize(intervals))

    @staticmethod
    def from_family(family: Family, horizon: float) -> "RealSet":
        if horizon <= 0 or not math.isfinite(horizon):
            raise ValueError("family materialization needs a finite horizon > 0")
        return RealSet(_normalize(family.intervals_within(horizon)), family, horizon)

    def expanded(self, horizon: float) -> "RealSet":
        """Return a copy materialized out to at least `horizon`."""
        if self.family is None or horizon <= self.horizon:
            return self
        return RealSet.from_family(self.family, horizon)

    def require_horizon(self, x: float) -> None:
        if x > self.horizon:
            raise HorizonError(
                f"window reaches {x:g} but set is materialized to {self.horizon:g}"
            )

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def to_spec(self) -> dict:
        if self.family is None:
            return {"intervals": [list(iv) for iv in self.intervals]}
        f = self.family
        if isinstance(f, HalfLine):
            return {"family": "halfline", "params": {"a": f.a}}
        if isinstance(f, Bounded):
            return {"family": "bounded", "params": {"R": f.R}}
        if isinstance(f, PeriodicPattern):
            return {"family": "periodic", "params": {"x0": f.x0}}
        if isinstance(f, DyadicGap):
            return {"family": "dyadic_gap", "params": {"rule": f.rule, "coeff": f.coeff}}
        return {"family": "polynomial_gap", "params": {"eps": f.eps}}


def from_spec(spec: dict, horizon: float = 256.0) -> RealSet:
    """Build a RealSet from its JSON specification object."""
    if "intervals" in spec:
        return RealSet.from_intervals([tuple(iv) for iv in spec["intervals"]])
    name = spec["family"]
    p = spec.get("params", {})
    families: dict[str, Callable[[], Family]] = {
        "halfline": lambda: HalfLine(float(p.get("a", 0.0))),
        "bounded": lambda: Bounded(float(p["R"])),
        "periodic": lambda: PeriodicPattern(float(p["x0"])),
        "dyadic_gap": lambda: DyadicGap(p.get("rule", "linear"), float(p.get("coeff", 1.0))),
        "polynomial_gap": lambda: PolynomialGap(float(p["eps"])),
    }
    if name not in families:
        raise ValueError(f"unknown set family {name!r}")
    return RealSet.from_family(families[name](), horizon)


def measure_in(E: RealSet, window: Interval) -> float:
    """Lebesgue measure of E ∩ window, accumulated left to right."""
    lo, hi = float(window[0]), float(window[1])
    if hi < lo:
        raise ValueError("window endpoints out of order")
    if E.family is not None:
        E.require_horizon(max(abs(lo), abs(hi)))
    total = 0.0
    for a, b in E.intervals:
        if a >= hi:
            break
        total += max(0.0, min(b, hi) - max(a, lo))
    return total


def symmetric_density(E: RealSet, x: float) -> float:
    """|E ∩ [-x, x]| / x, the weak-thickness density at scale x."""
    if x <= 0:
        raise ValueError("symmetric density needs x > 0")
    return measure_in(E, (-x, x)) / x


def reflect(E: RealSet) -> RealSet:
    return RealSet(_normalize([(-b, -a) for a, b in E.intervals]), None, E.horizon)


def intersect(E: RealSet, window: Interval) -> RealSet:
    lo, hi = window
    clipped = [(max(a, lo), min(b, hi)) for a, b in E.intervals]
    return RealSet(_normalize(clipped), None, E.horizon)


def union(E1: RealSet, E2: RealSet) -> RealSet:
    return RealSet(
        _normalize(list(E1.intervals) + list(E2.intervals)),
        None,
        min(E1.horizon, E2.horizon),
    )


def parity_fold(E: RealSet) -> RealSet:
    """Fold E onto [0, inf): (E ∩ [0,inf)) ∪ reflect(E ∩ (-inf,0)).

    The fold satisfies 2*|fold ∩ [0,x]| >= |E ∩ [-x,x]| for every x.
    """
    pos = [(a, b) for a, b in E.intervals if b > 0]
    pos = [(max(a, 0.0), b) for a, b in pos]
    neg = [(-b, -a) for a, b in E.intervals if a < 0]
    neg = [(max(a, 0.0), b) for a, b in neg if b > 0]
    return RealSet(_normalize(pos + neg), None, E.horizon)


@dataclass(frozen=True)
class ThickWitness:
    gamma: float
    L: float


@dataclass(frozen=True)
class GapWitness:
    window: Interval
    density: float


@dataclass(frozen=True)
class ThicknessVerdict:
    thick: bool
    thick_witness: Union[ThickWitness, GapWitness, None]
    weakly_thick: Optional[bool]  # None means the numeric probe was inconclusive
    weak_gamma: Optional[float]
    weak_witness_x: tuple[float, ...]
    horizon_used: float
    method: str  # "analytic" | "numeric-probe"

    def to_json(self) -> dict:
        tw = self.thick_witness
        if isinstance(tw, ThickWitness):
            tw_json = {"gamma": tw.gamma, "L": tw.L}
        elif isinstance(tw, GapWitness):
            tw_json = {"gap_window": list(tw.window), "density": tw.density}
        else:
            tw_json = None
        return {
            "thick": self.thick,
            "thick_witness": tw_json,
            "weakly_thick": self.weakly_thick,
            "weak_gamma": self.weak_gamma,
            "weak_witness_x": list(self.weak_witness_x),
            "horizon_used": self.horizon_used,
            "method": self.method,
        }


def _min_window_density(E: RealSet, L: float, xs: np.ndarray) -> tuple[float, float]:
    """Minimum of |E ∩ [x, x+L]|/L over the probe positions; returns (min, argmin)."""
    best, arg = math.inf, xs[0]
    for x in xs:
        d = measure_in(E, (x, x + L)) / L
        if d < best:
            best, arg = d, x
    return best, float(arg)


def _weak_probe(E: RealSet, horizon: float, grid_step: float):
    xs = np.arange(horizon / 4, horizon, grid_step)
    if xs.size == 0:
        xs = np.array([horizon / 4])
    dens = np.array([symmetric_density(E, float(x)) for x in xs])
    order = np.argsort(dens)
    return float(dens.min()), tuple(float(xs[i]) for i in order[:4])


def classify(E: RealSet, horizon: float, grid_step: float = 0.5) -> ThicknessVerdict:
    """Thickness verdict: closed-form for the named families, a numeric
    probe otherwise.  The probe reports "not thick within horizon", never
    a proof; Explicit-set weak verdicts may be inconclusive (None).
    """
    fam = E.family
    if isinstance(fam, DyadicGap) and horizon < 32:
        raise ValueError("dyadic classification needs horizon >= 32 (four generations)")
    if isinstance(fam, PeriodicPattern) and horizon < 1000 * fam.x0:
        raise ValueError("periodic classification needs >= 1000 pattern periods")
    E = E.expanded(horizon)
    horizon = min(horizon, E.horizon)

    if fam is None:
        return _classify_numeric(E, horizon, grid_step)

    weak_gamma, weak_xs = _weak_probe(E, horizon, grid_step)
    if isinstance(fam, HalfLine):
        verdict = ThicknessVerdict(
            False, GapWitness((fam.a - 66.0, fam.a - 2.0), 0.0),
            True, 1.0, (), horizon, "analytic")
    elif isinstance(fam, Bounded):
        xs = tuple(4.0 * max(fam.R, 1.0) * 2**n for n in range(4))
        verdict = ThicknessVerdict(
            False, GapWitness((fam.R + 1.0, fam.R + 2.0), 0.0),
            False, None, xs, horizon, "analytic")
    elif isinstance(fam, PeriodicPattern):
        verdict = ThicknessVerdict(
            True, ThickWitness(0.5, fam.x0),
            True, weak_gamma, (), horizon, "analytic")
    elif isinstance(fam, DyadicGap):
        if fam.bounded_gaps:
            # gaps <= coeff <= 1 (validity at j=1), but the family leaves
            # (-2, 2) empty, so the window must swallow that hole too
            L = max(8.0, 2.0 * (fam.coeff + 1.0))
            xs = np.arange(-horizon, horizon - L, max(grid_step, L / 8))
            gmin, _ = _min_window_density(E, L, xs)
            thick_w: Union[ThickWitness, GapWitness] = ThickWitness(gmin, L)
            thick = True
        else:
            j = 1
            while 2.0 ** (j + 2) < horizon:
                j += 1
            gap = (2.0 ** (j + 1) - fam.a(j), 2.0 ** (j + 1))
            thick_w = GapWitness(gap, 0.0)
            thick = False
        verdict = ThicknessVerdict(
            thick, thick_w, True, weak_gamma, (), horizon, "analytic")
    elif isinstance(fam, PolynomialGap):
        j = max(2, int(horizon // 2))
        gap = (j + (j + 1.0) ** (-fam.eps), j + 1.0)
        xs = tuple(min(horizon, 8.0 * 2**n) for n in range(4))
        verdict = ThicknessVerdict(
            False, GapWitness(gap, 0.0), False, None, xs, horizon, "analytic")
    else:  # pragma: no cover
        raise TypeError(f"unhandled family {fam!r}")

    if verdict.thick and not verdict.weakly_thick:
        raise AssertionError("thick verdict without weak thickness")
    return verdict


def _classify_numeric(E: RealSet, horizon: float, grid_step: float) -> ThicknessVerdict:
    best: Optional[ThickWitness] = None
    worst_gap: Optional[GapWitness] = None
    for L in PROBE_L_GRID:
        if 2 * L > horizon:
            continue
        xs = np.arange(-horizon, horizon - L + 1e-12, max(grid_step, L / 16))
        dmin, xarg = _min_window_density(E, L, xs)
        gammas = [g for g in PROBE_GAMMA_GRID if g <= dmin]
        if gammas and (best is None or gammas[-1] > best.gamma):
            best = ThickWitness(gammas[-1], L)
        if worst_gap is None or dmin < worst_gap.density:
            worst_gap = GapWitness((xarg, xarg + L), dmin)

    weak_gamma, weak_xs = _weak_probe(E, horizon, grid_step)
    weakly: Optional[bool]
    if weak_gamma >= WEAK_TRUE_FLOOR:
        weakly = True
    elif weak_gamma <= WEAK_FALSE_CEILING:
        weakly = False
    else:
        weakly = None

    thick = best is not None
    if thick and weakly is False:
        weakly = True  # thickness implies weak thickness; keep the stronger fact
    return ThicknessVerdict(
        thick, best if thick else worst_gap,
        weakly, weak_gamma if weakly else None,
        weak_xs if weakly is False else (),
        horizon, "numeric-probe")
