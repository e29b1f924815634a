"""Semiclassical eigenfunction asymptotics for the well x^(2m).

Three regions around the turning point mu = lambda^(1/2m):

  oscillatory  |x| < mu - delta*mu^(-(2m-1)/3):
      a_minus * (mu^2m - |x|^2m)^(-1/4) * cos/sin(S_minus(x))
  turning band |x| within delta*mu^(-(2m-1)/3) of mu:
      magnitude envelope O(mu^((m-2)/6)) only
  tail         |x| > mu + delta*mu^(-(2m-1)/3):
      a_plus * (|x|^2m - mu^2m)^(-1/4) * exp(-S_plus(x))

with phase integrals S_minus(x) = int_0^x sqrt|mu^2m - t^2m| dt and
S_plus(x) = int_mu^|x| sqrt|t^2m - mu^2m| dt.  Amplitudes scale like
mu^((m-1)/2); the Liouville-frame constant |C| = |w(0) - i w'(0)| scales
like lambda^(1/4 - 1/(4c)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .quadrature import adaptive, cumulative_panels
from .spectra import (EigenPair, Grid, Monomial, Potential, ShiftedPower,
                      SpectrumTable, beta_function)

# Case-2 constraint is 0 < delta < (2m)^(-1/3)/10; sit comfortably inside.
def default_delta(m: int) -> float:
    return 0.05 * (2.0 * m) ** (-1.0 / 3.0)


class IllConditionedFit(RuntimeError):
    """Fewer than 20 samples fell inside a fitting window."""


class PreconditionError(ValueError):
    pass


def s_total(m: int, mu: float) -> float:
    """S_minus at the turning point: mu^(m+1) * B(3/2, 1/(2m)) / (2m).

    m = 1 reduces to the quarter-circle area pi*mu^2/4.
    """
    return mu ** (m + 1) * beta_function(1.5, 1.0 / (2 * m)) / (2 * m)


def s_minus(m: int, mu: float, x) -> np.ndarray:
    """Oscillatory phase integral, vectorized; odd in x.

    Direct panels carry the smooth bulk; the substitution t = mu*(1-s^2)
    removes the half-power kink when |x| approaches the turning point.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    ax = np.abs(xs)
    split = 0.9 * mu

    def integrand(t):
        return np.sqrt(np.maximum(mu ** (2 * m) - t ** (2 * m), 0.0))

    inner = ax <= split
    if np.any(inner):
        pts = np.unique(np.concatenate([[0.0], ax[inner]]))
        cum = cumulative_panels(integrand, pts)
        out[inner] = np.interp(ax[inner], pts, cum)

    outer = ~inner
    if np.any(outer):
        total = s_total(m, mu)
        for i in np.flatnonzero(outer):
            a = min(ax[i], mu)

            def sub(s):  # integral over [a, mu] with t = mu*(1 - s^2)
                t = mu * (1.0 - s * s)
                return integrand(t) * 2.0 * mu * s

            smax = math.sqrt(max(1.0 - a / mu, 0.0))
            out[i] = total - adaptive(sub, 0.0, smax, rel_tol=1e-9)
    result = np.sign(xs) * out
    return result if np.ndim(x) else float(result[0])


def s_plus(m: int, mu: float, x) -> np.ndarray:
    """Decay integral from the turning point out to |x|; zero inside."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ax = np.abs(xs)
    out = np.zeros_like(xs)

    def integrand(t):
        return np.sqrt(np.maximum(t ** (2 * m) - mu ** (2 * m), 0.0))

    near_edge = mu * 1.1

    def base_to(b):  # integral over [mu, b], b <= near_edge, t = mu*(1 + s^2)
        def sub(s):
            t = mu * (1.0 + s * s)
            return integrand(t) * 2.0 * mu * s

        return adaptive(sub, 0.0, math.sqrt(max(b / mu - 1.0, 0.0)), rel_tol=1e-9)

    outside = ax > mu
    near = outside & (ax <= near_edge)
    for i in np.flatnonzero(near):
        out[i] = base_to(ax[i])
    far = outside & (ax > near_edge)
    if np.any(far):
        base = base_to(near_edge)
        pts = np.unique(np.concatenate([[near_edge], ax[far]]))
        cum = cumulative_panels(integrand, pts)
        out[far] = base + np.interp(ax[far], pts, cum)
    return out if np.ndim(x) else float(out[0])


def phase_integrals(potential: Potential, lam: float, x: float) -> dict:
    """Both phase integrals for the eigenvalue lam at the point x."""
    if not isinstance(potential, Monomial):
        raise PreconditionError("phase integrals are defined for monomial wells")
    mu = potential.turning_point(lam)
    return {"Sminus": float(s_minus(potential.m, mu, x)),
            "Splus": float(s_plus(potential.m, mu, x))}


@dataclass
class LiouvilleFrame:
    """Oscillator frame at the origin: w = (lambda - V)^(1/4) phi, y = S(x).

    For even potentials parity zeroes one of w(0), w'(0) exactly, which is
    enforced rather than estimated from differences.
    """

    k: int
    lam: float
    w0: float
    w0prime: float
    C_abs: float
    theta0: float
    omega_k: tuple[float, float]   # {x : V(x) <= lam/2}

    @property
    def C(self) -> complex:
        return complex(self.w0, -self.w0prime)


def _phi_derivative_at_zero(pair: EigenPair, grid: Grid) -> float:
    """Fourth-order central difference at the origin node."""
    i0 = grid.N // 2  # N odd: middle node is x = 0
    p = pair.phi
    h = grid.h
    return (8.0 * (p[i0 + 1] - p[i0 - 1]) - (p[i0 + 2] - p[i0 - 2])) / (12.0 * h)


def liouville_frame(pair: EigenPair, potential: Potential, grid: Grid) -> LiouvilleFrame:
    lam = pair.lam
    V0 = float(potential.V(0.0))
    if lam <= 2 * V0:
        raise PreconditionError("eigenvalue too small: origin outside omega_k")
    i0 = grid.N // 2
    phi0 = float(pair.phi[i0])
    dphi0 = _phi_derivative_at_zero(pair, grid)
    # chain rule: w = (lam-V)^(1/4) phi, dw/dy = w'(x)/S'(x); V'(0)=0 for
    # the even families so the (lam-V)' term drops at the origin
    w0 = (lam - V0) ** 0.25 * phi0
    w0p = (lam - V0) ** -0.25 * dphi0
    if pair.parity == "even":
        w0p = 0.0
    elif pair.parity == "odd":
        w0 = 0.0
    # half-width of {V <= lam/2}
    if isinstance(potential, Monomial):
        half = (lam / 2.0) ** (1.0 / (2 * potential.m))
    else:
        half = potential.turning_point(lam / 2.0)
    theta0 = math.atan2(w0p, w0) if w0 != 0.0 else math.pi / 2.0
    return LiouvilleFrame(pair.k, lam, w0, w0p, math.hypot(w0, w0p), theta0,
                          (-half, half))


def amplitude_constant(pair: EigenPair, potential: Potential, grid: Grid) -> dict:
    """|C_lambda| for one eigenpair; sweeps of k fit the growth exponent."""
    frame = liouville_frame(pair, potential, grid)
    return {"C_abs": frame.C_abs, "lam": pair.lam}


def amplitude_scaling(table: SpectrumTable, ks) -> dict:
    """Log-log slope of |C_lambda| against lambda over the given 1-based
    indices; target 1/4 - 1/(4c)."""
    vals = [amplitude_constant(table.pairs[k - 1], table.potential, table.grid)
            for k in ks]
    lams = np.array([v["lam"] for v in vals])
    cabs = np.array([v["C_abs"] for v in vals])
    slope = float(np.polyfit(np.log(lams), np.log(cabs), 1)[0])
    c = table.potential.growth_power
    return {"slope": slope, "target": 0.25 - 1.0 / (4.0 * c),
            "C_abs": cabs, "lambdas": lams}


@dataclass
class WKBProfile:
    k: int
    m: int
    lam: float
    mu: float
    delta: float
    parity: str                 # selects the cosine or sine branch
    a_minus: float
    a_plus: float
    c_turning: float            # measured max of |phi| on the turning band
    osc_window: tuple[float, float]
    tail_window: tuple[float, float]
    osc_residual: float
    tail_residual: float

    @property
    def inner_edge(self) -> float:
        return self.mu - self.delta * self.mu ** (-(2 * self.m - 1) / 3.0)

    @property
    def outer_edge(self) -> float:
        return self.mu + self.delta * self.mu ** (-(2 * self.m - 1) / 3.0)


def region_of(profile: WKBProfile, x: float) -> str:
    ax = abs(x)
    if ax < profile.inner_edge:
        return "oscillatory"
    if ax > profile.outer_edge:
        return "tail"
    return "turning"


def wkb_eval(profile: WKBProfile, x) -> dict:
    """Region-appropriate approximation with its error budget.

    Turning-band values are reported as 0 with the magnitude envelope as
    the budget; only the envelope is asserted there.
    """
    m, mu = profile.m, profile.mu
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    value = np.zeros_like(xs)
    bound = np.empty_like(xs)
    region = np.empty(xs.shape, dtype=object)
    ax = np.abs(xs)

    osc = ax < profile.inner_edge
    if np.any(osc):
        S = s_minus(m, mu, xs[osc])
        base = (mu ** (2 * m) - ax[osc] ** (2 * m)) ** -0.25
        phase = np.cos(S) if profile.parity == "even" else np.sin(S)
        value[osc] = profile.a_minus * base * phase
        gap = mu ** (2 * m) - ax[osc] ** (2 * m)
        bound[osc] = (abs(profile.a_minus) * base
                      * gap ** -0.5 * np.abs(ax[osc] - mu) ** -1.0)
        region[osc] = "oscillatory"

    tail = ax > profile.outer_edge
    if np.any(tail):
        S = s_plus(m, mu, xs[tail])
        gap = ax[tail] ** (2 * m) - mu ** (2 * m)
        base = gap**-0.25 * np.exp(-S)
        sign = np.ones_like(xs[tail])
        if profile.parity == "odd":
            sign = np.sign(xs[tail])
        value[tail] = profile.a_plus * base * sign
        bound[tail] = abs(profile.a_plus) * base * gap**-0.5 * np.abs(ax[tail] - mu) ** -1.0
        region[tail] = "tail"

    band = ~osc & ~tail
    if np.any(band):
        value[band] = 0.0
        bound[band] = profile.c_turning
        region[band] = "turning"

    if np.ndim(x) == 0:
        return {"value": float(value[0]), "region": str(region[0]),
                "error_bound": float(bound[0])}
    return {"value": value, "region": region, "error_bound": bound}


def fit_amplitudes(pair: EigenPair, potential: Potential, grid: Grid,
                   delta: Optional[float] = None) -> WKBProfile:
    """Least-squares amplitudes against the numeric eigenfunction.

    a_minus over the middle half of the oscillatory region by phase;
    a_plus over the tail beyond mu + 3*delta*mu^(-(2m-1)/3), fit in log
    space where the decay is a straight line.
    """
    if not isinstance(potential, Monomial):
        raise PreconditionError("WKB profiles are built for monomial wells")
    m = potential.m
    lam, mu = pair.lam, pair.mu
    if delta is None:
        delta = default_delta(m)
    width = delta * mu ** (-(2 * m - 1) / 3.0)
    inner, outer = mu - width, mu + width

    x = grid.nodes
    phi = pair.phi
    S_at_inner = float(s_minus(m, mu, inner))
    if S_at_inner < 10.0 * math.pi:
        raise PreconditionError("oscillatory region holds fewer than 5 periods")

    pos = (x >= 0) & (x < inner)
    S = np.asarray(s_minus(m, mu, x[pos]))
    window = (S >= 0.25 * S_at_inner) & (S <= 0.75 * S_at_inner)
    if window.sum() < 20:
        raise IllConditionedFit("oscillatory window has fewer than 20 samples")
    xs_w, S_w, phi_w = x[pos][window], S[window], phi[pos][window]
    base = (mu ** (2 * m) - xs_w ** (2 * m)) ** -0.25
    model = base * (np.cos(S_w) if pair.parity == "even" else np.sin(S_w))
    a_minus = float(model @ phi_w / (model @ model))
    osc_res = float(np.max(np.abs(phi_w - a_minus * model)))

    tail_lo = mu + 3.0 * width
    tail_sel = (x > tail_lo) & (np.abs(phi) > 1e-12 * np.abs(phi).max())
    if tail_sel.sum() < 20:
        raise IllConditionedFit("tail window has fewer than 20 samples")
    xs_t, phi_t = x[tail_sel], phi[tail_sel]
    S_t = np.asarray(s_plus(m, mu, xs_t))
    gap_t = xs_t ** (2 * m) - mu ** (2 * m)
    log_amp = np.log(np.abs(phi_t)) + S_t + 0.25 * np.log(gap_t)
    a_plus = float(math.exp(np.mean(log_amp)) * np.sign(np.mean(phi_t[:5])))
    tail_res = float(np.max(np.abs(log_amp - np.mean(log_amp))))

    band = (np.abs(x) >= inner) & (np.abs(x) <= outer)
    c_turning = float(np.abs(phi[band]).max()) if np.any(band) else float("nan")

    return WKBProfile(pair.k, m, lam, mu, delta, pair.parity or "even",
                      a_minus, a_plus, c_turning,
                      (float(xs_w[0]), float(xs_w[-1])),
                      (float(xs_t[0]), float(xs_t[-1])),
                      osc_res, tail_res)


def amplitude_slopes(table: SpectrumTable, ks) -> dict:
    """Fitted log|a+-| vs log(mu) slopes across k; both target (m-1)/2."""
    profiles = [fit_amplitudes(table.pairs[k - 1], table.potential, table.grid)
                for k in ks]
    mus = np.array([p.mu for p in profiles])
    am = np.abs([p.a_minus for p in profiles])
    ap = np.abs([p.a_plus for p in profiles])
    target = (table.potential.growth_power - 1.0) / 2.0
    return {
        "slope_minus": float(np.polyfit(np.log(mus), np.log(am), 1)[0]),
        "slope_plus": float(np.polyfit(np.log(mus), np.log(ap), 1)[0]),
        "target": target,
        "profiles": profiles,
    }


def profile_to_json(profile: WKBProfile) -> dict:
    return {
        "k": profile.k, "m": profile.m, "lambda": profile.lam, "mu": profile.mu,
        "delta": profile.delta, "parity": profile.parity,
        "region_boundaries": [profile.inner_edge, profile.outer_edge],
        "a_minus": profile.a_minus, "a_plus": profile.a_plus,
        "c_turning": profile.c_turning,
        "osc_window": list(profile.osc_window),
        "tail_window": list(profile.tail_window),
        "osc_residual": profile.osc_residual,
        "tail_residual": profile.tail_residual,
    }
