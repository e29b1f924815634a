"""Hermite-oscillator dynamics: e^{-itH} for H = -d^2/dx^2 + x^2.

Two propagators: eigen-expansion through a spectrum table, and direct
quadrature of the Mehler kernel

    K(t,x,y) = e^{-i pi/4} (2 pi sin 2t)^{-1/2}
               exp(i(x^2+y^2) cot(2t)/2 - i x y / sin 2t),

which degenerates at resonant times t in (pi/2)N to a (possibly
reflected) Dirac mass: e^{-i t H} f at t = j*pi/2 equals
e^{-i j pi/2} f((-1)^j x).  The modulus of any solution is pi-periodic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import realset
from .realset import RealSet
from .spectra import Grid, Monomial, SpectrumTable, hermite_exact
from .observability import indicator_weights

RESONANT_GUARD = 1e-3
TRUNCATION_TOL = 1e-8


class ResonantTimeError(ValueError):
    """Mehler quadrature requested inside the guard band around (pi/2)N;
    use the Dirac identity (resonant_evolve) instead."""


class InsufficientModesError(ValueError):
    """The table's modes capture less than 1 - 1e-8 of the state's mass."""


@dataclass
class PropagatorState:
    t: float
    psi: np.ndarray
    norm: float
    provenance: str              # "eigen" | "mehler"
    truncation_defect: float = 0.0


def state_norm(psi: np.ndarray, grid: Grid) -> float:
    return math.sqrt(grid.trapz(np.abs(psi) ** 2))


def _require_hermite(table: SpectrumTable) -> None:
    pot = table.potential
    if not (isinstance(pot, Monomial) and pot.m == 1):
        raise ValueError("oscillator dynamics needs the m = 1 table")


def expansion_coefficients(f: np.ndarray, table: SpectrumTable) -> np.ndarray:
    return table.grid.h * (table.phis @ f)


def evolve_eigen(f: np.ndarray, t: float, table: SpectrumTable) -> PropagatorState:
    """psi(t) = sum_k e^{-i lambda_k t} <f, phi_k> phi_k."""
    _require_hermite(table)
    grid = table.grid
    coeffs = expansion_coefficients(np.asarray(f, dtype=complex), table)
    total = grid.trapz(np.abs(f) ** 2)
    captured = float(np.sum(np.abs(coeffs) ** 2))
    defect = 1.0 - captured / total
    if defect > TRUNCATION_TOL:
        raise InsufficientModesError(
            f"modes capture {captured/total:.10f} of the mass; need >= 1-1e-8")
    psi = (coeffs * np.exp(-1j * table.lambdas * t)) @ table.phis
    return PropagatorState(t, psi, state_norm(psi, grid), "eigen", max(defect, 0.0))


def resonant_evolve(f: np.ndarray, j: int) -> np.ndarray:
    """Exact propagation over j quarter-periods: phase times reflection."""
    out = np.asarray(f, dtype=complex)
    if j % 2 == 1:
        out = out[::-1]
    return np.exp(-1j * j * math.pi / 2.0) * out


def nearest_resonance(t: float) -> tuple[int, float]:
    j = int(round(t / (math.pi / 2.0)))
    return j, t - j * math.pi / 2.0


def mehler_kernel_modulus(t: float) -> float:
    return (2.0 * math.pi * abs(math.sin(2.0 * t))) ** -0.5


def evolve_mehler(f: np.ndarray, t: float, grid: Grid,
                  chunk: int = 512) -> PropagatorState:
    """Oscillatory-kernel quadrature on the grid (trapezoid; the smooth
    decaying integrand makes it spectrally accurate at this sampling).

    Times beyond the first quarter-period are reduced with the resonant
    identity, which also fixes the branch of (sin 2t)^(1/2).
    """
    j, dt = nearest_resonance(t)
    if abs(dt) < RESONANT_GUARD and not (j == 0 and t == 0.0):
        raise ResonantTimeError(
            f"t={t:g} is within {RESONANT_GUARD:g} of resonance {j}*pi/2")
    if t == 0.0:
        psi = np.asarray(f, dtype=complex).copy()
        return PropagatorState(0.0, psi, state_norm(psi, grid), "mehler")
    jq = int(math.floor(t / (math.pi / 2.0)))
    tq = t - jq * math.pi / 2.0
    g = resonant_evolve(f, jq) if jq else np.asarray(f, dtype=complex)

    x = grid.nodes
    h = grid.h
    sin2t, cot2t = math.sin(2.0 * tq), 1.0 / math.tan(2.0 * tq)
    pref = np.exp(-1j * math.pi / 4.0) / np.sqrt(2.0 * math.pi * sin2t)
    gy = g * np.exp(0.5j * cot2t * x * x)
    psi = np.empty_like(gy)
    for lo in range(0, x.size, chunk):
        hi = min(lo + chunk, x.size)
        phase = np.exp(-1j * np.outer(x[lo:hi], x) / sin2t)
        psi[lo:hi] = phase @ gy
    psi *= h * pref * np.exp(0.5j * cot2t * x * x)
    return PropagatorState(t, psi, state_norm(psi, grid), "mehler")


def mass_on_set(psi: np.ndarray, grid: Grid, E: RealSet) -> float:
    """int_E |psi|^2 with cell-overlap weights at the set endpoints."""
    E = E.expanded(grid.X * 1.01)
    w = indicator_weights(E, grid.nodes, grid.h)
    return grid.trapz(w * np.abs(psi) ** 2)


def propagate(f: np.ndarray, t: float, table: SpectrumTable) -> np.ndarray:
    """Eigen-expansion propagation, except that times on the resonant
    lattice (pi/2)N use the exact Dirac identity, which needs no mode
    coverage and so admits arbitrary data (compact bumps included)."""
    j, dt = nearest_resonance(t)
    if abs(dt) < 1e-9:
        return resonant_evolve(f, j)
    return evolve_eigen(f, t, table).psi


def two_time_quotient(f: np.ndarray, S: float, T: float, E1: RealSet, E2: RealSet,
                      table: SpectrumTable) -> float:
    """||f||^2 / (int_E1 |u(S)|^2 + int_E2 |u(T)|^2); conservation makes it
    1/2 when both sets are the whole line.  Returns inf when the observed
    masses vanish (the resonant blow-up family)."""
    if not 0 <= S < T:
        raise ValueError("need 0 <= S < T")
    grid = table.grid
    uS = propagate(f, S, table)
    uT = propagate(f, T, table)
    denom = mass_on_set(uS, grid, E1) + mass_on_set(uT, grid, E2)
    num = grid.trapz(np.abs(f) ** 2)
    if denom <= 1e-300:
        return math.inf
    return num / denom


@dataclass(frozen=True)
class CoherentFamily:
    """Gaussian beams u_{0,k}(x) = pi^(-1/4) e^{-x^2/2 - i k x}; under the
    oscillator flow the center travels along -k sin 2t."""

    k: float

    def initial_state(self, grid: Grid) -> np.ndarray:
        x = grid.nodes
        return math.pi**-0.25 * np.exp(-0.5 * x * x - 1j * self.k * x)


def coherent_state(k: float, grid: Grid) -> np.ndarray:
    return CoherentFamily(k).initial_state(grid)


@dataclass
class MinimalTimeScan:
    T_list: tuple[float, ...]
    k_list: tuple[float, ...]
    Q: np.ndarray                # shape (len(k_list), len(T_list))
    dt: float

    def to_json(self) -> dict:
        return {"T_list": list(self.T_list), "k_list": list(self.k_list),
                "Q": self.Q.tolist(), "dt": self.dt}


def minimal_time_scan(E: RealSet, T_list: Sequence[float], k_list: Sequence[float],
                      table: SpectrumTable, dt: float = 0.01) -> MinimalTimeScan:
    """Q(k, T) = int_0^T int_E |e^{-itH} u_{0,k}|^2 dx dt by composite
    midpoint in time (step <= dt per T)."""
    if dt > 0.01 + 1e-15:
        raise ValueError("time step must be <= 0.01")
    _require_hermite(table)
    grid = table.grid
    E = E.expanded(grid.X * 1.01)
    w = grid.h * indicator_weights(E, grid.nodes, grid.h)
    lambdas = table.lambdas
    phis = table.phis
    Q = np.zeros((len(k_list), len(T_list)))
    for ik, k in enumerate(k_list):
        f = coherent_state(k, grid)
        coeffs = expansion_coefficients(f, table)
        captured = float(np.sum(np.abs(coeffs) ** 2)) / grid.trapz(np.abs(f) ** 2)
        if captured < 1.0 - TRUNCATION_TOL:
            raise InsufficientModesError(
                f"coherent k={k}: table captures only {captured:.10f}")
        for iT, T in enumerate(T_list):
            n = int(math.ceil(T / dt))
            step = T / n
            mids = (np.arange(n) + 0.5) * step
            acc = 0.0
            # batched real BLAS-3 synthesis: phases (chunk x K) @ basis (K x N)
            for lo in range(0, n, 64):
                tt = mids[lo:lo + 64]
                amp = coeffs[None, :] * np.exp(-1j * np.outer(tt, lambdas))
                dens = (amp.real @ phis) ** 2 + (amp.imag @ phis) ** 2
                acc += float(np.sum(dens @ w))
            Q[ik, iT] = acc * step
    return MinimalTimeScan(tuple(T_list), tuple(k_list), Q, dt)


@dataclass(frozen=True)
class ComplexHeatKernel:
    """Kernel of e^{-zH} on Re z > 0:

        K_z(x,y) = (2 pi sinh 2z)^(-1/2)
                   exp(-coth(2z)(x^2+y^2)/2 + x y / sinh 2z),

    the analytic continuation of the Mehler kernel; it satisfies
    |K_{s+it}(x,y)| <= C s^(-1/2) exp(-s|x-y|^2 / (4(s^2+t^2))).
    """

    z: complex

    def __post_init__(self):
        if self.z.real <= 0:
            raise ValueError("heat kernel needs Re z > 0")

    def eval(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sh = np.sinh(2.0 * self.z)
        ch = np.cosh(2.0 * self.z)
        return ((2.0 * math.pi * sh) ** -0.5
                * np.exp(-(ch / sh) * (x * x + y * y) / 2.0 + x * y / sh))


def heat_kernel(z: complex, x, y):
    return ComplexHeatKernel(complex(z)).eval(x, y)


def heat_bound_ratio(x, y, s, t) -> np.ndarray:
    """|K_{s+it}| / (s^(-1/2) exp(-s|x-y|^2/(4(s^2+t^2)))); the sup over
    samples is the fitted constant of the modulus bound."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    s, t = np.asarray(s, float), np.asarray(t, float)
    z = s + 1j * t
    sh = np.sinh(2.0 * z)
    ch = np.cosh(2.0 * z)
    Kv = (2.0 * math.pi * sh) ** -0.5 * np.exp(-(ch / sh) * (x * x + y * y) / 2.0
                                               + x * y / sh)
    envelope = s**-0.5 * np.exp(-s * (x - y) ** 2 / (4.0 * (s * s + t * t)))
    return np.abs(Kv) / envelope


@dataclass
class HeatWitness:
    y0: float
    T: float
    C_obs: float
    lhs: float
    lhs_floor: float             # e^{-2} |Phi_0(y0)|^2
    L: float
    window: tuple[float, float]
    measure_bound: float
    window_measure: float
    satisfied: bool

    def to_json(self) -> dict:
        return {"y0": self.y0, "T": self.T, "C_obs": self.C_obs,
                "lhs": self.lhs, "lhs_floor": self.lhs_floor, "L": self.L,
                "window": list(self.window), "measure_bound": self.measure_bound,
                "window_measure": self.window_measure, "satisfied": self.satisfied}


def heat_witness(E: RealSet, y0: float, T: float, table: SpectrumTable,
                 C_obs: float = 10.0, n_times: int = 24,
                 L_grid: Sequence[float] = tuple(0.5 * i for i in range(1, 17)),
                 ) -> HeatWitness:
    """Observable sets must meet Gaussian-weighted windows: the initial
    state K_1(., y0) has mass >= e^{-2}|Phi_0(y0)|^2, stays concentrated
    near y0 under the flow, so observability with constant C_obs forces
    |E ∩ B(y0, L*rho(y0))| >= (lhs/C_obs - tail)/(T * max_B |v|^2)."""
    if T <= 0:
        raise ValueError("T must be > 0")
    _require_hermite(table)
    grid = table.grid
    x = grid.nodes
    u0 = heat_kernel(1.0, x, y0).real
    lhs = grid.trapz(u0**2)
    lhs_floor = math.exp(-2.0) * hermite_exact(1, y0) ** 2
    rho = max(1.0, abs(y0))

    times = [(i + 0.5) * T / n_times for i in range(n_times)]
    dens = np.empty((n_times, x.size))
    for i, t in enumerate(times):
        dens[i] = np.abs(heat_kernel(1.0 + 1j * t, x, y0)) ** 2

    dt = T / n_times
    chosen_L = L_grid[-1]
    tail_T = 0.0
    for L in L_grid:
        outside = np.abs(x - y0) >= L * rho
        tail_T = float(dens[:, outside].sum() * grid.h * dt)
        if C_obs * tail_T <= lhs / 2.0:
            chosen_L = L
            break
    inside = np.abs(x - y0) <= chosen_L * rho
    max_B = float(dens[:, inside].max())
    measure_bound = max((lhs - C_obs * tail_T) / (C_obs * T * max_B), 0.0)
    window = (y0 - chosen_L * rho, y0 + chosen_L * rho)
    E = E.expanded(abs(y0) + chosen_L * rho + 1.0)
    wmeas = realset.measure_in(E, window)
    return HeatWitness(y0, T, C_obs, lhs, lhs_floor, chosen_L, window,
                       measure_bound, wmeas, wmeas >= measure_bound)
