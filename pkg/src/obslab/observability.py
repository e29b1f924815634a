"""Observability diagnostics: eigenfunction masses on sets, the
resolvent-margin probe, the free-equation Gaussian thickness witness, and
a discrete Nazarov uncertainty constant.

All verdicts are labelled evidence, never proof: masses are probed for
k <= K and the resolvent margin on a finite grid of spectral parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from . import realset
from .realset import RealSet
from .spectra import EigenPair, Grid, Monomial, Potential, SpectrumTable, gap_profile
from .wkb import default_delta

MASS_EVIDENCE_FLOOR = 0.01   # inf_k mass above this reports observable-evidence
PROBE_K_DEFAULT = 40


class GridSetMismatch(ValueError):
    """The set's horizon does not cover the quadrature grid."""


class EigenIterationFailure(RuntimeError):
    pass


def _cumulative_mass(dens: np.ndarray, grid: Grid) -> np.ndarray:
    """Cumulative trapezoid of each row of dens; rows padded with the
    Dirichlet zeros so F(-X) = 0 and F(X) = total."""
    h = grid.h
    inner = 0.5 * h * (dens[:, 1:] + dens[:, :-1])
    first = (0.5 * h * dens[:, :1])
    last = (0.5 * h * dens[:, -1:])
    return np.concatenate(
        [np.zeros((dens.shape[0], 1)), first,
         first + np.cumsum(inner, axis=1), first + inner.sum(axis=1, keepdims=True) + last],
        axis=1)


def _interp_F(F: np.ndarray, grid: Grid, pts: np.ndarray) -> np.ndarray:
    """Linear interpolation of the cumulative masses at arbitrary points;
    equivalent to weighting boundary cells by their overlap fraction."""
    xpad = np.concatenate([[-grid.X], grid.nodes, [grid.X]])
    pts = np.clip(pts, -grid.X, grid.X)
    idx = np.clip(np.searchsorted(xpad, pts) - 1, 0, xpad.size - 2)
    frac = (pts - xpad[idx]) / (xpad[idx + 1] - xpad[idx])
    return F[:, idx] + (F[:, idx + 1] - F[:, idx]) * frac


def set_masses(E: RealSet, dens: np.ndarray, grid: Grid) -> np.ndarray:
    """Integral of each density row over E, with partial-cell weights."""
    if E.family is not None and E.horizon < grid.X:
        raise GridSetMismatch(
            f"set horizon {E.horizon:g} does not cover grid half-width {grid.X:g}")
    F = _cumulative_mass(dens, grid)
    total = np.zeros(dens.shape[0])
    for a, b in E.intervals:
        if b < -grid.X or a > grid.X:
            continue
        ends = _interp_F(F, grid, np.array([a, b]))
        total += ends[:, 1] - ends[:, 0]
    return total


@dataclass
class MassReport:
    set_spec: dict
    potential_spec: dict
    K: int
    masses: np.ndarray
    inf_mass: float
    folded_masses: Optional[np.ndarray]
    gap_regime: str              # "uniform-gap" (some time) | "growing-gap" (any time)
    verdict: str                 # observable-evidence | non-observable-evidence

    def to_json(self) -> dict:
        return {
            "set": self.set_spec,
            "potential": self.potential_spec,
            "K": self.K,
            "masses": self.masses.tolist(),
            "inf_mass": self.inf_mass,
            "folded_masses": None if self.folded_masses is None
            else self.folded_masses.tolist(),
            "gap_regime": self.gap_regime,
            "verdict": self.verdict,
            "evidence_floor": MASS_EVIDENCE_FLOOR,
        }


def eigenmass(E: RealSet, table: SpectrumTable, fold: bool = True) -> MassReport:
    """Masses e_k = int_E |phi_k|^2 for k = 1..K and the inf over k.

    For even wells the parity-folded set can only lose mass, so the folded
    masses are reported alongside.
    """
    E = E.expanded(max(table.grid.X * 1.01, E.horizon))
    dens = table.phis**2
    masses = set_masses(E, dens, table.grid)
    folded = None
    if fold and isinstance(table.potential, Monomial):
        folded = set_masses(realset.parity_fold(E), dens, table.grid)
    gaps = gap_profile(table) if table.K >= 10 else None
    regime = "uniform-gap"
    if gaps is not None and gaps.tail_slope > 0.1:
        regime = "growing-gap"
    inf_mass = float(masses.min())
    verdict = ("observable-evidence" if inf_mass >= MASS_EVIDENCE_FLOOR
               else "non-observable-evidence")
    from .spectra import _potential_spec
    return MassReport(E.to_spec(), _potential_spec(table.potential), table.K,
                      masses, inf_mass, folded, regime, verdict)


def mass_profile_decomposition(E: RealSet, pair: EigenPair, table: SpectrumTable,
                               delta: Optional[float] = None) -> dict:
    """Split int_E |phi_k|^2 into oscillatory/turning/tail contributions
    using the WKB region boundaries; the three parts sum to the mass
    exactly because the regions partition the line."""
    pot = table.potential
    if not isinstance(pot, Monomial):
        raise ValueError("region decomposition needs a monomial well")
    m = pot.m
    mu = pair.mu
    if delta is None:
        delta = default_delta(m)
    width = delta * mu ** (-(2 * m - 1) / 3.0)
    inner, outer = mu - width, mu + width
    E = E.expanded(table.grid.X * 1.01)
    big = table.grid.X + 1.0
    regions = {
        "I1": [(-inner, inner)],
        "I2": [(-outer, -inner), (inner, outer)],
        "I3": [(-big, -outer), (outer, big)],
    }
    dens = pair.phi[None, :] ** 2
    out = {}
    for name, parts in regions.items():
        pieces = []
        for part in parts:
            pieces.extend(_clip_many(E, part))
        clipped = realset.RealSet.from_intervals(pieces)
        out[name] = (float(set_masses(clipped, dens, table.grid)[0])
                     if clipped.intervals else 0.0)
    return out


def _clip_many(E: RealSet, window) -> list:
    lo, hi = window
    return [(max(a, lo), min(b, hi)) for a, b in E.intervals if min(b, hi) > max(a, lo)]


@dataclass
class ResolventProbe:
    lambdas: np.ndarray
    margins: np.ndarray
    M: float
    m_w: float
    grid_X: float
    points_per_unit: int
    operator: str

    def to_json(self) -> dict:
        return {
            "lambdas": self.lambdas.tolist(),
            "margins": self.margins.tolist(),
            "M": self.M, "m_w": self.m_w,
            "grid": {"X": self.grid_X, "points_per_unit": self.points_per_unit},
            "operator": self.operator,
        }


def _periodic_free_operator(X: float, ppu: int):
    """-d^2/dx^2 with periodic walls on [-X, X); avoids spurious Dirichlet
    boundary modes contaminating thickness probes."""
    N = int(round(2 * X * ppu))
    h = 1.0 / ppu
    x = -X + h * np.arange(N)
    main = np.full(N, 2.0 / h**2)
    off = np.full(N - 1, -1.0 / h**2)
    A = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    A[0, N - 1] = -1.0 / h**2
    A[N - 1, 0] = -1.0 / h**2
    return A.tocsc(), x, h


def indicator_weights(E: RealSet, x: np.ndarray, h: float) -> np.ndarray:
    """Cell-overlap fraction of E for each node's cell [x-h/2, x+h/2]."""
    w = np.zeros_like(x)
    for a, b in E.intervals:
        w += np.clip(np.minimum(x + h / 2, b) - np.maximum(x - h / 2, a), 0.0, h) / h
    return np.clip(w, 0.0, 1.0)


def smallest_eigenvalue(P: sp.spmatrix, tol: float = 1e-10, maxit: int = 500) -> float:
    """Smallest eigenvalue of the symmetric positive-semidefinite form by
    shift-inverted Lanczos at sigma = -1e-6 (sparse factorization inside).

    Plain inverse power iteration stalls on the nearly degenerate Bloch
    band bottoms of periodic indicator sets; Lanczos handles the cluster.
    A Rayleigh-quotient power iteration remains as the fallback.
    """
    sigma = -1e-6
    try:
        vals = spl.eigsh(P.tocsc(), k=1, sigma=sigma, which="LM",
                         tol=tol, maxiter=20000, return_eigenvectors=False)
        return float(vals[0])
    except (spl.ArpackNoConvergence, RuntimeError):
        pass
    n = P.shape[0]
    try:
        lu = spl.splu((P - sigma * sp.identity(n, format="csc")).tocsc())
    except RuntimeError as exc:  # pragma: no cover
        raise EigenIterationFailure(str(exc)) from exc
    noise_floor = 64.0 * np.finfo(float).eps * float(np.abs(P.diagonal()).max())
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_old = math.inf
    for _ in range(maxit):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
        lam = float(v @ (P @ v))
        change = abs(lam - lam_old)
        if change <= max(tol * max(1.0, abs(lam)), noise_floor):
            return lam
        lam_old = lam
    if change <= 1e-6 * max(1.0, abs(lam)):
        return lam
    raise EigenIterationFailure("Rayleigh quotient did not stabilize")


def resolvent_margin(E: RealSet, M: float, m_w: float,
                     lambda_list: Sequence[float], X: float = 240.0,
                     ppu: int = 16, potential: Optional[Potential] = None) -> ResolventProbe:
    """margin(lambda) = min Rayleigh quotient of M*(A-lambda)^2 + m_w*D_E.

    The discrete resolvent inequality ||u||^2 <= M||(A-lambda)u||^2 +
    m_w||u||^2_E holds at lambda iff margin(lambda) >= 1.  A is the free
    periodic operator unless a potential is supplied (then Dirichlet).
    """
    if potential is None:
        A, x, h = _periodic_free_operator(X, ppu)
        op_name = "free-periodic"
    else:
        N = int(round(2 * X * ppu)) | 1
        grid = Grid(X, N)
        x, h = grid.nodes, grid.h
        main = 2.0 / h**2 + potential.V(x)
        off = np.full(N - 1, -1.0 / h**2)
        A = sp.diags([off, main, off], [-1, 0, 1], format="csc")
        op_name = "dirichlet-potential"
    E = E.expanded(X * 1.01)
    D = sp.diags(indicator_weights(E, x, h)).tocsc()
    I = sp.identity(A.shape[0], format="csc")
    margins = []
    for lam in lambda_list:
        B = (A - lam * I).tocsc()
        P = (M * (B @ B) + m_w * D).tocsc()
        margins.append(smallest_eigenvalue(P))
    return ResolventProbe(np.asarray(lambda_list, dtype=float), np.array(margins),
                          M, m_w, X, ppu, op_name)


@dataclass
class GaussianWitness:
    """Free-equation thickness necessity: assuming observability with
    constant C_obs at time T forces every window of length L to carry at
    least sqrt(2pi)/(4*C_obs*T) of E's measure."""

    T: float
    C_obs: float
    x0: float
    L: float
    lower_bound: float
    window_measure: float
    satisfied: bool
    violated_at: Optional[float]

    def to_json(self) -> dict:
        return {
            "T": self.T, "C_obs": self.C_obs, "x0": self.x0, "L": self.L,
            "lower_bound": self.lower_bound,
            "window_measure": self.window_measure,
            "satisfied": self.satisfied, "violated_at": self.violated_at,
        }


def gaussian_initial_mass() -> float:
    """L2 mass of the witness solution at t = 0: 1/(2*sqrt(2*pi))."""
    return 1.0 / (2.0 * math.sqrt(2.0 * math.pi))


def gaussian_witness_length(T: float, C_obs: float) -> float:
    """Smallest L making the Gaussian tail term at most half the initial
    mass bound, mirroring the choice of L_0 in the necessity argument."""
    lhs_quarter = 1.0 / (4.0 * math.sqrt(2.0 * math.pi))
    coef = C_obs * T / (2.0 * math.pi) * math.sqrt(4.0 * math.pi * (1.0 + T * T))
    arg = coef / lhs_quarter
    if arg <= 1.0:
        return 1.0
    return math.sqrt(16.0 * (1.0 + T * T) * math.log(arg))


def gaussian_thickness_witness(E: RealSet, T: float, C_obs: float, x0: float,
                               scan: bool = True) -> GaussianWitness:
    if T <= 0 or C_obs <= 0:
        raise ValueError("witness needs T > 0 and C_obs > 0")
    L = gaussian_witness_length(T, C_obs)
    bound = math.sqrt(2.0 * math.pi) / (4.0 * C_obs * T)
    E = E.expanded(abs(x0) + L)
    meas = realset.measure_in(E, (x0 - L / 2, x0 + L / 2))
    violated_at = None
    if scan:
        hi = E.horizon if math.isfinite(E.horizon) else max(abs(x0) + L, 64.0)
        for xc in np.arange(-hi + L / 2, hi - L / 2, L / 2):
            if realset.measure_in(E, (xc - L / 2, xc + L / 2)) < bound:
                violated_at = float(xc)
                break
    return GaussianWitness(T, C_obs, x0, L, bound, meas,
                           meas >= bound - 1e-12, violated_at)


@dataclass
class NazarovProbe:
    S_len: float
    Sigma_len: float
    N: int
    best_constant: float
    min_eigenvalue: float

    def to_json(self) -> dict:
        return {"S_len": self.S_len, "Sigma_len": self.Sigma_len, "N": self.N,
                "best_constant": self.best_constant,
                "min_eigenvalue": self.min_eigenvalue}


def _centered_dft(N: int) -> np.ndarray:
    j = np.arange(N) - N // 2
    return np.exp(-2j * math.pi * np.outer(j, j) / N) / math.sqrt(N)


def nazarov_constant(S_len: float, Sigma_len: float, N: int) -> NazarovProbe:
    """Best constant of ||g||^2 <= C*(||g||^2 on S^c + ||ghat||^2 on Sigma^c)
    on the N-point self-dual line (spacing sqrt(2*pi/N)).

    C = 1/lambda_min(D_{S^c} + F* D_{Sigma^c} F) with F the centered
    unitary DFT.  Interval masks are grid-inclusive: a zero-length centered
    interval still holds the origin sample.
    """
    if N & (N - 1) or N <= 0:
        raise ValueError("N must be a power of two")
    delta = math.sqrt(2.0 * math.pi / N)
    pos = delta * (np.arange(N) - N // 2)
    s_mask = np.abs(pos) <= S_len / 2 + 1e-12
    sig_mask = np.abs(pos) <= Sigma_len / 2 + 1e-12
    F = _centered_dft(N)
    P = np.diag((~s_mask).astype(float)).astype(complex)
    P += F.conj().T @ np.diag((~sig_mask).astype(float)) @ F
    lam_min = float(np.linalg.eigvalsh(P)[0])
    return NazarovProbe(S_len, Sigma_len, N, 1.0 / lam_min, lam_min)
