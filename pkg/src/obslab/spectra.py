"""Dirichlet finite-difference spectra for H = -d^2/dx^2 + V on the line.

Supported potentials: the monomial well x^(2m) and the shifted power
C*(1+x^2)^c.  Eigenvalues come from Sturm-bisection of the symmetric
tridiagonal discretization (LAPACK stebz/stein via eigh_tridiagonal),
refined on doubling grids until each eigenvalue's relative change drops
below the accuracy target.  The m = 1 Hermite basis is also available in
closed form through the stable normalized recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .quadrature import adaptive


class NoConvergenceError(RuntimeError):
    """Grid refinement cap reached before eigenvalues stabilized."""


class TruncationError(RuntimeError):
    """Eigenfunction mass near the wall stayed above the accuracy target."""


class InsufficientDataError(ValueError):
    """The table holds too few eigenvalues for the requested fit."""


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta_function(a: float, b: float) -> float:
    """Euler Beta via log-Gamma; B(3/2, 1/2) = pi/2 anchors the tests."""
    return math.exp(log_beta(a, b))


@dataclass(frozen=True)
class Monomial:
    """V(x) = x^(2m); even, V(0) = 0, strictly increasing on [0, inf)."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("Monomial needs m >= 1")

    def V(self, x):
        return np.asarray(x) ** (2 * self.m)

    def turning_point(self, lam: float) -> float:
        return lam ** (1.0 / (2 * self.m))

    @property
    def growth_power(self) -> float:
        """The c in V ~ x^(2c)."""
        return float(self.m)

    @property
    def even(self) -> bool:
        return True


@dataclass(frozen=True)
class ShiftedPower:
    """V(x) = C*(1+x^2)^c with C > 0, c >= 1."""

    C: float
    c: float

    def __post_init__(self):
        if self.C <= 0 or self.c < 1:
            raise ValueError("ShiftedPower needs C > 0 and c >= 1")

    def V(self, x):
        return self.C * (1.0 + np.asarray(x) ** 2) ** self.c

    def turning_point(self, lam: float) -> float:
        if lam <= self.C:
            return 0.0
        return math.sqrt((lam / self.C) ** (1.0 / self.c) - 1.0)

    @property
    def growth_power(self) -> float:
        return float(self.c)

    @property
    def even(self) -> bool:
        return True


Potential = Union[Monomial, ShiftedPower]


@dataclass(frozen=True)
class Grid:
    """Uniform Dirichlet grid: interior nodes x_i = -X + i*h, h = 2X/(N+1).

    N is kept odd so x = 0 is a node (needed for origin derivatives).
    """

    X: float
    N: int

    def __post_init__(self):
        if self.N % 2 == 0:
            raise ValueError("Grid needs odd N so that x=0 is a node")

    @property
    def h(self) -> float:
        return 2.0 * self.X / (self.N + 1)

    @property
    def nodes(self) -> np.ndarray:
        return -self.X + self.h * np.arange(1, self.N + 1)

    def trapz(self, values: np.ndarray) -> float:
        """Trapezoid integral with implicit zeros at the Dirichlet walls."""
        return float(self.h * np.sum(values))


@dataclass
class EigenPair:
    k: int                      # 1-based; lambda_1 < lambda_2 < ...
    lam: float
    phi: np.ndarray             # L2-normalized samples on the grid nodes
    mu: Optional[float]         # lambda^(1/2m), monomial wells only
    parity: Optional[str]       # "even" | "odd", monomial wells only
    norm_residual: float


@dataclass
class SpectrumTable:
    potential: Potential
    grid: Grid
    pairs: list[EigenPair]
    b: Optional[float]          # mu_k ~ b * k^(1/(m+1)) for monomial wells
    accuracy: float
    refinements: int

    @property
    def K(self) -> int:
        return len(self.pairs)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    @property
    def phis(self) -> np.ndarray:
        return np.stack([p.phi for p in self.pairs])

    @property
    def min_gap(self) -> float:
        return float(np.min(np.diff(self.lambdas)))


def action_integral(potential: Potential, lam: float) -> float:
    """Half-period phase integral over the classically allowed region."""
    xt = potential.turning_point(lam)
    if xt <= 0:
        return 0.0

    def f(s):  # t = xt*(1 - s^2) removes the sqrt kink at the turning point
        t = xt * (1.0 - s * s)
        return np.sqrt(np.maximum(lam - potential.V(t), 0.0)) * 2.0 * xt * s

    return 2.0 * adaptive(f, 0.0, 1.0, rel_tol=1e-10)


def estimate_lambda(potential: Potential, k: int) -> float:
    """Bohr-Sommerfeld estimate: action(lambda) = (k - 1/2)*pi."""
    target = (k - 0.5) * math.pi
    lo, hi = 1e-6, 10.0
    while action_integral(potential, hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise NoConvergenceError("Bohr-Sommerfeld bracket blew up")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if action_integral(potential, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * hi:
            break
    return 0.5 * (lo + hi)


def _tridiag(potential: Potential, grid: Grid):
    x = grid.nodes
    d = 2.0 / grid.h**2 + potential.V(x)
    e = np.full(grid.N - 1, -1.0 / grid.h**2)
    return d, e


def _fix_sign(phi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Deterministic sign: positive outermost right lobe, anchored at the
    rightmost node where |phi| exceeds half its maximum.  This matches the
    natural sign of the Hermite recurrence for every mode (their leading
    coefficient makes the tail-side lobe positive)."""
    mx = np.abs(phi).max()
    right = np.flatnonzero(np.abs(phi) > 0.5 * mx)
    if right.size and phi[right[-1]] < 0:
        return -phi
    return phi


def solve_spectrum(potential: Potential, K: int, accuracy: float = 1e-6,
                   max_refinements: int = 8) -> SpectrumTable:
    """First K Dirichlet eigenpairs on an automatically sized grid.

    The truncation X = 1.5*turning(lambda_K) + 10 is enlarged by 25% when
    boundary mass exceeds the accuracy target; the grid is refined (h -> h/2)
    until every eigenvalue's relative change is below `accuracy`.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if accuracy <= 0:
        raise ValueError("accuracy must be > 0")

    lam_est = estimate_lambda(potential, K + 1)
    X = 1.5 * potential.turning_point(lam_est) + 10.0

    for _enlarge in range(4):
        wavelength = 2.0 * math.pi / math.sqrt(lam_est)
        h0 = min(0.02, wavelength / 20.0)
        N = int(math.ceil(2.0 * X / h0)) | 1
        grid = Grid(X, N)
        lam_prev = None
        refinements = 0
        converged = False
        while True:
            d, e = _tridiag(potential, grid)
            lams = eigh_tridiagonal(d, e, select="i", select_range=(0, K - 1),
                                    eigvals_only=True)
            if lam_prev is not None:
                change = np.max(np.abs(lams - lam_prev) / np.abs(lams))
                if change < accuracy:
                    converged = True
                    break
            if refinements >= max_refinements:
                raise NoConvergenceError(
                    f"eigenvalues not stable after {refinements} refinements")
            lam_prev = lams
            refinements += 1
            grid = Grid(X, 2 * grid.N + 1)

        d, e = _tridiag(potential, grid)
        lams, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, K - 1))
        phis = (vecs / math.sqrt(grid.h)).T  # l2-normalized columns -> L2 samples
        boundary_mass = grid.h * (phis[:, 0] ** 2 + phis[:, -1] ** 2)
        if np.max(boundary_mass) < accuracy:
            converged = True
            break
        X *= 1.25
        converged = False
    if not converged:
        raise TruncationError("boundary mass stayed above accuracy; domain too small")

    x = grid.nodes
    pairs = []
    for i in range(K):
        phi = phis[i]
        parity = None
        mu = None
        if isinstance(potential, Monomial):
            parity = "even" if i % 2 == 0 else "odd"
            sign = 1.0 if parity == "even" else -1.0
            phi = 0.5 * (phi + sign * phi[::-1])  # exact parity on the symmetric grid
            mu = lams[i] ** (1.0 / (2 * potential.m))
        nrm = math.sqrt(grid.trapz(phi**2))
        phi = _fix_sign(phi / nrm, x)
        norm_residual = abs(_simpson_mass(phi, grid.h) - 1.0)
        pairs.append(EigenPair(i + 1, float(lams[i]), phi, mu, parity, norm_residual))

    gaps = np.diff([p.lam for p in pairs])
    if K > 1 and np.any(gaps <= 0):
        raise NoConvergenceError("non-increasing eigenvalues in the table")

    b = None
    if isinstance(potential, Monomial):
        m = potential.m
        b = (m * math.pi / beta_function(1.5, 1.0 / (2 * m))) ** (1.0 / (m + 1))
    return SpectrumTable(potential, grid, pairs, b, accuracy, refinements)


def _simpson_mass(phi: np.ndarray, h: float) -> float:
    """Simpson's rule for the L2 mass on the boundary-padded samples;
    independent of the trapezoid used to normalize, so the difference
    records the quadrature-level defect."""
    y = np.concatenate([[0.0], phi**2, [0.0]])
    if y.size % 2 == 0:
        y = y[:-1]
    w = np.ones(y.size)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(w, y))


def hermite_exact(k: int, x):
    """Harmonic-oscillator eigenfunction phi_k (1-based; Hermite degree k-1)
    via the normalized three-term recurrence.  Stable for all k, x."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.asarray(x, dtype=float)
    p0 = math.pi**-0.25 * np.exp(-0.5 * x * x)
    if k == 1:
        return p0
    p1 = math.sqrt(2.0) * x * p0
    for j in range(1, k - 1):
        p0, p1 = p1, math.sqrt(2.0 / (j + 1)) * x * p1 - math.sqrt(j / (j + 1.0)) * p0
    return p1


def hermite_basis(K: int, x: np.ndarray) -> np.ndarray:
    """Rows phi_1..phi_K sampled on x, by the same stable recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((K, x.size))
    out[0] = math.pi**-0.25 * np.exp(-0.5 * x * x)
    if K > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for j in range(1, K - 1):
        out[j + 1] = (math.sqrt(2.0 / (j + 1)) * x * out[j]
                      - math.sqrt(j / (j + 1.0)) * out[j - 1])
    return out


def hermite_table(K: int, grid: Grid) -> SpectrumTable:
    """Analytic m = 1 table: lambda_k = 2k-1 and recurrence eigenfunctions.

    Interchangeable with solve_spectrum(Monomial(1), ...) wherever a table
    is consumed; exact eigenvalues make it the cheap basis for dynamics.
    """
    x = grid.nodes
    phis = hermite_basis(K, x)
    pairs = []
    for i in range(K):
        parity = "even" if i % 2 == 0 else "odd"
        pairs.append(EigenPair(i + 1, float(2 * i + 1), phis[i],
                               math.sqrt(2.0 * i + 1.0), parity,
                               abs(grid.trapz(phis[i] ** 2) - 1.0)))
    b = (math.pi / beta_function(1.5, 0.5)) ** 0.5
    return SpectrumTable(Monomial(1), grid, pairs, b, 0.0, 0)


@dataclass(frozen=True)
class WeylFit:
    exponent: float
    exponent_target: float
    constant: float
    constant_target: float
    residuals: np.ndarray  # per-k relative deviation from the asymptotic law


def weyl_constants(potential: Potential) -> tuple[float, float]:
    """(exponent, constant) of lambda_k ~ constant * k^exponent.

    Bohr-Sommerfeld for V ~ x^(2c): action = lam^((c+1)/2c) * B(3/2,1/2c)/
    (c * C^(1/2c)) = (k-1/2)pi, so the constant carries a factor c (and
    C^(1/(c+1)) for the shifted-power family).
    """
    c = potential.growth_power
    exponent = 2.0 * c / (c + 1.0)
    B = beta_function(1.5, 1.0 / (2.0 * c))
    const = (c * math.pi / B) ** exponent
    if isinstance(potential, ShiftedPower):
        const *= potential.C ** (1.0 / (c + 1.0))
    return exponent, const


def check_weyl_law(table: SpectrumTable) -> WeylFit:
    """Least-squares fit of log(lambda_k) against log(k) over the top half
    of indices, plus per-k deviations from the asymptotic law."""
    K = table.K
    if K < 20:
        raise InsufficientDataError("Weyl fit needs at least 20 eigenvalues")
    k = np.arange(1, K + 1)
    lam = table.lambdas
    sel = k > K // 2
    slope, intercept = np.polyfit(np.log(k[sel]), np.log(lam[sel]), 1)
    exp_t, const_t = weyl_constants(table.potential)
    residuals = lam / (const_t * k**exp_t) - 1.0
    return WeylFit(float(slope), exp_t, float(math.exp(intercept)), const_t, residuals)


@dataclass(frozen=True)
class GapProfile:
    min_gap: float
    tail_slope: float
    tail_slope_target: float


def gap_profile(table: SpectrumTable) -> GapProfile:
    """Minimum spectral gap and log-log slope of gaps over the tail.

    For x^(2m) the gaps grow like k^((m-1)/(m+1)); m = 1 has gaps == 2.
    """
    if table.K < 10:
        raise InsufficientDataError("gap profile needs at least 10 eigenvalues")
    lam = table.lambdas
    gaps = np.diff(lam)
    k = np.arange(1, gaps.size + 1)
    sel = k > gaps.size // 2
    slope = np.polyfit(np.log(k[sel]), np.log(gaps[sel]), 1)[0]
    c = table.potential.growth_power
    return GapProfile(float(gaps.min()), float(slope), (c - 1.0) / (c + 1.0))


def table_to_csv(table: SpectrumTable, path) -> None:
    """One row per node: x, phi_1(x), ..., phi_K(x)."""
    data = np.column_stack([table.grid.nodes] + [p.phi for p in table.pairs])
    header = "x," + ",".join(f"phi_{p.k}" for p in table.pairs)
    np.savetxt(path, data, delimiter=",", header=header, comments="")


def table_header(table: SpectrumTable) -> dict:
    """JSON-ready metadata companion to the CSV dump."""
    return {
        "potential": _potential_spec(table.potential),
        "lambdas": [p.lam for p in table.pairs],
        "grid": {"X": table.grid.X, "N": table.grid.N, "h": table.grid.h},
        "accuracy": table.accuracy,
        "refinements": table.refinements,
        "norm_residuals": [p.norm_residual for p in table.pairs],
        "min_gap": table.min_gap if table.K > 1 else None,
    }


def _potential_spec(potential: Potential) -> dict:
    if isinstance(potential, Monomial):
        return {"variant": "monomial", "m": potential.m}
    return {"variant": "shifted_power", "C": potential.C, "c": potential.c}
