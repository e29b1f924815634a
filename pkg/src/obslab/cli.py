"""Command-line surface: reproducible experiments with JSON/CSV reports.

Exit codes: 0 success, 2 precondition violation, 3 numeric
non-convergence.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import dynamics, observability, realset, spectra, wkb
from .quadrature import QuadratureFailure
from .reporting import (ReportDocument, RunConfig, parse_set_token,
                        parse_time_token, write_csv, write_report)

NUMERIC_ERRORS = (spectra.NoConvergenceError, spectra.TruncationError,
                  QuadratureFailure, observability.EigenIterationFailure,
                  dynamics.InsufficientModesError)


def _potential(m: int) -> spectra.Monomial:
    if m < 1:
        raise click.UsageError("--m must be a positive integer")
    return spectra.Monomial(m)


def _finish(config: RunConfig, results: dict, started: float, stem: str,
            csv_columns=None, csv_meta=None) -> None:
    outdir = config.resolve_outdir()
    doc = ReportDocument.build(config, results, started)
    jpath = write_report(doc, outdir / f"{stem}.json")
    click.echo(f"report: {jpath}")
    if csv_columns:
        cpath = write_csv(outdir / f"{stem}.csv", csv_columns, csv_meta)
        click.echo(f"csv: {cpath}")


def _run(fn):
    try:
        fn()
    except click.UsageError:
        raise
    except NUMERIC_ERRORS as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(3)
    except (ValueError, realset.HorizonError) as exc:
        click.echo(f"precondition violated: {exc}", err=True)
        sys.exit(2)


@click.group()
def main():
    """Desk-scale observability laboratory for 1-D Schrodinger wells."""


@main.command()
@click.option("--m", type=int, required=True, help="Monomial exponent of x^(2m).")
@click.option("--K", "K", type=int, required=True, help="Number of eigenpairs.")
@click.option("--accuracy", type=float, default=1e-6, show_default=True)
@click.option("--outdir", default=None)
@click.option("--seed", type=int, default=0)
def spectrum(m, K, accuracy, outdir, seed):
    """Eigenvalues, Weyl-law fit, and gap profile for x^(2m)."""
    if K < 1:
        raise click.UsageError("--K must be >= 1")
    if accuracy <= 0:
        raise click.UsageError("--accuracy must be > 0")

    def body():
        started = time.time()
        table = spectra.solve_spectrum(_potential(m), K, accuracy)
        results = {"table": spectra.table_header(table)}
        if K >= 20:
            fit = spectra.check_weyl_law(table)
            results["weyl"] = {"exponent": fit.exponent,
                               "exponent_target": fit.exponent_target,
                               "constant": fit.constant,
                               "constant_target": fit.constant_target,
                               "residuals": fit.residuals,
                               "tolerance": {"relative_accuracy": accuracy}}
        if K >= 10:
            gp = spectra.gap_profile(table)
            results["gaps"] = {"min_gap": gp.min_gap, "tail_slope": gp.tail_slope,
                               "tail_slope_target": gp.tail_slope_target}
        cfg = RunConfig("spectrum", {"m": m, "K": K, "accuracy": accuracy}, seed, outdir)
        columns = {"x": table.grid.nodes}
        for p in table.pairs:
            columns[f"phi_{p.k}"] = p.phi
        _finish(cfg, results, started, f"spectrum_m{m}_K{K}", columns,
                {"lambdas": [p.lam for p in table.pairs]})

    _run(body)


@main.command()
@click.option("--set", "set_token", required=True, help="e.g. halfline:0, dyadic:linear")
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--K", "K", type=int, default=40, show_default=True)
@click.option("--horizon", type=float, default=256.0, show_default=True)
@click.option("--accuracy", type=float, default=1e-6)
@click.option("--outdir", default=None)
@click.option("--seed", type=int, default=0)
def setmass(set_token, m, K, horizon, accuracy, outdir, seed):
    """Thickness classification plus eigenfunction masses on the set."""

    def body():
        started = time.time()
        E = parse_set_token(set_token, horizon)
        verdict = realset.classify(E, min(horizon, E.horizon) if E.family else horizon)
        table = spectra.solve_spectrum(_potential(m), K, accuracy)
        report = observability.eigenmass(E, table)
        decomp = observability.mass_profile_decomposition(E, table.pairs[-1], table)
        results = {"verdict": verdict.to_json(), "mass": report.to_json(),
                   "decomposition_kmax": decomp}
        cfg = RunConfig("setmass", {"set": set_token, "m": m, "K": K,
                                    "horizon": horizon}, seed, outdir)
        _finish(cfg, results, started, f"setmass_m{m}", {
            "k": np.arange(1, K + 1), "mass": report.masses})

    _run(body)


@main.command()
@click.option("--m", type=int, required=True)
@click.option("--k", "krange", required=True, help="sweep like 25..40")
@click.option("--accuracy", type=float, default=1e-6)
@click.option("--outdir", default=None)
@click.option("--seed", type=int, default=0)
def wkbfit(m, krange, accuracy, outdir, seed):
    """Amplitude fits and Liouville-frame scaling across a k sweep."""
    lo, _, hi = krange.partition("..")
    try:
        ks = list(range(int(lo), int(hi or lo) + 1))
    except ValueError:
        raise click.UsageError("--k must look like 25..40")

    def body():
        started = time.time()
        table = spectra.solve_spectrum(_potential(m), max(ks), accuracy)
        slopes = wkb.amplitude_slopes(table, ks)
        camp = wkb.amplitude_scaling(table, ks)
        profiles = slopes.pop("profiles")
        results = {"amplitude_slopes": slopes,
                   "liouville": {"slope": camp["slope"], "target": camp["target"]},
                   "profiles": [wkb.profile_to_json(p) for p in profiles]}
        cfg = RunConfig("wkb", {"m": m, "k": krange}, seed, outdir)
        p = profiles[-1]
        grid = table.grid
        sel = np.abs(grid.nodes) <= p.outer_edge * 1.5
        ev = wkb.wkb_eval(p, grid.nodes[sel])
        _finish(cfg, results, started, f"wkb_m{m}", {
            "x": grid.nodes[sel],
            "numeric": table.pairs[p.k - 1].phi[sel],
            "wkb": ev["value"],
            "error_budget": ev["error_bound"]})

    _run(body)


@main.command()
@click.option("--set", "set_token", default="halfline:1", show_default=True)
@click.option("--T", "t_tokens", default="1.0,pi/2,pi/2+0.3", show_default=True,
              help="comma-separated times; pi tokens parsed exactly")
@click.option("--k", "k_tokens", default="5,10,20,40", show_default=True)
@click.option("--modes", type=int, default=1250, show_default=True)
@click.option("--outdir", default=None)
@click.option("--seed", type=int, default=0)
def mintime(set_token, t_tokens, k_tokens, modes, outdir, seed):
    """Coherent-state observation quotients Q(k, T) around T* = pi/2."""
    T_tokens = t_tokens

    def body():
        started = time.time()
        T_list = [parse_time_token(t) for t in T_tokens.split(",")]
        k_list = [float(k) for k in k_tokens.split(",")]
        E = parse_set_token(set_token)
        kmax = max(k_list)
        X = max(kmax + 12.0, 1.5 * (2 * modes) ** 0.5 + 6.0)
        h = min(0.0135, 2 * np.pi / (2 * modes) ** 0.5 / 10.0)
        grid = spectra.Grid(X, int(np.ceil(2 * X / h)) | 1)
        table = spectra.hermite_table(modes, grid)
        scan = dynamics.minimal_time_scan(E, T_list, k_list, table)
        cfg = RunConfig("mintime", {"set": set_token, "T": T_tokens, "k": k_tokens,
                                    "modes": modes}, seed, outdir)
        cols = {"k": np.asarray(k_list)}
        for i, T in enumerate(T_list):
            cols[f"Q_T{i}"] = scan.Q[:, i]
        _finish(cfg, {"scan": scan.to_json()}, started, "mintime", cols,
                {"T_list": T_list})

    _run(body)


@main.command()
@click.option("--set", "set_token", required=True)
@click.option("--lambda", "lam_range", default="0..100", show_default=True)
@click.option("--nlambda", type=int, default=26, show_default=True)
@click.option("--M", "M", type=float, default=2.0, show_default=True)
@click.option("--mw", type=float, default=16.0, show_default=True)
@click.option("--X", "X", type=float, default=240.0, show_default=True)
@click.option("--ppu", type=int, default=16, show_default=True)
@click.option("--outdir", default=None)
@click.option("--seed", type=int, default=0)
def resolvent(set_token, lam_range, nlambda, M, mw, X, ppu, outdir, seed):
    """Margin curve of the discrete resolvent inequality on a set."""
    lo, _, hi = lam_range.partition("..")
    try:
        lams = np.linspace(float(lo), float(hi or lo), nlambda)
    except ValueError:
        raise click.UsageError("--lambda must look like 0..100")

    def body():
        started = time.time()
        E = parse_set_token(set_token, horizon=X * 1.5)
        probe = observability.resolvent_margin(E, M, mw, lams, X=X, ppu=ppu)
        cfg = RunConfig("resolvent", {"set": set_token, "lambda": lam_range,
                                      "M": M, "m_w": mw, "X": X, "ppu": ppu},
                        seed, outdir)
        _finish(cfg, {"probe": probe.to_json()}, started, "resolvent",
                {"lambda": probe.lambdas, "margin": probe.margins})

    _run(body)


@main.command()
@click.option("--S", "s_token", default="0", show_default=True)
@click.option("--T", "t_token", default="pi/4", show_default=True)
@click.option("--r", type=float, default=1.0, show_default=True,
              help="observe outside [-r, r] at both times")
@click.option("--state", type=click.Choice(["gaussian", "bump"]), default="gaussian")
@click.option("--modes", type=int, default=80, show_default=True)
@click.option("--outdir", default=None)
@click.option("--seed", type=int, default=0)
def twotime(s_token, t_token, r, state, modes, outdir, seed):
    """Two-time observation quotient with ball-complement sets."""
    S_token, T_token = s_token, t_token

    def body():
        started = time.time()
        S = parse_time_token(S_token)
        T = parse_time_token(T_token)
        grid = spectra.Grid(14.0, 2801)
        table = spectra.hermite_table(modes, grid)
        x = grid.nodes
        if state == "gaussian":
            f = np.exp(-0.5 * (x - 0.7) ** 2).astype(complex)
        else:
            f = np.zeros_like(x, dtype=complex)
            inside = np.abs(x) < r
            f[inside] = np.exp(-1.0 / (1.0 - (x[inside] / r) ** 2))
        comp = realset.RealSet.from_intervals([(-grid.X - 1, -r), (r, grid.X + 1)])
        q = dynamics.two_time_quotient(f, S, T, comp, comp, table)
        regime = "resonant" if abs(dynamics.nearest_resonance(T - S)[1]) < 1e-9 \
            else "non-resonant"
        cfg = RunConfig("twotime", {"S": S_token, "T": T_token, "r": r,
                                    "state": state}, seed, outdir)
        _finish(cfg, {"quotient": q if q != float("inf") else "inf",
                      "regime": regime, "S": S, "T": T}, started, "twotime")

    _run(body)


if __name__ == "__main__":
    main()
