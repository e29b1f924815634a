"""obslab: a numerical laboratory for observable sets of 1-D Schrodinger
equations with polynomial confinement."""

from . import dynamics, observability, quadrature, realset, reporting, spectra, wkb

__all__ = [
    "dynamics",
    "observability",
    "quadrature",
    "realset",
    "reporting",
    "spectra",
    "wkb",
]

__version__ = "0.1.0"
