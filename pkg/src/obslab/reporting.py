"""Run configuration, report documents, and machine-readable output.

Reports are deterministic given the same config and seed: wall-clock
metadata lives in a dedicated field that comparisons strip.  Files are
written atomically (temp file in the target directory, then rename).
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

ARTIFACT_VERSION = "0.1.0"
OUTDIR_ENV = "OBSLAB_OUTDIR"

_PI_TERM = re.compile(r"^(\d*\.?\d*)\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


def parse_time_token(token: str) -> float:
    """Times like "0.3", "pi", "pi/2", "3pi/4", "pi/2+0.3", "pi-0.1".

    The pi fractions are parsed exactly so minimal-time experiments do
    not suffer decimal drift.
    """
    s = token.strip().lower().replace(" ", "")
    total = 0.0
    for part in re.finditer(r"[+-]?[^+-]+", s):
        term = part.group(0)
        sign = -1.0 if term.startswith("-") else 1.0
        term = term.lstrip("+-")
        m = _PI_TERM.match(term)
        if m:
            coef = float(m.group(1)) if m.group(1) else 1.0
            den = float(m.group(2)) if m.group(2) else 1.0
            total += sign * coef * math.pi / den
        else:
            total += sign * float(term)
    return total


def parse_set_token(token: str, horizon: float = 256.0):
    """Inline set specs: halfline:a, bounded:R, periodic:x0,
    dyadic:linear[:coeff], dyadic:const:c, polygap:eps,
    intervals:a,b;c,d."""
    from . import realset

    kind, _, rest = token.partition(":")
    kind = kind.strip().lower()
    if kind == "halfline":
        return realset.from_spec({"family": "halfline",
                                  "params": {"a": float(rest or 0.0)}}, horizon)
    if kind == "bounded":
        return realset.from_spec({"family": "bounded", "params": {"R": float(rest)}},
                                 horizon)
    if kind == "periodic":
        return realset.from_spec({"family": "periodic", "params": {"x0": float(rest)}},
                                 horizon)
    if kind == "dyadic":
        rule, _, coeff = rest.partition(":")
        rule = {"const": "constant"}.get(rule, rule or "linear")
        return realset.from_spec({"family": "dyadic_gap",
                                  "params": {"rule": rule,
                                             "coeff": float(coeff or 1.0)}}, horizon)
    if kind == "polygap":
        return realset.from_spec({"family": "polynomial_gap",
                                  "params": {"eps": float(rest)}}, horizon)
    if kind == "intervals":
        ivs = [tuple(float(v) for v in piece.split(",")) for piece in rest.split(";")]
        return realset.from_spec({"intervals": [list(iv) for iv in ivs]})
    raise ValueError(f"unknown set token {token!r}")


@dataclass
class RunConfig:
    command: str
    options: dict
    seed: int = 0
    outdir: Optional[str] = None

    def resolve_outdir(self) -> Path:
        base = self.outdir or os.environ.get(OUTDIR_ENV) or "reports"
        p = Path(base)
        p.mkdir(parents=True, exist_ok=True)
        return p


@dataclass
class ReportDocument:
    config: dict
    results: dict
    meta: dict = field(default_factory=dict)

    @staticmethod
    def build(config: RunConfig, results: dict, started: float) -> "ReportDocument":
        return ReportDocument(
            config={"command": config.command, "options": config.options,
                    "seed": config.seed},
            results=results,
            meta={"artifact_version": ARTIFACT_VERSION,
                  "wall_clock_s": time.time() - started},
        )

    def stripped(self) -> dict:
        """Deterministic view: wall-clock metadata removed."""
        meta = {k: v for k, v in self.meta.items() if k != "wall_clock_s"}
        return {"config": self.config, "results": self.results, "meta": meta}


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(doc: ReportDocument, path) -> Path:
    path = Path(path)
    payload = {"config": doc.config, "results": _jsonify(doc.results),
               "meta": doc.meta}
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
    return path


def write_csv(path, columns: dict, meta: Optional[dict] = None) -> Path:
    """CSV with '#'-prefixed JSON metadata lines before the header row."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    lines = []
    if meta:
        lines.append("# " + json.dumps(_jsonify(meta)))
    lines.append(",".join(names))
    for row in zip(*arrays):
        lines.append(",".join(repr(float(v)) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def schema_path() -> Path:
    return Path(__file__).parent / "schemas" / "report.schema.json"
