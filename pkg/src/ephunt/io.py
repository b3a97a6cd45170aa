"""CSV/JSON serialization, run configuration and plot-ready output."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .hunt import EPReport, Sample, ScalingResult, SusceptibilityCurve

TOY_COLUMNS = ["lambda", "re_f", "im_f", "re_chi", "im_chi", "chi_exact", "rigidity", "status"]
SSH_COLUMNS = ["w", "chi0_density", "status"]
SCALING_COLUMNS = ["n", "chi0"]
PLOT_CLIP = 1e4


def fmt(x: float) -> str:
    """Shortest round-tripping decimal; ``nan`` for missing values."""
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def _parse(s: str) -> float:
    return float(s) if s not in ("", "nan") else float("nan")


@dataclass
class RunConfig:
    """Everything a CLI run needs; serializes to a flat JSON object."""

    command: str = ""
    model: str = ""
    params: dict[str, Any] = field(default_factory=dict)
    grid_min: float | None = None
    grid_max: float | None = None
    step: float | None = None
    band: int = 0
    epsilon: float = 1e-4
    richardson: bool = True
    method: str = "auto"
    threads: int = 1
    threshold: float = 1e3
    find_eps: bool = False
    n_list: list[int] = field(default_factory=list)
    input: str | None = None
    seed: int = 0
    perturb_metric: float = 0.0
    out: str = "."
    format: str = "csv"
    plot: bool = False

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())


# --------------------------------------------------------------------------- curves


def _toy_row(s: Sample) -> list[str]:
    return [
        fmt(s.lam), fmt(s.f.real), fmt(s.f.imag), fmt(s.chi.real), fmt(s.chi.imag),
        fmt(s.chi_exact), fmt(s.rigidity), s.status,
    ]


def _ssh_row(s: Sample) -> list[str]:
    return [fmt(s.lam), fmt(s.chi.real), s.status]


def curve_to_csv(curve: SusceptibilityCurve, path: str | Path) -> Path:
    path = Path(path)
    ssh = curve.model == "ssh"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SSH_COLUMNS if ssh else TOY_COLUMNS)
        for s in curve.samples:
            writer.writerow(_ssh_row(s) if ssh else _toy_row(s))
    return path


def curve_from_csv(path: str | Path) -> SusceptibilityCurve:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    samples = []
    if header == SSH_COLUMNS:
        nan = float("nan")
        for w, chi, status in body:
            samples.append(Sample(_parse(w), complex(nan, nan), complex(_parse(chi), 0.0), nan, status))
        return SusceptibilityCurve(samples, "w", "ssh")
    if header == TOY_COLUMNS:
        for lam, ref, imf, rec, imc, exact, rig, status in body:
            samples.append(
                Sample(_parse(lam), complex(_parse(ref), _parse(imf)), complex(_parse(rec), _parse(imc)),
                       _parse(rig), status, _parse(exact))
            )
        return SusceptibilityCurve(samples, "lambda", "toy")
    raise ValueError(f"{path}: unrecognized header {header}")


def _jnum(x: float):
    x = float(x)
    return None if math.isnan(x) else x


def curve_to_json(curve: SusceptibilityCurve) -> dict:
    return {
        "model": curve.model,
        "parameter": curve.parameter,
        "samples": [
            {
                "lambda": s.lam,
                "f": [_jnum(s.f.real), _jnum(s.f.imag)],
                "chi": [_jnum(s.chi.real), _jnum(s.chi.imag)],
                "chi_exact": _jnum(s.chi_exact),
                "rigidity": _jnum(s.rigidity),
                "status": s.status,
            }
            for s in curve.samples
        ],
    }


def report_to_json(report: EPReport) -> dict:
    return {
        "threshold": report.threshold,
        "candidates": [
            {
                "lambda_ep": c.lambda_ep,
                "bracket": list(c.bracket),
                "min_band_gap": c.min_band_gap,
                "ep_residual": _jnum(c.ep_residual),
                "divergence_fit_exponent": _jnum(c.divergence_fit_exponent),
                "evidence": c.evidence,
            }
            for c in report.candidates
        ],
        "rejected": list(report.rejected),
    }


def scaling_to_csv(result: ScalingResult, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCALING_COLUMNS)
        for n, chi in zip(result.n, result.chi0):
            writer.writerow([n, fmt(chi)])
    return path


def scaling_fit_json(result: ScalingResult) -> dict:
    return {"slope": result.slope, "intercept": result.intercept, "max_residual": result.max_residual}


def write_json(obj, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2) + "\n")
    return path


# --------------------------------------------------------------------------- plots

_GNUPLOT = """\
# gnuplot script; values beyond +-{clip:g} were clipped in {data}
set xlabel "{xlabel}"
set ylabel "{ylabel}"
set key off
set grid
plot "{data}" using 1:2 with {style}
"""


def _plot_num(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.16e}"


def emit_plot_data(obj: SusceptibilityCurve | EPReport, path: str | Path) -> tuple[Path, Path]:
    """Write a two-column data file and a companion gnuplot script.

    Numbers carry 17 significant digits; divergent values are clipped to
    ``+-1e4`` here only, never in the CSV output.
    """
    path = Path(path)
    if isinstance(obj, EPReport):
        if not obj.candidates:
            raise ValueError("EP report is empty; nothing to plot")
        xs = np.array(obj.locations)
        ys = np.zeros_like(xs)
        labels = ("lambda_ep", "marker", "points pt 7")
    else:
        if len(obj) == 0:
            raise ValueError("curve is empty; nothing to plot")
        xs = obj.lambdas
        ys = np.clip(obj.re_chi, -PLOT_CLIP, PLOT_CLIP)
        labels = (obj.parameter, "Re chi", "linespoints pt 7 ps 0.4")
    try:
        with path.open("w", newline="\n") as fh:
            for x, y in zip(xs, ys):
                fh.write(f"{_plot_num(x)} {_plot_num(y)}\n")
        script = path.with_suffix(".gp")
        script.write_text(
            _GNUPLOT.format(clip=PLOT_CLIP, data=path.name, xlabel=labels[0], ylabel=labels[1], style=labels[2])
        )
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc}") from exc
    return path, script
