"""Parameter sweeps, INI configuration and CSV/JSON result files."""

from __future__ import annotations

import configparser
import csv
import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterable, Sequence

import numpy as np

from . import analytic
from .bell import BELL_LABELS, bell_fidelity, chsh_from_state
from .correlations import (
    PHOTON_THRESHOLD,
    UndefinedCorrelationError,
    g2_auto,
    g2_cross,
    mean_photon,
)
from .hilbert import HilbertSpec, ket2dm, partial_trace
from .lindblad import SteadyStateError, InvariantError, liouvillian, steady_state
from .model import ModelParams, build_hamiltonian, collapse_operators, default_spec

log = logging.getLogger(__name__)

NA = "NA"
#: Hilbert-space dimension above which the Liouvillian is stored sparse
SPARSE_ABOVE = 30
ENGINES = ("master", "analytic", "both")
FIDELITY_OUTPUTS = tuple(f"f_{label}" for label in BELL_LABELS)
OUTPUTS = ("n1", "n2", "g2_a1", "g2_a2", "g2_cross", "csi", "chsh") + FIDELITY_OUTPUTS
# names that set several ModelParams fields at once
ALIASES = {
    "delta": ("delta1", "delta2"),
    "u": ("u1", "u2"),
    "kappa": ("kappa1", "kappa2"),
    "theta": ("theta1",),
}
PARAM_FIELDS = tuple(f.name for f in fields(ModelParams))
SWEEPABLE = tuple(n for n in PARAM_FIELDS if n != "include_mechanics") + tuple(ALIASES)


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"
    endpoint: bool = True

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.name!r}; valid names: {', '.join(SWEEPABLE)}")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError(f"axis {self.name!r}: points must be an integer >= 2")
        if not self.start < self.stop:
            raise ConfigError(f"axis {self.name!r}: start must be < stop")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"axis {self.name!r}: spacing must be 'linear' or 'log'")
        if self.spacing == "log" and self.start <= 0:
            raise ConfigError(f"axis {self.name!r}: log spacing needs start > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points, endpoint=self.endpoint)
        return np.linspace(self.start, self.stop, self.points, endpoint=self.endpoint)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...] = ()
    fixed: ModelParams = field(default_factory=ModelParams)
    outputs: tuple[str, ...] = ("n1", "n2", "g2_a1", "g2_a2", "g2_cross", "csi")
    engine: str = "master"
    hilbert: HilbertSpec | None = None
    chsh_cross_term: str = "phase"
    labels: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if len(self.axes) > 2:
            raise ConfigError("at most two swept axes are supported")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate axis names {names}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}; valid: {', '.join(OUTPUTS)}")
        if not self.outputs:
            raise ConfigError("no outputs requested")
        if self.chsh_cross_term not in ("phase", "modulus"):
            raise ConfigError("chsh_cross_term must be 'phase' or 'modulus'")

    def spec(self) -> HilbertSpec:
        return self.hilbert or default_spec(self.fixed)

    def grid(self) -> list[tuple[float, ...]]:
        return list(itertools.product(*(a.values() for a in self.axes)))


@dataclass(frozen=True)
class ResultRow:
    axes: dict[str, Any]
    outputs: dict[str, float | None]
    engine: str
    status: str = "ok"

    @property
    def valid(self) -> bool:
        return self.status == "ok"


def apply_value(params: ModelParams, name: str, value: float) -> ModelParams:
    targets = ALIASES.get(name, (name,))
    for t in targets:
        if t not in PARAM_FIELDS:
            raise ConfigError(f"unknown parameter {name!r}")
    return replace(params, **{t: float(value) for t in targets})


# ---------------------------------------------------------------------------
# per-point evaluation


def _master_point(params: ModelParams, spec: HilbertSpec, outputs) -> tuple[dict, list[str]]:
    flags: list[str] = []
    values: dict[str, float | None] = dict.fromkeys(outputs)
    sparse = spec.dim > SPARSE_ABOVE
    try:
        lv = liouvillian(build_hamiltonian(params, spec), collapse_operators(params, spec), sparse=sparse)
        rho = steady_state(lv)
    except (SteadyStateError, InvariantError, np.linalg.LinAlgError, ValueError) as exc:
        return values, [f"master:solver_error:{type(exc).__name__}"]
    n1, n2 = mean_photon(rho, "a1", spec), mean_photon(rho, "a2", spec)
    compute = {
        "n1": lambda: n1,
        "n2": lambda: n2,
        "g2_a1": lambda: g2_auto(rho, "a1", spec),
        "g2_a2": lambda: g2_auto(rho, "a2", spec),
        "g2_cross": lambda: g2_cross(rho, "a1", "a2", spec),
        "csi": lambda: g2_cross(rho, "a1", "a2", spec)
        / math.sqrt(g2_auto(rho, "a1", spec) * g2_auto(rho, "a2", spec)),
        "chsh": lambda: chsh_from_state(rho, spec=spec),
    }
    if any(o in FIDELITY_OUTPUTS for o in outputs):
        optical = HilbertSpec.optical(spec.mode_dims[0], spec.mode_dims[1])
        rho_opt = partial_trace(rho, spec, ("a1", "a2"))
        for label in BELL_LABELS:
            compute[f"f_{label}"] = lambda label=label: bell_fidelity(rho_opt, label, optical)
    _fill(values, compute, outputs, n1, n2, flags, "master")
    return values, flags


def _analytic_point(params: ModelParams, outputs, cross_term) -> tuple[dict, list[str]]:
    values: dict[str, float | None] = dict.fromkeys(outputs)
    flags: list[str] = []
    try:
        amps = analytic.amplitudes(params)
    except analytic.SingularSystemError as exc:
        return values, [f"analytic:singular:{exc}"]
    n1, n2 = analytic.analytic_photon_numbers(params, amps)
    compute = {
        "n1": lambda: n1,
        "n2": lambda: n2,
        "g2_a1": lambda: analytic.analytic_g2(params, amps)[0],
        "g2_a2": lambda: analytic.analytic_g2(params, amps)[1],
        "g2_cross": lambda: analytic.analytic_g2(params, amps)[2],
        "csi": lambda: analytic.analytic_csi(params, amps),
        "chsh": lambda: analytic.analytic_chsh(params, amps, cross_term=cross_term),
    }
    if any(o in FIDELITY_OUTPUTS for o in outputs):
        rho = ket2dm(amps.state_vector())
        for label in BELL_LABELS:
            compute[f"f_{label}"] = lambda label=label: bell_fidelity(rho, label)
    _fill(values, compute, outputs, n1, n2, flags, "analytic")
    return values, flags


def _fill(values, compute, outputs, n1, n2, flags, engine):
    needs = {
        "g2_a1": (n1,), "g2_a2": (n2,),
        "g2_cross": (n1, n2), "csi": (n1, n2), "chsh": (n1, n2),
    }
    for name in outputs:
        if any(not n > PHOTON_THRESHOLD for n in needs.get(name, ())):
            flags.append(f"{engine}:undefined:{name}")
            continue
        try:
            values[name] = float(compute[name]())
        except (UndefinedCorrelationError, ZeroDivisionError, ValueError):
            flags.append(f"{engine}:undefined:{name}")


def evaluate_point(
    params: ModelParams,
    outputs: Sequence[str],
    engine: str = "master",
    spec: HilbertSpec | None = None,
    cross_term: str = "phase",
) -> tuple[dict[str, float | None], str]:
    """Requested outputs at one parameter point and a status string.

    With ``engine="both"`` every output appears twice, suffixed ``_analytic`` and ``_master``.
    """
    spec = spec or default_spec(params)
    values: dict[str, float | None] = {}
    flags: list[str] = []
    if engine in ("master", "both"):
        v, f = _master_point(params, spec, outputs)
        values.update({(k + "_master" if engine == "both" else k): x for k, x in v.items()})
        flags += f
    if engine in ("analytic", "both"):
        if params.include_mechanics:
            v, f = dict.fromkeys(outputs), ["analytic:not_applicable_with_mechanics"]
        else:
            v, f = _analytic_point(params, outputs, cross_term)
        values.update({(k + "_analytic" if engine == "both" else k): x for k, x in v.items()})
        flags += f
    return values, ("ok" if not flags else ";".join(flags))


def _evaluate_task(args) -> ResultRow:
    spec, point = args
    params = spec.fixed
    for axis, value in zip(spec.axes, point):
        params = apply_value(params, axis.name, value)
    try:
        values, status = evaluate_point(params, spec.outputs, spec.engine, spec.spec(), spec.chsh_cross_term)
    except Exception as exc:  # a bad point must not abort the sweep
        log.warning("point %s failed: %s", point, exc)
        names = _output_columns(spec.outputs, spec.engine)
        values, status = dict.fromkeys(names), f"error:{type(exc).__name__}"
    axes = dict(spec.labels)
    axes.update({a.name: float(v) for a, v in zip(spec.axes, point)})
    return ResultRow(axes=axes, outputs=values, engine=spec.engine, status=status)


def _output_columns(outputs, engine):
    if engine == "both":
        return [f"{o}_{e}" for o in outputs for e in ("master", "analytic")]
    return list(outputs)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[ResultRow]:
    """Evaluate every grid point, row-major over the axes.

    Rows come back in grid order whatever the number of worker processes.
    """
    tasks = [(spec, point) for point in spec.grid()]
    if workers <= 1 or len(tasks) < 2:
        return [_evaluate_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_task, tasks, chunksize=chunk))


# ---------------------------------------------------------------------------
# configuration


def _parse_number(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None


def _parse_bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")


def load_config(path: str | os.PathLike) -> tuple[ModelParams, HilbertSpec, SweepSpec]:
    """Read an INI file with ``[model]``, ``[hilbert]``, ``[sweep]`` and ``[axis NAME]`` sections.

    Missing model values fall back to the ModelParams defaults; any unknown
    section or key raises :class:`ConfigError` naming it.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None

    model_kwargs: dict[str, Any] = {}
    hilbert_kwargs = {"optical_cutoff": 5, "phonon_cutoff": 3}
    sweep_kwargs: dict[str, Any] = {}
    axes: list[Axis] = []
    for section in parser.sections():
        items = parser.items(section, raw=True)
        if section == "model":
            for key, raw in items:
                if key == "include_mechanics":
                    model_kwargs[key] = _parse_bool(section, key, raw)
                elif key in ALIASES and key != "theta":
                    for t in ALIASES[key]:
                        model_kwargs[t] = _parse_number(section, key, raw)
                elif key in PARAM_FIELDS:
                    model_kwargs[key] = _parse_number(section, key, raw)
                else:
                    raise ConfigError(f"unknown key {key!r} in [model]")
        elif section == "hilbert":
            for key, raw in items:
                if key not in hilbert_kwargs:
                    raise ConfigError(f"unknown key {key!r} in [hilbert]")
                value = _parse_number(section, key, raw)
                if value != int(value):
                    raise ConfigError(f"[hilbert] {key} must be an integer")
                hilbert_kwargs[key] = int(value)
        elif section == "sweep":
            for key, raw in items:
                if key == "engine":
                    sweep_kwargs["engine"] = raw.strip()
                elif key == "outputs":
                    sweep_kwargs["outputs"] = tuple(o.strip() for o in raw.split(",") if o.strip())
                elif key == "chsh_cross_term":
                    sweep_kwargs["chsh_cross_term"] = raw.strip()
                else:
                    raise ConfigError(f"unknown key {key!r} in [sweep]")
        elif section.startswith("axis "):
            name = section[len("axis "):].strip()
            spec = {"start": None, "stop": None, "points": None, "spacing": "linear", "endpoint": True}
            for key, raw in items:
                if key not in spec:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                if key == "spacing":
                    spec[key] = raw.strip()
                elif key == "endpoint":
                    spec[key] = _parse_bool(section, key, raw)
                else:
                    spec[key] = _parse_number(section, key, raw)
            missing = [k for k in ("start", "stop", "points") if spec[k] is None]
            if missing:
                raise ConfigError(f"[{section}] is missing {', '.join(missing)}")
            if spec["points"] != int(spec["points"]):
                raise ConfigError(f"[{section}] points must be an integer")
            spec["points"] = int(spec["points"])
            axes.append(Axis(name=name, **spec))
        else:
            raise ConfigError(f"unknown section [{section}]")

    try:
        params = ModelParams(**model_kwargs)
        hilbert = default_spec(params, **hilbert_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if min(hilbert.mode_dims[:2]) < 3:
        raise ConfigError("optical_cutoff must be >= 3 for two-photon correlators")
    sweep = SweepSpec(axes=tuple(axes), fixed=params, hilbert=hilbert, **sweep_kwargs)
    return params, hilbert, sweep


# ---------------------------------------------------------------------------
# output files


def columns(rows: Sequence[ResultRow]) -> list[str]:
    """Axis columns in sweep order, outputs alphabetically, then engine and status."""
    if not rows:
        return ["engine", "status"]
    return list(rows[0].axes) + sorted(rows[0].outputs) + ["engine", "status"]


def _fmt(value) -> str:
    if value is None:
        return NA
    if isinstance(value, (float, np.floating, int)) and not isinstance(value, bool):
        return format(float(value), ".17g")
    return str(value)


def write_csv(
    rows: Sequence[ResultRow],
    path: str | os.PathLike,
    header: Sequence[str] | None = None,
) -> None:
    """One header line, one line per row; ``None`` is written as ``NA``."""
    cols = list(header) if header is not None and not rows else columns(rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            flat = {**row.axes, **row.outputs, "engine": row.engine, "status": row.status}
            if set(flat) != set(cols):
                raise ValueError("all rows of one file must share the same columns")
            w.writerow([_fmt(flat[c]) for c in cols])


def _parse_cell(text: str):
    if text == NA:
        return None
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path: str | os.PathLike, axes: Iterable[str]) -> list[ResultRow]:
    """Inverse of :func:`write_csv`; ``axes`` names the leading axis columns."""
    axes = list(axes)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for rec in reader:
            out.append(
                ResultRow(
                    axes={k: _parse_cell(rec[k]) for k in axes},
                    outputs={
                        k: _parse_cell(v) for k, v in rec.items()
                        if k not in axes and k not in ("engine", "status")
                    },
                    engine=rec["engine"],
                    status=rec["status"],
                )
            )
    return out


def write_json(rows: Sequence[ResultRow], path: str | os.PathLike) -> None:
    cols = columns(rows)
    records = []
    for r in rows:
        flat = {**r.axes, **r.outputs, "engine": r.engine, "status": r.status}
        records.append({c: flat[c] for c in cols})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=1)
        fh.write("\n")
