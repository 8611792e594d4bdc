"""Named parameter grids for the figure datasets (blockade dips, phase scans, contours, fidelities)."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .bell import BELL_LABELS, bell_fidelity
from .correlations import g2_tau
from .hilbert import HilbertSpec, fock_dm
from .lindblad import evolve, liouvillian, steady_state
from .model import ModelParams, build_effective_hamiltonian, collapse_operators
from .sweep import Axis, ResultRow, SweepSpec, run_sweep

#: (J, U) of the three blockade regimes, in units of kappa
REGIMES = ((1.5, 0.09), (1.0, 0.5), (0.75, 1.0))
FIG5_COUPLINGS = (0.5, 1.0, 1.5, 2.0)
FIG6_RATIOS = (5, 15, 30, 50)
FIG6_COUPLINGS = (1.0, 0.5)
FIG6_E2 = 0.01

DELTA_AXIS = Axis("delta", -2.0, 2.0, 161)
CONTOUR_DELTA = Axis("delta", -2.0, 2.0, 61)
CONTOUR_U = Axis("u", 0.0, 2.0, 61)
THETA_AXIS = Axis("theta", 0.0, 2 * math.pi, 72, endpoint=False)


def _regime_params(j: float, u: float, **kw) -> ModelParams:
    return ModelParams(j_hop=j, u1=u, u2=u, **kw)


def fig2a(engine: str = "both", workers: int = 1, spec: HilbertSpec | None = None) -> list[ResultRow]:
    """g2 against detuning for the three (J, U) regimes."""
    rows = []
    for j, u in REGIMES:
        sweep = SweepSpec(
            axes=(DELTA_AXIS,),
            fixed=_regime_params(j, u),
            outputs=("g2_a1", "g2_a2", "g2_cross", "csi"),
            engine=engine,
            hilbert=spec,
            labels=(("j_hop", j), ("u", u)),
        )
        rows += run_sweep(sweep, workers)
    return rows


def optimal_detuning(j: float, u: float, spec: HilbertSpec | None = None, workers: int = 1) -> float:
    """Detuning of the master-equation g2_a1 minimum on the fig2a grid."""
    sweep = SweepSpec(axes=(DELTA_AXIS,), fixed=_regime_params(j, u), outputs=("g2_a1",), hilbert=spec)
    rows = run_sweep(sweep, workers)
    vals = [r.outputs["g2_a1"] if r.outputs["g2_a1"] is not None else np.inf for r in rows]
    return float(rows[int(np.argmin(vals))].axes["delta"])


def fig2bcd(engine: str = "master", workers: int = 1) -> list[ResultRow]:
    """g2_a1 against the drive phase difference at each regime's optimal detuning."""
    rows = []
    for j, u in REGIMES:
        delta = optimal_detuning(j, u, workers=workers)
        sweep = SweepSpec(
            axes=(THETA_AXIS,),
            fixed=_regime_params(j, u, delta1=delta, delta2=delta),
            outputs=("g2_a1",),
            engine=engine,
            labels=(("j_hop", j), ("u", u), ("delta", delta)),
        )
        rows += run_sweep(sweep, workers)
    return rows


def fig3ab(engine: str = "master", workers: int = 1) -> list[ResultRow]:
    rows = []
    for j, u in (REGIMES[0], REGIMES[2]):
        sweep = SweepSpec(
            axes=(DELTA_AXIS,),
            fixed=_regime_params(j, u),
            outputs=("n1", "n2"),
            engine=engine,
            labels=(("j_hop", j), ("u", u)),
        )
        rows += run_sweep(sweep, workers)
    return rows


def fig3c(tau_max: float = 20.0, tau_step: float = 0.05, spec: HilbertSpec | None = None) -> list[ResultRow]:
    """Delayed autocorrelations of both modes at the red-curve dip."""
    j, u = REGIMES[2]
    params = _regime_params(j, u, delta1=0.97, delta2=0.97)
    spec = spec or HilbertSpec.optical(5)
    lv = liouvillian(build_effective_hamiltonian(params, spec), collapse_operators(params, spec))
    rho = steady_state(lv)
    taus = np.linspace(0.0, tau_max, int(round(tau_max / tau_step)) + 1)
    g1 = g2_tau(rho, lv, "a1", taus, spec)
    g2 = g2_tau(rho, lv, "a2", taus, spec)
    return [
        ResultRow(axes={"tau": float(t)}, outputs={"g2_a1": float(x), "g2_a2": float(y)}, engine="master")
        for t, x, y in zip(taus, g1, g2)
    ]


def fig4(engine: str = "analytic", workers: int = 1, spot_check: bool = False) -> list[ResultRow]:
    """Analytic g2/CSI line cuts and (delta, U) maps for each regime."""
    outputs = ("g2_a1", "g2_a2", "csi")
    rows = []
    for j, u in REGIMES:
        line = SweepSpec(
            axes=(DELTA_AXIS,), fixed=_regime_params(j, u), outputs=outputs, engine=engine,
            labels=(("panel", "line"), ("j_hop", j), ("u", u)),
        )
        rows += run_sweep(line, workers)
        rows += _contour(j, outputs, engine, workers)
        if spot_check:
            rows += _contour(j, outputs, "master", workers, points=5)
    return rows


def _contour(j, outputs, engine, workers, points=None) -> list[ResultRow]:
    d_axis, u_axis = CONTOUR_DELTA, CONTOUR_U
    panel = "contour"
    if points is not None:
        d_axis = Axis("delta", d_axis.start, d_axis.stop, points)
        u_axis = Axis("u", u_axis.start, u_axis.stop, points)
        panel = "spotcheck"
    sweep = SweepSpec(
        axes=(u_axis, d_axis), fixed=ModelParams(j_hop=j), outputs=outputs, engine=engine,
        labels=(("panel", panel), ("j_hop", j)),
    )
    # keep the column order of the line cuts: panel, j_hop, u, delta
    return run_sweep(sweep, workers)


def fig5(
    engine: str = "analytic",
    workers: int = 1,
    couplings=FIG5_COUPLINGS,
    spot_check: bool = False,
    cross_term: str = "phase",
) -> list[ResultRow]:
    """CSI ratio and CHSH value over (delta, U) for each inter-cavity coupling."""
    rows = []
    for j in couplings:
        sweep = SweepSpec(
            axes=(CONTOUR_U, CONTOUR_DELTA), fixed=ModelParams(j_hop=j), outputs=("csi", "chsh"),
            engine=engine, chsh_cross_term=cross_term, labels=(("panel", "contour"), ("j_hop", j)),
        )
        rows += run_sweep(sweep, workers)
        if spot_check:
            rows += _contour_spot(j, cross_term, workers)
    return rows


def _contour_spot(j, cross_term, workers):
    sweep = SweepSpec(
        axes=(Axis("u", 0.0, 2.0, 5), Axis("delta", -2.0, 2.0, 5)),
        fixed=ModelParams(j_hop=j), outputs=("csi", "chsh"), engine="master",
        chsh_cross_term=cross_term, labels=(("panel", "spotcheck"), ("j_hop", j)),
    )
    return run_sweep(sweep, workers)


def fig6(
    t_max: float = 30.0,
    t_step: float = 0.1,
    couplings=FIG6_COUPLINGS,
    ratios=FIG6_RATIOS,
    spec: HilbertSpec | None = None,
) -> list[ResultRow]:
    """Bell fidelities along the evolution from vacuum at Delta = U = kappa.

    The weak drive is held at ``E2 = 0.01`` and ``E1 = ratio * E2``.
    """
    spec = spec or HilbertSpec.optical(5)
    times = np.linspace(0.0, t_max, int(round(t_max / t_step)) + 1)
    rows = []
    for j in couplings:
        for ratio in ratios:
            params = ModelParams(
                delta1=1.0, delta2=1.0, u1=1.0, u2=1.0, j_hop=j, e1=ratio * FIG6_E2, e2=FIG6_E2
            )
            lv = liouvillian(build_effective_hamiltonian(params, spec), collapse_operators(params, spec))
            states = evolve(fock_dm(spec, (0, 0)), lv, times)
            for t, rho in zip(times, states):
                rows.append(
                    ResultRow(
                        axes={"j_hop": j, "ratio": float(ratio), "t": float(t)},
                        outputs={f"f_{b}": bell_fidelity(rho, b, spec) for b in BELL_LABELS},
                        engine="master",
                    )
                )
    return rows


PRESETS: dict[str, Callable[..., list[ResultRow]]] = {
    "fig2a": fig2a,
    "fig2bcd": fig2bcd,
    "fig3ab": fig3ab,
    "fig3c": fig3c,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
}


def figure_preset(name: str, **kwargs) -> list[ResultRow]:
    try:
        fn = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return fn(**kwargs)
