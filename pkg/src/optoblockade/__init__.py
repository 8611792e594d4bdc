"""Photon blockade, Cauchy-Schwarz and CHSH witnesses in two coupled driven Kerr cavities."""

from .hilbert import HilbertSpec, destroy, embed, expect, tensor
from .model import ModelParams, build_effective_hamiltonian, build_lab_hamiltonian, collapse_operators
from .lindblad import evolve, liouvillian, steady_state
from .correlations import (
    CorrelationReport,
    UndefinedCorrelationError,
    correlation_report,
    csi_witness,
    g2_auto,
    g2_cross,
    g2_tau,
    mean_photon,
)
from .analytic import AmplitudeSet, amplitudes, analytic_chsh, analytic_csi, analytic_g2
from .bell import AngleSet, bell_fidelity, chsh_correlator, chsh_from_state

__version__ = "0.1.0"
