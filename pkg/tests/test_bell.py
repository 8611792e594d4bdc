import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optoblockade.bell import (
    BELL_LABELS,
    AngleSet,
    bell_fidelities,
    bell_fidelity,
    bell_fidelity_renormalized,
    bell_state,
    chsh_closed_form,
    chsh_correlator,
    chsh_from_state,
    mode_transformation_check,
    qubit_subspace_weight,
)
from optoblockade.correlations import UndefinedCorrelationError
from optoblockade.hilbert import HilbertSpec, dag, fock_dm, ket2dm, mode_destroy

SQ2 = math.sqrt(2)
SPEC3 = HilbertSpec.optical(3)


def _random_dm(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    r = g @ g.conj().T
    return r / np.trace(r)


def _phi_plus(spec=SPEC3):
    return ket2dm(bell_state("phi_plus", spec))


def _brute_correlator(rho, theta, phi, spec=SPEC3):
    """Normal-ordered intensity correlator built from the rotated detector modes."""
    a1, a2 = mode_destroy(spec, "a1"), mode_destroy(spec, "a2")
    ct, st_, cp, sp_ = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    modes_a = (ct * a1 + st_ * a2, -st_ * a1 + ct * a2)
    modes_b = (cp * a1 - sp_ * a2, sp_ * a1 + cp * a2)
    e = lambda op: np.trace(op @ rho)  # noqa: E731
    coinc = {}
    for (i, x), (k, y) in itertools.product(enumerate(modes_a), enumerate(modes_b)):
        coinc[i, k] = e(dag(x) @ dag(y) @ y @ x).real
    num = coinc[0, 0] + coinc[1, 1] - coinc[0, 1] - coinc[1, 0]
    return num / sum(coinc.values())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, math.pi), st.floats(0, math.pi))
def test_correlator_matches_detector_mode_construction(seed, theta, phi):
    rho = _random_dm(np.random.default_rng(seed), 9)
    assert chsh_correlator(rho, theta, phi, SPEC3) == pytest.approx(_brute_correlator(rho, theta, phi), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_correlator_bounded_and_double_angle(seed, theta, phi):
    rho = _random_dm(np.random.default_rng(seed), 9, rank=2)
    e = chsh_correlator(rho, theta, phi, SPEC3)
    assert -1 - 1e-12 <= e <= 1 + 1e-12
    assert chsh_correlator(rho, theta + math.pi / 2, phi + math.pi / 2, SPEC3) == pytest.approx(e, abs=1e-12)


def test_phi_plus_correlator():
    assert chsh_correlator(_phi_plus(), 0.0, math.pi / 8, SPEC3) == pytest.approx(-1 / SQ2, abs=1e-14)


def test_phi_plus_chsh():
    assert chsh_from_state(_phi_plus(), spec=SPEC3) == pytest.approx(2 * SQ2, abs=1e-12)


def test_two_zero_fock_chsh():
    assert chsh_from_state(fock_dm(SPEC3, (2, 0)), spec=SPEC3) == pytest.approx(SQ2, abs=1e-12)


@pytest.mark.parametrize("occ", [(2, 0), (0, 2), (3, 0), (0, 3)])
def test_single_mode_fock_manifold_no_violation(occ):
    spec = HilbertSpec.optical(4)
    assert chsh_from_state(fock_dm(spec, occ), spec=spec) <= 2


def test_one_one_fock_reaches_tsirelson():
    # the intensity estimator gives the maximal value for |11> itself
    assert chsh_from_state(fock_dm(SPEC3, (1, 1)), spec=SPEC3) == pytest.approx(2 * SQ2)


def test_angle_sum_equals_closed_form():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        rho = _random_dm(rng, 9)
        assert abs(chsh_from_state(rho, spec=SPEC3) - chsh_closed_form(rho, SPEC3)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9))
def test_tsirelson_bound(seed, rank):
    rho = _random_dm(np.random.default_rng(seed), 9, rank)
    assert chsh_from_state(rho, spec=SPEC3) <= 2 * SQ2 + 1e-9


def test_custom_angles():
    zero = AngleSet(0.0, 0.0, 0.0, 0.0)
    # all four correlators coincide so the sum collapses to 2 E(0, 0)
    rho = fock_dm(SPEC3, (2, 0))
    assert chsh_from_state(rho, zero, SPEC3) == pytest.approx(2.0)


def test_correlator_undefined_without_two_photons():
    with pytest.raises(UndefinedCorrelationError):
        chsh_correlator(fock_dm(SPEC3, (1, 0)), 0.0, 0.0, SPEC3)


@pytest.mark.parametrize("theta,phi", [(0.0, 0.0), (math.pi / 4, math.pi / 8)] + [
    tuple(np.random.default_rng(k).uniform(0, 2 * math.pi, 2)) for k in range(10)
])
def test_mode_transformation_identities(theta, phi):
    rep = mode_transformation_check(theta, phi)
    assert rep.ok, rep.residuals
    assert set(rep.residuals) == {"A_sum", "B_sum", "A_difference", "B_difference"}


def test_bell_states_orthonormal():
    spec = HilbertSpec.optical(3)
    vs = np.array([bell_state(b, spec) for b in BELL_LABELS])
    np.testing.assert_allclose(vs.conj() @ vs.T, np.eye(4), atol=1e-15)
    with pytest.raises(ValueError):
        bell_state("ghz", spec)


def test_fidelity_examples():
    spec = HilbertSpec.optical(3)
    assert bell_fidelity(fock_dm(spec, (0, 0)), "phi_plus", spec) == pytest.approx(0.5)
    assert bell_fidelity(ket2dm(bell_state("psi_minus", spec)), "psi_minus", spec) == pytest.approx(1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fidelity_sum_is_subspace_weight(seed):
    rho = _random_dm(np.random.default_rng(seed), 9)
    f = bell_fidelities(rho, SPEC3)
    w = qubit_subspace_weight(rho, SPEC3)
    assert sum(f.values()) == pytest.approx(w, abs=1e-12)
    assert w <= 1 + 1e-12
    assert all(0 <= v <= 1 for v in f.values())
    assert sum(bell_fidelity_renormalized(rho, b, SPEC3) for b in BELL_LABELS) == pytest.approx(1)
