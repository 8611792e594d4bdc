import cmath
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from optoblockade.analytic import (
    AmplitudeSet,
    amplitudes,
    analytic_chsh,
    analytic_csi,
    analytic_g2,
    analytic_photon_numbers,
    blockade_condition_residual,
    single_excitation_amplitudes,
    two_excitation_amplitudes,
)
from optoblockade.bell import chsh_from_state
from optoblockade.correlations import UndefinedCorrelationError, mean_photon
from optoblockade.hilbert import HilbertSpec
from optoblockade.lindblad import liouvillian, steady_state
from optoblockade.model import ModelParams, build_effective_hamiltonian, collapse_operators

SQ2 = math.sqrt(2)
RED = ModelParams(j_hop=0.75, u1=1.0, u2=1.0, delta1=0.97, delta2=0.97)

ORDER = ((1, 0), (0, 1), (2, 0), (0, 2), (1, 1))


def projection_oracle(p: ModelParams) -> dict:
    """Amplitudes from the non-Hermitian Hamiltonian matrix, one manifold at a time.

    Rows of H - i kappa n / 2 for the one- and two-photon states are kept, and
    only couplings within a manifold or from the manifold below are retained.
    """
    spec = HilbertSpec.optical(3)
    h = build_effective_hamiltonian(p, spec).astype(complex)
    for j, k in enumerate((p.kappa1, p.kappa2)):
        for occ in np.ndindex(3, 3):
            h[spec.basis_index(occ), spec.basis_index(occ)] -= 0.5j * k * occ[j]
    idx = {o: spec.basis_index(o) for o in ((0, 0),) + ORDER}
    manifold = lambda o: sum(o)  # noqa: E731
    a = np.zeros((5, 5), dtype=complex)
    b = np.zeros(5, dtype=complex)
    for r, ro in enumerate(ORDER):
        b[r] = -h[idx[ro], idx[(0, 0)]]
        for c, co in enumerate(ORDER):
            if manifold(co) <= manifold(ro):
                a[r, c] = h[idx[ro], idx[co]]
    x = np.linalg.solve(a, b)
    return dict(zip(("c10", "c01", "c20", "c02", "c11"), x))


params_st = st.builds(
    ModelParams,
    delta1=st.floats(-2, 2), delta2=st.floats(-2, 2),
    u1=st.floats(0, 2), u2=st.floats(0, 2),
    j_hop=st.floats(0.05, 2),
    e1=st.floats(0.001, 0.1), e2=st.floats(0.001, 0.1),
    theta1=st.floats(0, 2 * math.pi), theta2=st.floats(0, 2 * math.pi),
    kappa1=st.floats(0.5, 1.5), kappa2=st.floats(0.5, 1.5),
)


@settings(max_examples=60, deadline=None)
@given(params_st)
def test_amplitudes_match_hamiltonian_projection(p):
    amps = amplitudes(p)
    oracle = projection_oracle(p)
    for name, value in oracle.items():
        assert getattr(amps, name) == pytest.approx(value, rel=1e-9, abs=1e-15)


def test_single_mode_closed_forms():
    p = ModelParams(j_hop=0.0, e2=0.0, e1=0.1, theta1=0.3, delta1=0.4, u1=0.7)
    d = 0.4 - 0.5j
    f = 0.1 * cmath.exp(0.3j)
    c10, c01 = single_excitation_amplitudes(p)
    assert c10 == pytest.approx(-f / (d - 0.7))
    assert c01 == 0
    c20, c02, c11 = two_excitation_amplitudes(p, c10, c01)
    assert c20 == pytest.approx(f**2 / (SQ2 * (d - 0.7) * (d - 1.4)))
    assert c02 == 0 and c11 == 0


def test_no_drive_no_excitation():
    p = ModelParams(e1=0.0, e2=0.0)
    a = amplitudes(p)
    assert (a.c10, a.c01, a.c20, a.c02, a.c11) == (0, 0, 0, 0, 0)


def test_theta1_shift_with_single_drive():
    # every amplitude of order k in E1 picks up exp(i k phi)
    p = ModelParams(e2=0.0, delta1=0.3, delta2=0.3)
    phi = 0.81
    a, b = amplitudes(p), amplitudes(p.with_(theta1=phi))
    w = cmath.exp(1j * phi)
    assert b.c10 == pytest.approx(a.c10 * w)
    assert b.c01 == pytest.approx(a.c01 * w)
    assert b.c20 == pytest.approx(a.c20 * w**2)
    assert b.c11 == pytest.approx(a.c11 * w**2)
    assert b.c02 == pytest.approx(a.c02 * w**2)


def test_single_cavity_g2_closed_form():
    p = ModelParams(j_hop=0.0, e2=0.0, e1=0.01, delta1=1.0, u1=1.0)
    with pytest.raises(UndefinedCorrelationError):
        analytic_g2(p)
    a = amplitudes(p)
    g2 = 2 * abs(a.c20) ** 2 / abs(a.c10) ** 4
    assert g2 == pytest.approx(0.2, rel=1e-12)


@pytest.mark.parametrize("delta,u", [(1.0, 1.0), (0.0, 0.5), (-0.7, 0.2), (2.0, 1.3)])
def test_single_cavity_formula(delta, u):
    p = ModelParams(j_hop=0.0, e2=0.0, e1=0.01, delta1=delta, u1=u)
    a = amplitudes(p)
    g2 = 2 * abs(a.c20) ** 2 / abs(a.c10) ** 4
    expected = ((delta - u) ** 2 + 0.25) / ((delta - 2 * u) ** 2 + 0.25)
    assert g2 == pytest.approx(expected, rel=1e-12)


def test_harmonic_limit_symbolic():
    d1, d2, j, f1, f2 = sp.symbols("d1 d2 j f1 f2")
    c10, c01, c20, c02, c11 = sp.symbols("c10 c01 c20 c02 c11")
    s2 = sp.sqrt(2)
    one = sp.solve([d1 * c10 + j * c01 + f1, d2 * c01 + j * c10 + f2], [c10, c01], dict=True)[0]
    two = sp.solve(
        [
            2 * d1 * c20 + s2 * j * c11 + s2 * f1 * c10,
            2 * d2 * c02 + s2 * j * c11 + s2 * f2 * c01,
            s2 * j * (c20 + c02) + (d1 + d2) * c11 + f1 * c01 + f2 * c10,
        ],
        [c20, c02, c11],
        dict=True,
    )[0]
    two = {k: sp.simplify(v.subs(one)) for k, v in two.items()}
    # a coherent product state has c20 = c10^2/sqrt2 and c11 = c10 c01
    assert sp.simplify(two[c20] - one[c10] ** 2 / s2) == 0
    assert sp.simplify(two[c02] - one[c01] ** 2 / s2) == 0
    assert sp.simplify(two[c11] - one[c10] * one[c01]) == 0


@settings(max_examples=60, deadline=None)
@given(params_st)
def test_harmonic_limit_numeric(p):
    p = p.with_(u1=0.0, u2=0.0)
    g1, g2, gx = analytic_g2(p)
    assert abs(g1 - 1) < 1e-9 and abs(g2 - 1) < 1e-9 and abs(gx - 1) < 1e-9
    assert abs(analytic_csi(p) - 1) < 1e-9


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(-math.pi, math.pi))
def test_phase_covariance(p, phi):
    q = p.with_(theta1=p.theta1 + phi, theta2=p.theta2 + phi)
    a = (*analytic_g2(p), analytic_csi(p), analytic_chsh(p))
    b = (*analytic_g2(q), analytic_csi(q), analytic_chsh(q))
    np.testing.assert_allclose(a, b, rtol=1e-8)


@settings(max_examples=60, deadline=None)
@given(params_st)
def test_mode_swap_symmetry(p):
    q = p.swapped()
    g1, g2, _ = analytic_g2(p)
    h1, h2, _ = analytic_g2(q)
    assert h1 == pytest.approx(g2, rel=1e-8)
    assert h2 == pytest.approx(g1, rel=1e-8)
    assert analytic_csi(q) == pytest.approx(analytic_csi(p), rel=1e-8)
    assert analytic_chsh(q) == pytest.approx(analytic_chsh(p), rel=1e-8, abs=1e-12)


def test_hierarchy_in_weak_drive():
    assert amplitudes(ModelParams()).hierarchy_ok
    assert amplitudes(RED).hierarchy_ok


def test_single_photon_occupation_matches_master():
    spec = HilbertSpec.optical(5)
    l = liouvillian(build_effective_hamiltonian(RED, spec), collapse_operators(RED, spec))
    n1 = mean_photon(steady_state(l), 0, spec)
    assert abs(amplitudes(RED).c10) ** 2 == pytest.approx(n1, rel=0.1)
    assert analytic_photon_numbers(RED)[0] == pytest.approx(n1, rel=0.1)


def test_red_curve_dip_location():
    deltas = np.linspace(-2, 2, 401)
    g = [analytic_g2(RED.with_(delta1=d, delta2=d))[0] for d in deltas]
    assert abs(deltas[int(np.argmin(g))] - 0.97) < 0.05


def test_csi_boundary_identity():
    c = 0.01 + 0.02j
    a = AmplitudeSet(c10=0.1, c01=0.1, c20=c, c02=c, c11=SQ2 * c)
    assert analytic_csi(ModelParams(), a) == pytest.approx(1)


def test_csi_violated_at_red_dip():
    assert analytic_csi(RED) > 1


def test_csi_undefined():
    with pytest.raises(UndefinedCorrelationError):
        analytic_csi(ModelParams(), AmplitudeSet(c10=0.1, c01=0.1, c20=0, c02=0.01, c11=0.01))


def test_chsh_examples():
    p = ModelParams()
    assert analytic_chsh(p, AmplitudeSet(0.1, 0.1, c11=0.02, c20=0, c02=0)) == pytest.approx(2 * SQ2)
    assert analytic_chsh(p, AmplitudeSet(0.1, 0.1, c11=0, c20=0.03, c02=0.03)) == pytest.approx(0, abs=1e-15)
    with pytest.raises(UndefinedCorrelationError):
        analytic_chsh(p, AmplitudeSet(0.1, 0.1, 0, 0, 0))
    with pytest.raises(ValueError):
        analytic_chsh(p, cross_term="other")


def test_chsh_modulus_flag():
    a = AmplitudeSet(0.1, 0.1, c11=0.0, c20=0.03, c02=-0.03)
    assert analytic_chsh(ModelParams(), a, cross_term="phase") == pytest.approx(2 * SQ2)
    assert analytic_chsh(ModelParams(), a, cross_term="modulus") == pytest.approx(0, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(params_st)
def test_chsh_agrees_with_state_based_chsh(p):
    a = amplitudes(p)
    psi = a.state_vector()
    rho = np.outer(psi, psi.conj())
    assert analytic_chsh(p, a) == pytest.approx(chsh_from_state(rho, spec=HilbertSpec.optical(3)), rel=1e-9)


def test_chsh_violation_at_weak_coupling():
    best = max(
        analytic_chsh(ModelParams(j_hop=0.5, delta1=d, delta2=d, u1=u, u2=u))
        for d in np.linspace(-2, 2, 41) for u in np.linspace(0.05, 2, 40)
    )
    assert 2.5 < best <= 2 * SQ2


def test_blockade_residual_algebra():
    p = ModelParams(delta1=0.3, delta2=0.5, u1=0.2, u2=0.4, j_hop=0.8)
    zero = blockade_condition_residual(p.with_(e1=0.0))
    assert zero == pytest.approx((0.3 - 0.4 - 0.5j) * (0.8 - 0.6 - 1j))
    sub1 = zero - blockade_condition_residual(p)
    sub2 = zero - blockade_condition_residual(p.with_(e1=2 * p.e1))
    assert sub2 == pytest.approx(4 * sub1)
    with pytest.raises(ValueError):
        blockade_condition_residual(p.with_(j_hop=0.0))


def test_blockade_residual_continuous():
    def max_jump(points):
        deltas = np.linspace(-2, 2, points)
        r = [abs(blockade_condition_residual(RED.with_(delta1=d, delta2=d))) for d in deltas]
        return np.max(np.abs(np.diff(r)))

    # jumps shrink in proportion to the grid step
    assert max_jump(4001) < 0.6 * max_jump(2001)
