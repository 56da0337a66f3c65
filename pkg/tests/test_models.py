import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from renyiflow.bath import BathSpec, Susceptibility, bose_occupation
from renyiflow.fcs import analytic_cumulant, gf_incoherent
from renyiflow.linalg import SteadyStateError
from renyiflow.models import (OscillatorSpec, QheSpec, QheSteadyState, ho_closed_fcs, ho_closed_rflow, ho_spectra,
                              qhe_closed_fcs, qhe_closed_rflow, qhe_liouvillian, qhe_rates, qhe_spectra,
                              qhe_steady_state)
from renyiflow.rflow import correspondence_point, shannon_flow, total_flow

# Independent high-precision evaluation (mpmath, 40 digits) of the line-rate
# formulas at beta = 1, splitting 1, chi = 1, p1 = 0.3, no coherence.
QHE_F_I_M2 = 0.031058578630004879
QHE_FLOW = {2: 0.062117157260009759, 3: 0.11597849127378356, 5: 0.20994591652184838}
QHE_C1, QHE_C2 = 0.06720931725226943, 0.88197670686932642
# Oscillator at beta = 1, omega0 = 1, t_eff = 2, chi = 1.
HO_FLOW_M2 = 0.88681888397007391


@pytest.fixture
def qhe_ref():
    return QheSpec(1.0, BathSpec(1.0)), QheSteadyState.from_populations(0.3)


def testqhe_reference_values(qhe_ref):
    spec, st_ = qhe_ref
    ycal, ycoh = qhe_spectra(spec, st_)
    probe, xi = correspondence_point(spec.probe, 2)
    assert gf_incoherent(probe, ycal, xi).real == pytest.approx(QHE_F_I_M2, rel=1e-13)
    for m, v in QHE_FLOW.items():
        assert total_flow(spec.probe, m, ycal, ycoh).value == pytest.approx(v, rel=1e-13)
        assert qhe_closed_rflow(spec, st_, m) == pytest.approx(v, rel=1e-13)
    assert analytic_cumulant(spec.probe, ycal, 1) == pytest.approx(QHE_C1, rel=1e-13)
    assert analytic_cumulant(spec.probe, ycal, 2) == pytest.approx(QHE_C2, rel=1e-13)
    assert shannon_flow(spec.probe, ycal, ycoh) == pytest.approx(QHE_C1, rel=1e-9)


def test_c1_is_rate_balance(qhe_ref):
    spec, st_ = qhe_ref
    up, down = qhe_rates(spec).probe
    ycal, _ = qhe_spectra(spec, st_)
    assert analytic_cumulant(spec.probe, ycal, 1) == pytest.approx(down * st_.p1 - up * st_.p0, rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.3, 2.0), st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * np.pi),
       st.sampled_from([0.5, 2.0, 3.0, 5.0]))
def test_qhe_generic_matches_closed(beta, w, p1, r, phase, m):
    spec = QheSpec(w, BathSpec(beta, Susceptibility.constant(1.3)))
    st_ = QheSteadyState.from_populations(p1, r * np.sqrt(p1 * (1 - p1)) * np.exp(1j * phase))
    ycal, ycoh = qhe_spectra(spec, st_)
    fr = total_flow(spec.probe, m, ycal, ycoh)
    closed = qhe_closed_rflow(spec, st_, m)
    assert abs(fr.value - closed) <= 1e-12 * max(fr.scale, abs(closed))
    up, down = qhe_rates(spec).probe
    drive = p1 * down - (1 - p1) * up - (down - up) * st_.coherence_sq
    if abs(drive) > 1e-12 * (up + down):
        # the prefactor changes sign with M - 1
        assert np.sign(fr.value) == np.sign(drive) * np.sign(m - 1)
    if m >= 1:
        probe, xi = correspondence_point(spec.probe, m)
        assert gf_incoherent(probe, ycal, xi) == pytest.approx(qhe_closed_fcs(spec, st_, m, "incoherent"),
                                                               rel=1e-12, abs=1e-15)


def test_qhe_undriven_state_is_thermal():
    spec = QheSpec(1.0, BathSpec(0.5), (BathSpec(2.0, Susceptibility.constant(3.0)),))
    st_ = qhe_steady_state(spec)
    r = qhe_rates(spec)
    assert st_.p1 == pytest.approx(r.total_up / (r.total_up + r.total_down), rel=1e-12)
    assert st_.rho01 == 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.05, 3.0), st.floats(0.0, 2.0))
def test_qhe_bloch_closed_form(beta_hot, rabi, dephasing):
    spec = QheSpec(1.0, BathSpec(1.0), (BathSpec(beta_hot),), rabi=rabi, dephasing=dephasing)
    r = qhe_rates(spec)
    g = r.total_up + r.total_down
    g2 = 0.5 * g + dephasing  # transverse decay
    z0 = (r.total_down - r.total_up) / g  # p0 - p1 without drive
    z = z0 / (1 + rabi**2 / (g * g2))
    y = -rabi * z / g2
    st_ = qhe_steady_state(spec)
    assert st_.p0 - st_.p1 == pytest.approx(z, rel=1e-9, abs=1e-12)
    assert st_.rho01 == pytest.approx(-0.5j * y, rel=1e-9, abs=1e-12)


def test_steady_state_against_time_evolution():
    spec = QheSpec(1.0, BathSpec(1.0), (BathSpec(0.3),), rabi=0.8, dephasing=0.2)
    rho = scipy.linalg.expm(qhe_liouvillian(spec) * 400.0) @ np.array([1, 0, 0, 0], complex)
    st_ = qhe_steady_state(spec)
    assert rho[3].real == pytest.approx(st_.p1, abs=1e-10)
    assert rho[1] == pytest.approx(st_.rho01, abs=1e-10)


def test_probe_only_drive_without_dissipation():
    spec = QheSpec(1.0, BathSpec(1.0, Susceptibility.constant(0.0)), rabi=1.0)
    with pytest.raises(SteadyStateError):
        qhe_steady_state(spec)


def test_qhe_rejects_matrix_probe():
    with pytest.raises(ValueError):
        QheSpec(1.0, BathSpec(1.0, Susceptibility.constant(np.eye(2))))


def test_steady_state_validation():
    with pytest.raises(ValueError):
        QheSteadyState.from_populations(0.5, 0.6)


# -- oscillator --


def _osc(t_eff, a_plus=0.3 + 0.1j, a_minus=0.8 - 0.2j):
    return OscillatorSpec(1.0, 1.7, t_eff, a_plus, a_minus)


def test_ho_reference_value():
    bath = BathSpec(1.0)
    ycal, ycoh = ho_spectra(_osc(2.0))
    assert total_flow(bath, 2, ycal, ycoh).value == pytest.approx(HO_FLOW_M2, rel=1e-13)
    assert ho_closed_rflow(_osc(2.0), bath, 2) == pytest.approx(HO_FLOW_M2, rel=1e-13)


@pytest.mark.parametrize("m", [0.5, 2.0, 3.0, 5.0])
def test_ho_vanishes_at_bath_temperature(m):
    bath = BathSpec(1.0)
    ycal, ycoh = ho_spectra(_osc(1.0))
    fr = total_flow(bath, m, ycal, ycoh)
    assert abs(fr.value) <= 1e-14 * fr.scale


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 3.0), st.sampled_from([0.5, 2.0, 3.0]))
def test_ho_sign(t_eff, beta, m):
    bath = BathSpec(beta)
    spec = _osc(t_eff)
    ycal, ycoh = ho_spectra(spec)
    diff = spec.nbar - bose_occupation(beta * spec.omega0)
    fr = total_flow(bath, m, ycal, ycoh)
    if abs(diff) > 1e-9:
        assert np.sign(fr.value) == np.sign(diff) * np.sign(m - 1)


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_ho_drive_invariance(ap, am):
    bath = BathSpec(1.0)
    ref = total_flow(bath, 3, *ho_spectra(_osc(2.0, 0, 0))).value
    val = total_flow(bath, 3, *ho_spectra(_osc(2.0, ap, am))).value
    assert val == pytest.approx(ref, rel=1e-12)


def test_ho_closed_fcs_matches_generic():
    bath = BathSpec(0.7, Susceptibility.constant(1.4))
    spec = _osc(1.5)
    ycal, ycoh = ho_spectra(spec)
    xi = np.array([0.2, 1.0 - 0.5j, 0.7j])
    assert np.allclose(gf_incoherent(bath, ycal, xi), ho_closed_fcs(spec, bath, xi, "incoherent"), rtol=1e-13)
    assert np.allclose(gf_incoherent(bath, ycoh, xi), ho_closed_fcs(spec, bath, xi, "coherent"), rtol=1e-13)


def test_ho_degenerate_flag():
    with pytest.raises(ValueError):
        OscillatorSpec(1.0, 1.0, 1.0)
    ycal, ycoh = ho_spectra(OscillatorSpec(1.0, 1.0, 1.0, 0.5, 0.5, degenerate=True))
    assert len(ycal) == 2 and len(ycoh) == 2


def test_ho_occupation_override():
    assert OscillatorSpec(1.0, 2.0, 1.0, occupation=0.25).nbar == 0.25
