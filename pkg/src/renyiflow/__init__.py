"""Rényi entropy flows and energy-transfer statistics of a weakly coupled thermal probe."""

__version__ = "0.1.0"

from .bath import BathSpec, Susceptibility, bose_occupation, gen_correlator, std_correlator
from .fcs import analytic_cumulant, cumulant, gf_coherent, gf_incoherent
from .models import OscillatorSpec, QheSpec, QheSteadyState, ho_spectra, qhe_spectra, qhe_steady_state
from .rflow import FlowResult, flow_via_correspondence, shannon_flow, total_flow
from .spectrum import LineSpectrum, SpectralLine

__all__ = [
    "BathSpec", "FlowResult", "LineSpectrum", "OscillatorSpec", "QheSpec", "QheSteadyState",
    "SpectralLine", "Susceptibility", "analytic_cumulant", "bose_occupation", "cumulant",
    "flow_via_correspondence", "gen_correlator", "gf_coherent", "gf_incoherent", "ho_spectra",
    "qhe_spectra", "qhe_steady_state", "shannon_flow", "std_correlator", "total_flow",
]
