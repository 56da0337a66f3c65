"""Generating functions of energy transfer into the probe.

The long-time characteristic function of the transferred energy ``E`` is
``<exp(i xi E)> ~ exp(-T f(xi))``. For a line spectrum

    f(xi) = -sum_k (exp(-i w_k xi) - 1) sum_mn S_mn(w_k) W^(k)_mn

so each line is a Poisson channel moving energy ``-w_k`` into the probe
at rate ``sum_mn S_mn(w_k) W^(k)_mn``. Positive cumulants mean energy flows
into the probe.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bath import BathSpec, bose_occupation, std_correlator
from .spectrum import LineSpectrum, check_coherent, check_compatible


class NonRealWarning(RuntimeWarning):
    """A quantity expected to be real came out with a sizable imaginary part."""


@dataclass(frozen=True)
class ReducedReal:
    """Real part of a complex result, keeping the discarded imaginary residue."""

    value: float
    imag: float
    rtol: float = 1e-10

    @property
    def flagged(self) -> bool:
        return abs(self.imag) > self.rtol * max(abs(self.value), 1e-300)

    def __float__(self) -> float:
        return self.value


def reduce_real(z: complex, rtol: float, what: str) -> ReducedReal:
    out = ReducedReal(float(np.real(z)), float(np.imag(z)), rtol)
    if out.flagged:
        warnings.warn(f"{what}: imaginary residue {out.imag:.3e} vs real part {out.value:.3e}",
                      NonRealWarning, stacklevel=3)
    return out


def _contract(s: np.ndarray, w: np.ndarray) -> complex:
    return complex(np.sum(s * w))


def line_rates(bath: BathSpec, spectrum: LineSpectrum) -> np.ndarray:
    """Per-line transition rates ``sum_mn S_mn(w_k) W_mn``."""
    check_compatible(bath.chi.dim, spectrum)
    return np.array([_contract(std_correlator(bath.chi, bath.beta, ln.frequency), ln.weight)
                     for ln in spectrum])


def _gf(bath: BathSpec, spectrum: LineSpectrum, xi):
    xi_arr = np.asarray(xi, dtype=complex)
    if len(spectrum) == 0:
        out = np.zeros_like(xi_arr)
    else:
        rates = line_rates(bath, spectrum)
        w = spectrum.frequencies
        phase = np.expm1(-1j * np.multiply.outer(xi_arr, w))
        out = -(phase @ rates)
    return complex(out) if out.ndim == 0 else out


def gf_incoherent(bath: BathSpec, ycal: LineSpectrum, xi):
    """Generating function of energy transfer driven by the full force correlator."""
    return _gf(bath, ycal, xi)


def gf_coherent(bath: BathSpec, ycoh: LineSpectrum, xi):
    """Generating function with the forces replaced by their averages."""
    return _gf(bath, check_coherent(ycoh), xi)


def gf_coherent_response(bath: BathSpec, ycoh: LineSpectrum, xi):
    """Coherent generating function written over positive frequencies only.

    Each ``w > 0`` combines the line at ``+w`` (weight ``nbar``) with the
    transposed line at ``-w`` (weight ``nbar + 1``), using ``chi(w)``
    directly rather than the thermal correlator. Must agree with
    :func:`gf_coherent`.
    """
    check_coherent(ycoh)
    check_compatible(bath.chi.dim, ycoh)
    xi_arr = np.asarray(xi, dtype=complex)
    total = np.zeros_like(xi_arr)
    for w in sorted({abs(f) for f in ycoh.frequencies}):
        chi = bath.chi(w)
        nb = bose_occupation(bath.beta * w)
        w_plus = ycoh.weight_at(w)
        w_minus = ycoh.weight_at(-w)
        if w_plus is not None:
            total = total + np.expm1(-1j * w * xi_arr) * nb * _contract(chi, w_plus)
        if w_minus is not None:
            total = total + np.expm1(1j * w * xi_arr) * (nb + 1.0) * _contract(chi, w_minus.T)
    total = -total
    return complex(total) if total.ndim == 0 else total


# Central-difference stencils for the n-th derivative, offsets -p..p.
_STENCILS = {
    1: np.array([-0.5, 0.0, 0.5]),
    2: np.array([1.0, -2.0, 1.0]),
    3: np.array([-0.5, 1.0, 0.0, -1.0, 0.5]),
    4: np.array([1.0, -4.0, 6.0, -4.0, 1.0]),
}
# Base step (times 1/w_max) per derivative order; trades truncation for round-off.
_STEP_SCALE = {1: 1e-3, 2: 1e-3, 3: 2e-2, 4: 5e-2}


def _central_derivative(gf: Callable, n: int, h: float) -> complex:
    c = _STENCILS[n]
    p = len(c) // 2
    xs = h * np.arange(-p, p + 1)
    vals = np.array([gf(complex(x)) for x in xs])
    return complex(np.dot(c, vals) / h**n)


def derivative_at_zero(gf: Callable, n: int, omega_max: float, levels: int = 3) -> complex:
    """``d^n gf / d xi^n`` at 0 by central differences and Richardson extrapolation."""
    if n not in _STENCILS:
        raise ValueError(f"derivative order must be 1..4, got {n}")
    if not omega_max > 0:
        return 0j
    h = _STEP_SCALE[n] / omega_max
    table = [_central_derivative(gf, n, h / 2**k) for k in range(levels)]
    for j in range(1, levels):
        fac = 4.0**j
        table = [(fac * table[k + 1] - table[k]) / (fac - 1) for k in range(len(table) - 1)]
    return table[0]


def cumulant(gf: Callable, n: int, omega_max: float, rtol: float = 1e-6) -> ReducedReal:
    """n-th cumulant rate ``C_n = -(-i)^n d^n f / d xi^n`` at ``xi = 0``.

    ``omega_max`` is the largest line frequency and sets the step. The
    imaginary residue is kept on the result and triggers
    :class:`NonRealWarning` beyond ``rtol``.
    """
    d = derivative_at_zero(gf, n, omega_max)
    return reduce_real(-((-1j) ** n) * d, rtol, f"cumulant C{n}")


def analytic_cumulant(bath: BathSpec, spectrum: LineSpectrum, n: int) -> float:
    """Exact ``C_n = sum_k (-w_k)^n rate_k`` for a line spectrum."""
    if len(spectrum) == 0:
        return 0.0
    rates = line_rates(bath, spectrum)
    return float(np.real(np.sum((-spectrum.frequencies) ** n * rates)))


def spectrum_cumulant(bath: BathSpec, spectrum: LineSpectrum, n: int, coherent: bool = False) -> ReducedReal:
    fn = gf_coherent if coherent else gf_incoherent
    return cumulant(lambda x: fn(bath, spectrum, x), n, spectrum.max_frequency())

