"""Rényi entropy flows into the probe in second order of the coupling.

Everything here goes through :func:`~renyiflow.bath.gen_correlator` with real
exponential prefactors. The FCS route (:func:`flow_via_correspondence`) is
the only function that calls into :mod:`renyiflow.fcs`, evaluating the
generating functions at the rescaled temperature and imaginary counting
parameter.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bath import BathSpec, gen_correlator
from .fcs import ReducedReal, cumulant, gf_coherent, gf_incoherent, reduce_real
from .spectrum import LineSpectrum, check_coherent, check_compatible


@dataclass(frozen=True)
class FlowResult:
    M: float
    value: float
    single_world: float
    multi_world: float
    scale: float = 0.0  # sum of |per-line terms|, for relative comparisons


def _check_order(m: float) -> None:
    if not m > 0:
        raise ValueError(f"Rényi order must be positive, got {m}")
    if m == 1:
        raise ValueError("M = 1 is a removable pole of these prefactors; use shannon_flow")


def _contract(s: np.ndarray, w: np.ndarray) -> complex:
    return complex(np.sum(s * w))


def _real(z: complex, scale: float) -> float:
    if abs(z.imag) > 1e-9 * max(scale, 1e-300):
        raise ArithmeticError(f"flow has imaginary part {z.imag:.3e}")
    return float(z.real)


def _same_world_terms(bath: BathSpec, m: float, spectrum: LineSpectrum) -> np.ndarray:
    """``(exp(beta (M-1) w) - 1) sum_mn S^{0,M}_mn(w) W_mn`` per line."""
    b = bath.beta
    return np.array([np.expm1(b * (m - 1) * ln.frequency)
                     * _contract(gen_correlator(bath.chi, b, ln.frequency, 0, m), ln.weight)
                     for ln in spectrum], dtype=complex)


def single_world_flow(bath: BathSpec, m: float, ycal: LineSpectrum) -> float:
    _check_order(m)
    check_compatible(bath.chi.dim, ycal)
    terms = -m * _same_world_terms(bath, m, ycal)
    return _real(terms.sum(), np.abs(terms).sum())


def multi_world_flow(bath: BathSpec, m: float, ycoh: LineSpectrum) -> float:
    """Cross-replica flow in its fully reduced form ``+M sum (e^{b(M-1)w}-1) S^{0,M} W``.

    This is the form that combines with :func:`single_world_flow` into the
    total. For reflection-symmetric coherent spectra it equals
    :func:`multi_world_flow_closed`.
    """
    _check_order(m)
    check_compatible(bath.chi.dim, check_coherent(ycoh))
    terms = m * _same_world_terms(bath, m, ycoh)
    return _real(terms.sum(), np.abs(terms).sum())


def multi_world_flow_closed(bath: BathSpec, m: float, ycoh: LineSpectrum) -> float:
    """Resummed cross-replica flow with the ``(exp(beta w) - 1)`` factor.

    Only the ``exp(+i w (t - t'))`` branch appears, carrying half of each
    line's weight. Defined for any real ``M > 0`` except 1.
    """
    _check_order(m)
    check_compatible(bath.chi.dim, check_coherent(ycoh))
    b = bath.beta
    terms = np.array([np.expm1(b * (m - 1) * ln.frequency) * np.expm1(b * ln.frequency)
                      * _contract(gen_correlator(bath.chi, b, ln.frequency, 0, m), 0.5 * ln.weight)
                      for ln in ycoh], dtype=complex)
    terms = -m * terms
    return _real(terms.sum(), np.abs(terms).sum())


def multi_world_flow_diagram_sum(bath: BathSpec, m: int, ycoh: LineSpectrum) -> float:
    """Cross-replica flow as the explicit sum over pairs of replicas.

    For the outer replica distance ``M'`` from 2 to ``M`` and ``N`` from 2 to
    ``M'`` add the second difference ``S^{N-2,M} - 2 S^{N-1,M} + S^{N,M}``
    for both time-ordering branches. The ``exp(-i w (t - t'))`` branch sits
    on the reflected frequency with swapped indices.
    """
    if not float(m).is_integer() or m < 2:
        raise ValueError(f"diagram sum needs an integer M >= 2, got {m}")
    m = int(m)
    check_compatible(bath.chi.dim, check_coherent(ycoh))
    b, chi = bath.beta, bath.chi

    def second_diff(omega: float, n: int) -> np.ndarray:
        return (gen_correlator(chi, b, omega, n - 2, m)
                - 2 * gen_correlator(chi, b, omega, n - 1, m)
                + gen_correlator(chi, b, omega, n, m))

    total = 0j
    scale = 0.0
    for ln in ycoh:
        w, half = ln.frequency, 0.5 * ln.weight
        for m_outer in range(2, m + 1):
            for n in range(2, m_outer + 1):
                plus = _contract(second_diff(w, n), half)
                minus = _contract(second_diff(-w, n).T, half)
                total += plus + minus
                scale += abs(plus) + abs(minus)
    return _real(-total, scale)


def total_flow(bath: BathSpec, m: float, ycal: LineSpectrum, ycoh: LineSpectrum) -> FlowResult:
    """Total Rényi flow ``-M sum (e^{b(M-1)w} - 1) S^{0,M}(w) (Ycal - Ycoh)(w)``."""
    _check_order(m)
    check_compatible(bath.chi.dim, ycal, check_coherent(ycoh))
    inc = _same_world_terms(bath, m, ycal)
    coh = _same_world_terms(bath, m, ycoh)
    scale = m * (np.abs(inc).sum() + np.abs(coh).sum())
    value = _real(-m * (inc.sum() - coh.sum()), scale)
    return FlowResult(m, value,
                      _real(-m * inc.sum(), scale),
                      _real(m * coh.sum(), scale),
                      float(scale))


def correspondence_point(bath: BathSpec, m: float) -> tuple[BathSpec, complex]:
    """Rescaled probe ``(M beta)`` and counting parameter ``i beta (M - 1)``."""
    return bath.rescaled(m), 1j * bath.beta * (m - 1)


def flow_via_correspondence(bath: BathSpec, m: float, ycal: LineSpectrum, ycoh: LineSpectrum,
                            coherent_sign: float = 1.0) -> ReducedReal:
    """Rényi flow from the two generating functions at the correspondence point.

    ``coherent_sign`` exists for negative controls only.
    """
    _check_order(m)
    probe, xi = correspondence_point(bath, m)
    z = m * (gf_incoherent(probe, ycal, xi) - coherent_sign * gf_coherent(probe, ycoh, xi))
    return reduce_real(z, 1e-10, "flow via correspondence")


def shannon_flow(bath: BathSpec, ycal: LineSpectrum, ycoh: LineSpectrum) -> float:
    """``beta (C1_incoherent - C1_coherent)``: incoherent minus coherent heat over T."""
    wmax = max(ycal.max_frequency(), ycoh.max_frequency())
    c_inc = cumulant(lambda x: gf_incoherent(bath, ycal, x), 1, wmax)
    c_coh = cumulant(lambda x: gf_coherent(bath, ycoh, x), 1, wmax)
    return bath.beta * (c_inc.value - c_coh.value)


def reflection_identity_sides(bath: BathSpec, m: float, spectrum: LineSpectrum,
                     test_fn: Callable[[float], complex]) -> tuple[complex, complex]:
    """Both sides of the frequency-reflection identity on a line measure.

    Left:  ``sum_k (e^{b(M-1)w}-1) e^{b w} sum_mn S^{0,M}_mn(w) W_mn f(w)`` at ``w = w_k``.
    Right: ``-sum_k (e^{b(M-1)v}-1) sum_mn S^{0,M}_nm(v) W_mn f(-v)`` at ``v = -w_k``,
    i.e. the same measure after ``w -> -w``.
    """
    check_compatible(bath.chi.dim, spectrum)
    b, chi = bath.beta, bath.chi
    lhs = 0j
    rhs = 0j
    for ln in spectrum:
        w, wt = ln.frequency, ln.weight
        lhs += (np.expm1(b * (m - 1) * w) * np.exp(b * w)
                * _contract(gen_correlator(chi, b, w, 0, m), wt) * test_fn(w))
        v = -w
        rhs -= (np.expm1(b * (m - 1) * v)
                * _contract(gen_correlator(chi, b, v, 0, m).T, wt) * test_fn(-v))
    return lhs, rhs
