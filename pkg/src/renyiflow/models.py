"""The two worked systems: a driven two-level heat engine and a driven oscillator.

Both couple to the probe through a single effective channel, so their line
spectra are scalar (1x1 weights) and the probe susceptibility must be 1x1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .bath import BathSpec, Susceptibility, bose_occupation
from .spectrum import LineSpectrum

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_X = SIGMA_MINUS + SIGMA_PLUS
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def _scalar_chi(bath: BathSpec, omega: float) -> float:
    if bath.chi.dim != 1:
        raise ValueError("model probes must have a scalar (1x1) susceptibility")
    return float(bath.chi(omega)[0, 0].real)


# -- quantum heat engine --------------------------------------------------------

@dataclass(frozen=True)
class QheSpec:
    """Two-level system at splitting ``splitting`` with resonant drive.

    ``pump`` is an incoherent 0 -> 1 rate and ``dephasing`` a pure
    dephasing rate; neither is tied to a thermal bath.
    """

    splitting: float
    probe: BathSpec
    other_baths: tuple[BathSpec, ...] = ()
    rabi: float = 0.0
    pump: float = 0.0
    dephasing: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "other_baths", tuple(self.other_baths))
        if not self.splitting > 0:
            raise ValueError("QHE splitting must be positive")
        if self.rabi < 0 or self.pump < 0 or self.dephasing < 0:
            raise ValueError("rabi, pump and dephasing must be non-negative")
        for b in (self.probe, *self.other_baths):
            _scalar_chi(b, self.splitting)

    def with_probe_scaled(self, factor: float) -> "QheSpec":
        chi = Susceptibility.constant(factor * _scalar_chi(self.probe, self.splitting))
        return QheSpec(self.splitting, BathSpec(self.probe.beta, chi), self.other_baths,
                       self.rabi, self.pump, self.dephasing)


@dataclass(frozen=True)
class QheRates:
    up: tuple[float, ...]
    down: tuple[float, ...]

    @property
    def probe(self) -> tuple[float, float]:
        return self.up[0], self.down[0]

    @property
    def total_up(self) -> float:
        return float(sum(self.up))

    @property
    def total_down(self) -> float:
        return float(sum(self.down))


@dataclass(frozen=True)
class QheSteadyState:
    p0: float
    p1: float
    rho01: complex = 0j

    def __post_init__(self):
        if not (0 <= self.p1 <= 1 and abs(self.p0 + self.p1 - 1) <= 1e-12):
            raise ValueError(f"invalid populations p0={self.p0}, p1={self.p1}")
        if abs(self.rho01) ** 2 > self.p0 * self.p1 + 1e-12:
            raise ValueError("coherence exceeds sqrt(p0 p1)")

    @classmethod
    def from_populations(cls, p1: float, rho01: complex = 0j) -> "QheSteadyState":
        return cls(1.0 - p1, p1, complex(rho01))

    @property
    def coherence_sq(self) -> float:
        return abs(self.rho01) ** 2


def bath_rates(bath: BathSpec, omega: float) -> tuple[float, float]:
    up = bose_occupation(bath.beta * omega) * _scalar_chi(bath, omega)
    return up, float(np.exp(bath.beta * omega)) * up


def qhe_rates(spec: QheSpec) -> QheRates:
    """Excitation and relaxation rates, probe first."""
    pairs = [bath_rates(b, spec.splitting) for b in (spec.probe, *spec.other_baths)]
    return QheRates(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def qhe_liouvillian(spec: QheSpec, include_probe: bool = True) -> np.ndarray:
    """Rotating-frame Lindblad generator on row-major vec(rho)."""
    rates = qhe_rates(spec)
    start = 0 if include_probe else 1
    lv = linalg.hamiltonian_superop(0.5 * spec.rabi * SIGMA_X)
    for up, down in zip(rates.up[start:], rates.down[start:]):
        lv = lv + linalg.dissipator(SIGMA_MINUS, down) + linalg.dissipator(SIGMA_PLUS, up)
    if spec.pump:
        lv = lv + linalg.dissipator(SIGMA_PLUS, spec.pump)
    if spec.dephasing:
        lv = lv + linalg.dissipator(SIGMA_Z, 0.5 * spec.dephasing)
    return lv


def qhe_steady_state(spec: QheSpec, include_probe: bool = True) -> QheSteadyState:
    """Stationary state of the driven, damped two-level system.

    ``include_probe=False`` gives the zeroth-order state of the system
    without the probe, as used by the perturbative formulas.
    """
    lv = qhe_liouvillian(spec, include_probe)
    if np.allclose(lv, linalg.hamiltonian_superop(0.5 * spec.rabi * SIGMA_X)):
        raise linalg.SteadyStateError("no dissipative channel attached")
    rho = linalg.steady_state(lv)
    p1 = float(np.clip(rho[1, 1].real, 0.0, 1.0))
    rho01 = complex(rho[0, 1])
    if abs(rho01) < 1e-14:
        rho01 = 0j  # round-off from the null-space solve
    return QheSteadyState(1.0 - p1, p1, rho01)


def qhe_spectra(spec: QheSpec, steady: QheSteadyState) -> tuple[LineSpectrum, LineSpectrum]:
    """Secular force spectra seen by the probe.

    Incoherent: ``p1`` on the relaxation line ``-splitting`` and ``p0`` on
    the excitation line ``+splitting``. Coherent: ``|rho01|^2`` on both.
    """
    w = spec.splitting
    ycal = LineSpectrum.from_mapping({-w: steady.p1, w: steady.p0})
    c = steady.coherence_sq
    ycoh = LineSpectrum.from_mapping({-w: c, w: c})
    return ycal, ycoh


def qhe_closed_fcs(spec: QheSpec, steady: QheSteadyState, m: float, which: str) -> complex:
    """Closed-form generating function at probe ``M beta`` and ``xi = i beta (M-1)``."""
    if not m >= 1:
        raise ValueError("closed-form QHE generating function needs M >= 1")
    if m == 1:
        return 0j
    b, w = spec.probe.beta, spec.splitting
    up, down = qhe_rates(spec).probe
    xi = 1j * b * (m - 1)
    pref = np.expm1(-1j * xi * w) * bose_occupation(m * b * w) / bose_occupation(b * w)
    if which == "incoherent":
        return complex(pref * (down * steady.p1 - up * steady.p0))
    if which == "coherent":
        return complex(pref * (down - up) * steady.coherence_sq)
    raise ValueError(f"which must be 'incoherent' or 'coherent', got {which!r}")


def qhe_closed_rflow(spec: QheSpec, steady: QheSteadyState, m: float) -> float:
    """Closed-form Rényi flow into the probe.

    The coherence term enters with a minus sign: it is the coherent
    generating function, subtracted from the incoherent one.
    """
    if m == 1:
        raise ValueError("M = 1 is a pole of the closed form; use shannon_flow")
    b, w = spec.probe.beta, spec.splitting
    up, down = qhe_rates(spec).probe
    pref = m * bose_occupation(m * b * w) / (bose_occupation((m - 1) * b * w) * bose_occupation(b * w))
    return float(pref * (steady.p1 * down - steady.p0 * up - (down - up) * steady.coherence_sq))


# -- driven harmonic oscillator -------------------------------------------------

@dataclass(frozen=True)
class OscillatorSpec:
    """Oscillator at ``omega0`` driven at ``drive_frequency``.

    ``<a(t)> = a_plus exp(i W t) + a_minus exp(-i W t)``. The thermal part of
    ``<a^dagger a>`` is ``nbar(omega0 / t_eff)`` unless ``occupation`` is given.
    """

    omega0: float
    drive_frequency: float
    t_eff: float
    a_plus: complex = 0j
    a_minus: complex = 0j
    occupation: float | None = None
    degenerate: bool = field(default=False)

    def __post_init__(self):
        if not (self.omega0 > 0 and self.drive_frequency > 0 and self.t_eff > 0):
            raise ValueError("omega0, drive_frequency and t_eff must be positive")
        if self.omega0 == self.drive_frequency and not self.degenerate:
            raise ValueError("omega0 equals the drive frequency; set degenerate=True to allow it")
        if self.occupation is not None and self.occupation < 0:
            raise ValueError("occupation must be non-negative")

    @property
    def nbar(self) -> float:
        if self.occupation is not None:
            return float(self.occupation)
        return bose_occupation(self.omega0 / self.t_eff)


def ho_spectra(spec: OscillatorSpec) -> tuple[LineSpectrum, LineSpectrum]:
    """Incoherent lines at ``+-omega0`` plus the drive lines, which are shared."""
    n = spec.nbar
    drive = {spec.drive_frequency: abs(spec.a_minus) ** 2, -spec.drive_frequency: abs(spec.a_plus) ** 2}
    thermal = {spec.omega0: n + 1.0, -spec.omega0: n}
    if spec.degenerate and spec.omega0 == spec.drive_frequency:
        merged = {w: thermal[w] + drive[w] for w in thermal}
        return LineSpectrum.from_mapping(merged), LineSpectrum.from_mapping(drive)
    return LineSpectrum.from_mapping({**thermal, **drive}), LineSpectrum.from_mapping(drive)


def ho_closed_fcs(spec: OscillatorSpec, bath: BathSpec, xi, which: str):
    """The oscillator generating functions written term by term."""
    xi = np.asarray(xi, dtype=complex)
    w0, wd = spec.omega0, spec.drive_frequency

    def s(w):
        return bose_occupation(bath.beta * w) * float(bath.chi(w)[0, 0].real)

    n = spec.nbar
    drive = (s(wd) * abs(spec.a_minus) ** 2 * np.expm1(-1j * wd * xi)
             + s(-wd) * abs(spec.a_plus) ** 2 * np.expm1(1j * wd * xi))
    if which == "coherent":
        out = -drive
    elif which == "incoherent":
        out = -(s(w0) * (n + 1) * np.expm1(-1j * w0 * xi) + s(-w0) * n * np.expm1(1j * w0 * xi) + drive)
    else:
        raise ValueError(f"which must be 'incoherent' or 'coherent', got {which!r}")
    return complex(out) if out.ndim == 0 else out


def ho_closed_rflow(spec: OscillatorSpec, bath: BathSpec, m: float) -> float:
    """Closed-form oscillator Rényi flow; independent of the drive amplitudes."""
    if m == 1:
        raise ValueError("M = 1 is a pole of the closed form; use shannon_flow")
    b, w = bath.beta, spec.omega0
    chi = _scalar_chi(bath, w)
    pref = m * bose_occupation(m * b * w) * chi / (bose_occupation((m - 1) * b * w) * bose_occupation(b * w))
    return float(pref * (spec.nbar - bose_occupation(b * w)))
