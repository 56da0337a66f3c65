"""Thermal probe environment: Bose occupation, susceptibilities and KMS correlators.

Units are hbar = k_B = 1, so frequencies are energies and ``beta`` is an
inverse energy.

A susceptibility here is the dissipative (spectral) part of the probe
response. It is odd under frequency reversal with an index transpose,
``chi(-w) = -chi(w).T``; that is what makes the standard KMS relation
``S(-w) = exp(beta w) S(w).T`` hold for ``S(w) = nbar(beta w) chi(w)``.
Each family is therefore specified on positive frequencies only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

FAMILIES = ("constant", "ohmic", "tabulated")


class ZeroFrequencyError(ValueError):
    pass


def bose_occupation(x):
    """``1 / (exp(x) - 1)`` for the dimensionless argument ``x = beta * omega``."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ZeroFrequencyError("Bose occupation has a pole at x = 0")
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(x)
    return float(n) if n.ndim == 0 else n


def _as_matrix(value) -> np.ndarray:
    a = np.asarray(value, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"susceptibility amplitude must be a square matrix, got shape {a.shape}")
    return a


def _check_psd(a: np.ndarray, what: str) -> None:
    if np.linalg.norm(a - a.conj().T) > 1e-12 * max(1.0, np.linalg.norm(a)):
        raise ValueError(f"{what} is not Hermitian")
    lam = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    if lam[0] < -1e-12 * max(1.0, abs(lam[-1])):
        raise ValueError(f"{what} is not positive semidefinite (min eigenvalue {lam[0]:.3e})")


@dataclass(frozen=True)
class Susceptibility:
    """Temperature-independent dynamical susceptibility ``chi_mn(w)``.

    Use the :meth:`constant`, :meth:`ohmic` and :meth:`tabulated`
    constructors rather than building instances directly.
    """

    family: str
    amplitude: np.ndarray
    cutoff: float = np.inf
    table_freqs: np.ndarray | None = field(default=None, repr=False)
    table_values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def constant(cls, value=1.0) -> "Susceptibility":
        a = _as_matrix(value)
        _check_psd(a, "constant susceptibility")
        return cls("constant", a)

    @classmethod
    def ohmic(cls, amplitude=1.0, cutoff: float = 10.0) -> "Susceptibility":
        a = _as_matrix(amplitude)
        _check_psd(a, "ohmic amplitude")
        if not cutoff > 0:
            raise ValueError("ohmic cutoff must be positive")
        return cls("ohmic", a, cutoff=float(cutoff))

    @classmethod
    def tabulated(cls, freqs: Sequence[float], values) -> "Susceptibility":
        w = np.asarray(freqs, dtype=float)
        v = np.asarray(values, dtype=complex)
        if v.ndim == 1:
            v = v.reshape(-1, 1, 1)
        if w.ndim != 1 or len(w) < 2 or v.shape[0] != len(w):
            raise ValueError("tabulated susceptibility needs >= 2 points with matching values")
        if np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise ValueError("tabulated frequencies must be positive and strictly increasing")
        for k in range(len(w)):
            _check_psd(v[k], f"tabulated value at w={w[k]}")
        return cls("tabulated", v[0], table_freqs=w, table_values=v)

    @property
    def dim(self) -> int:
        return self.amplitude.shape[0]

    def _positive(self, w: float) -> np.ndarray:
        if self.family == "constant":
            return self.amplitude
        if self.family == "ohmic":
            return self.amplitude * (w * np.exp(-w / self.cutoff))
        lo, hi = self.table_freqs[0], self.table_freqs[-1]
        if not lo <= w <= hi:
            raise ValueError(f"|w| = {w} outside tabulated range [{lo}, {hi}]")
        k = int(np.searchsorted(self.table_freqs, w, side="right")) - 1
        k = min(k, len(self.table_freqs) - 2)
        w0, w1 = self.table_freqs[k], self.table_freqs[k + 1]
        t = (w - w0) / (w1 - w0)
        return (1 - t) * self.table_values[k] + t * self.table_values[k + 1]

    def __call__(self, omega: float) -> np.ndarray:
        omega = float(omega)
        if omega == 0:
            raise ZeroFrequencyError("susceptibility is not evaluated at w = 0")
        if omega > 0:
            return self._positive(omega)
        return -self._positive(-omega).T


@dataclass(frozen=True)
class BathSpec:
    beta: float
    chi: Susceptibility = field(default_factory=Susceptibility.constant)

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"inverse temperature must be finite and positive, got {self.beta}")

    def rescaled(self, factor: float) -> "BathSpec":
        return BathSpec(self.beta * factor, self.chi)


def std_correlator(chi: Susceptibility, beta: float, omega: float) -> np.ndarray:
    """Thermal spectral density ``S(w) = nbar(beta w) chi(w)``."""
    return bose_occupation(beta * omega) * chi(omega)


def _check_orders(n, m) -> None:
    if n < 0:
        raise ValueError(f"N must be >= 0, got {n}")
    if not m > 0:
        raise ValueError(f"M must be positive, got {m}")
    if float(m).is_integer() and n > m:
        raise ValueError(f"N = {n} exceeds M = {m}")


def gen_correlator(chi: Susceptibility, beta: float, omega: float, n: float, m: float) -> np.ndarray:
    """Multi-replica correlator ``exp(beta N w) nbar(M beta w) chi(w)``.

    Written as a single exponential over ``expm1`` so that large ``M beta w``
    does not overflow the ``exp(beta N w)`` factor.
    """
    _check_orders(n, m)
    x = m * beta * omega
    if x == 0:
        raise ZeroFrequencyError("generalized correlator has a pole at w = 0")
    if x > 0:
        weight = np.exp(beta * omega * (n - m)) / -np.expm1(-x)
    else:
        weight = np.exp(beta * omega * n) / np.expm1(x)
    return weight * chi(omega)


def eigenbasis_gen_correlator(energies, op_a, op_b, beta: float, n: float, m: float) -> dict[float, complex]:
    """Line weights of ``S^{N,M}_{AB}(w)`` for a finite-level bath.

    Evaluates the explicit matrix-element sum over the bath eigenbasis,
    ``A_nm B_mn exp(-beta M E_n) exp(beta N w) / Z(beta M)`` on the line
    ``w = E_n - E_m``. Returns ``{frequency: coefficient of 2 pi delta}``;
    coincident frequencies (within 1e-12) are merged.
    """
    e = np.asarray(energies, dtype=float)
    a = np.asarray(op_a, dtype=complex)
    b = np.asarray(op_b, dtype=complex)
    shift = e.min()
    boltz = np.exp(-beta * m * (e - shift))
    z = boltz.sum()
    lines: dict[float, complex] = {}
    for i in range(len(e)):
        for j in range(len(e)):
            w = e[i] - e[j]
            if w == 0:
                continue
            val = a[i, j] * b[j, i] * boltz[i] / z * np.exp(beta * n * w)
            key = next((k for k in lines if abs(k - w) < 1e-12), w)
            lines[key] = lines.get(key, 0.0) + val
    return lines
