"""Discrete line spectra of the driven system's force correlators.

A :class:`LineSpectrum` stores the on-shell part of a frequency-resolved
correlator as a finite set of lines ``{(w_k, W_k)}``; ``W_k`` is a Hermitian
positive semidefinite matrix over the coupling-operator indices.

For the coherent (average-force) spectrum each line gets half of its weight
from the ``exp(+i w (t - t'))`` time-ordering branch and half from the
``exp(-i w (t - t'))`` branch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class SpectralLine:
    frequency: float
    weight: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=complex)
        if w.ndim == 0:
            w = w.reshape(1, 1)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"line weight must be square, got shape {w.shape}")
        if not np.isfinite(self.frequency) or self.frequency == 0:
            raise ValueError(f"line frequency must be finite and nonzero, got {self.frequency}")
        if np.linalg.norm(w - w.conj().T) > WEIGHT_TOL:
            raise ValueError(f"weight at w={self.frequency} is not Hermitian")
        lam = np.linalg.eigvalsh(0.5 * (w + w.conj().T))
        if lam[0] < -WEIGHT_TOL:
            raise ValueError(f"weight at w={self.frequency} is not PSD (min eigenvalue {lam[0]:.3e})")
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "weight", w)

    def rank(self, rtol: float = 1e-10) -> int:
        lam = np.linalg.eigvalsh(self.weight)
        top = max(abs(lam[-1]), 0.0)
        if top == 0:
            return 0
        return int(np.sum(lam > rtol * top))


@dataclass(frozen=True)
class LineSpectrum:
    lines: tuple[SpectralLine, ...] = ()

    def __post_init__(self):
        lines = tuple(self.lines)
        freqs = [ln.frequency for ln in lines]
        if len(set(freqs)) != len(freqs):
            raise ValueError("line frequencies must be distinct")
        dims = {ln.weight.shape[0] for ln in lines}
        if len(dims) > 1:
            raise ValueError(f"lines have inconsistent dimensions {sorted(dims)}")
        object.__setattr__(self, "lines", tuple(sorted(lines, key=lambda ln: ln.frequency)))

    @classmethod
    def from_mapping(cls, weights: Mapping[float, object]) -> "LineSpectrum":
        """Build from ``{frequency: weight}``, dropping exactly-zero weights."""
        lines = []
        for w, val in weights.items():
            arr = np.asarray(val, dtype=complex)
            if np.all(arr == 0):
                continue
            lines.append(SpectralLine(w, arr))
        return cls(tuple(lines))

    @classmethod
    def coherent_from_amplitudes(cls, amplitudes: Mapping[float, Iterable[complex]]) -> "LineSpectrum":
        """Reflection-symmetric coherent spectrum of Hermitian forces.

        ``amplitudes[nu]`` is the vector ``c`` with ``<Y_m(t)> ⊃ c_m exp(i nu t)``
        (``nu > 0``); the conjugate component follows from hermiticity. The
        line at ``-nu`` carries ``c c^dagger`` and the line at ``+nu`` its
        transpose.
        """
        out: dict[float, np.ndarray] = {}
        for nu, c in amplitudes.items():
            if nu <= 0:
                raise ValueError("drive frequencies must be positive")
            c = np.atleast_1d(np.asarray(c, dtype=complex))
            w = np.outer(c, c.conj())
            out[-float(nu)] = w
            out[float(nu)] = w.T
        return cls.from_mapping(out)

    def __len__(self) -> int:
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    @property
    def dim(self) -> int | None:
        return self.lines[0].weight.shape[0] if self.lines else None

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([ln.frequency for ln in self.lines])

    def max_frequency(self) -> float:
        return float(np.max(np.abs(self.frequencies))) if self.lines else 0.0

    def weight_at(self, omega: float) -> np.ndarray | None:
        for ln in self.lines:
            if ln.frequency == omega:
                return ln.weight
        return None

    def union(self, other: "LineSpectrum") -> "LineSpectrum":
        """Disjoint union; raises if the two share a frequency."""
        return LineSpectrum(self.lines + other.lines)

    def reflected(self) -> "LineSpectrum":
        """``w -> -w`` with transposed weights."""
        return LineSpectrum(tuple(SpectralLine(-ln.frequency, ln.weight.T) for ln in self.lines))

    def is_reflection_symmetric(self, tol: float = 1e-12) -> bool:
        for ln in self.lines:
            partner = self.weight_at(-ln.frequency)
            if partner is None:
                if np.linalg.norm(ln.weight) > tol:
                    return False
            elif np.linalg.norm(partner - ln.weight.T) > tol * max(1.0, np.linalg.norm(ln.weight)):
                return False
        return True

    def max_rank(self) -> int:
        return max((ln.rank() for ln in self.lines), default=0)


def check_coherent(spec: LineSpectrum) -> LineSpectrum:
    if spec.max_rank() > 1:
        raise ValueError("coherent spectrum lines must have rank <= 1")
    return spec


def check_compatible(dim: int, *spectra: LineSpectrum) -> None:
    for s in spectra:
        if s.dim is not None and s.dim != dim:
            raise ValueError(f"spectrum dimension {s.dim} does not match susceptibility dimension {dim}")


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None, scale: float = 1.0) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return scale * (g @ g.conj().T) / rank


def random_spectrum(rng: np.random.Generator, dim: int, n_lines: int,
                    freq_range=(0.5, 3.0), coherent: bool = False) -> LineSpectrum:
    """Random line spectrum with ``|w|`` drawn from ``freq_range``.

    ``coherent=True`` draws rank-1 amplitudes and returns the
    reflection-symmetric spectrum built from them (lines come in +/- pairs).
    """
    lo, hi = freq_range
    if coherent:
        n_pairs = max(1, (n_lines + 1) // 2)
        nus = rng.uniform(lo, hi, size=n_pairs)
        amps = {float(nu): (rng.normal(size=dim) + 1j * rng.normal(size=dim)) / np.sqrt(dim) for nu in nus}
        return LineSpectrum.coherent_from_amplitudes(amps)
    freqs = rng.uniform(lo, hi, size=n_lines) * rng.choice([-1.0, 1.0], size=n_lines)
    return LineSpectrum.from_mapping({float(w): random_psd(rng, dim) for w in freqs})
