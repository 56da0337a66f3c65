"""Small dense complex-matrix kernel.

Everything here works on plain ``numpy`` arrays. Superoperators act on
density matrices flattened in row-major (C) order, so that

    vec(A @ rho @ B) == kron(A, B.T) @ vec(rho).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
DENSITY_TOL = 1e-12
CLAMP_THRESHOLD = 1e-15
AMBIGUITY_TOL = 1e-9


class NotHermitianError(ValueError):
    pass


class SteadyStateError(ValueError):
    pass


class BranchAmbiguityWarning(RuntimeWarning):
    """Two eigenvalue candidates were too close to tell apart."""


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermiticity_defect(h) -> float:
    h = np.asarray(h, dtype=complex)
    return float(np.linalg.norm(h - h.conj().T))


def herm_eigendecompose(h, tol: float = HERMITIAN_TOL):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    ``tol`` bounds ``||H - H^dagger||`` relative to ``max(1, ||H||)``.
    """
    h = _as_square(h)
    defect = hermiticity_defect(h)
    scale = max(1.0, float(np.linalg.norm(h)))
    if defect > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian: ||H - H^dagger|| = {defect:.3e}")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return w, v


def check_density_matrix(rho, tol: float = DENSITY_TOL) -> np.ndarray:
    rho = _as_square(rho)
    defect = hermiticity_defect(rho)
    if defect > tol:
        raise ValueError(f"density matrix not Hermitian (defect {defect:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr.real:.15g} != 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if lam[0] < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
    return rho


def matrix_power_psd(rho, m: float) -> np.ndarray:
    """``rho**m`` for a density matrix, via its eigendecomposition.

    Eigenvalues below ``CLAMP_THRESHOLD`` are set to zero first so that
    fractional powers of round-off negatives stay finite.
    """
    if not m > 0:
        raise ValueError(f"power must be positive, got {m}")
    rho = check_density_matrix(rho)
    lam, v = herm_eigendecompose(rho)
    lam = np.where(lam < CLAMP_THRESHOLD, 0.0, lam)
    return (v * lam**m) @ v.conj().T


@dataclass(frozen=True)
class EigenvalueResult:
    value: complex
    ambiguous: bool = False
    separation: float = np.inf


def _pick(ev: np.ndarray, target: complex) -> EigenvalueResult:
    d = np.abs(ev - target)
    order = np.argsort(d, kind="stable")
    best = ev[order[0]]
    sep = float(np.abs(ev[order[1]] - best)) if len(ev) > 1 else np.inf
    return EigenvalueResult(complex(best), sep < AMBIGUITY_TOL, sep)


def dominant_eigenvalue(l, anchor: complex = 0.0, window: float | None = None) -> EigenvalueResult:
    """Eigenvalue with the largest real part; ties broken by distance to ``anchor``.

    Candidates are all eigenvalues whose real part lies within ``window`` of
    the maximum (default ``1e-8 * max(1, ||L||)``). The result is flagged
    ``ambiguous`` when another eigenvalue sits within ``AMBIGUITY_TOL`` of it.
    """
    l = _as_square(l)
    ev = np.linalg.eigvals(l)
    if window is None:
        window = 1e-8 * max(1.0, float(np.linalg.norm(l)))
    top = ev.real.max()
    cand = ev[ev.real >= top - window]
    choice = cand[np.argmin(np.abs(cand - anchor))]
    res = _pick(ev, choice)
    if res.ambiguous:
        warnings.warn(f"dominant eigenvalue ambiguous (separation {res.separation:.2e})",
                      BranchAmbiguityWarning, stacklevel=2)
    return res


def track_eigenvalue(matrix_at: Callable[[complex], np.ndarray], path: Sequence[complex],
                     anchor: complex = 0.0) -> EigenvalueResult:
    """Follow the dominant eigenvalue of ``matrix_at(z)`` along ``path``.

    The first point uses :func:`dominant_eigenvalue`; later points take the
    eigenvalue nearest a linear extrapolation of the last two.
    """
    path = list(path)
    res = dominant_eigenvalue(matrix_at(path[0]), anchor)
    hist = [res.value]
    ambiguous = res.ambiguous
    min_sep = res.separation
    for z in path[1:]:
        pred = hist[-1] if len(hist) < 2 else 2 * hist[-1] - hist[-2]
        ev = np.linalg.eigvals(_as_square(matrix_at(z)))
        step = _pick(ev, pred)
        ambiguous |= step.ambiguous
        min_sep = min(min_sep, step.separation)
        hist.append(step.value)
    if ambiguous:
        warnings.warn(f"eigenvalue branch ambiguous along path (min separation {min_sep:.2e})",
                      BranchAmbiguityWarning, stacklevel=2)
    return EigenvalueResult(hist[-1], ambiguous, min_sep)


def steady_state(l, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Unique stationary density matrix of a generator on row-major vec(rho)."""
    l = _as_square(l)
    d = int(round(np.sqrt(l.shape[0])))
    if d * d != l.shape[0]:
        raise ValueError(f"generator size {l.shape[0]} is not a perfect square")
    _, s, vh = np.linalg.svd(l)
    scale = max(1.0, float(s[0]))
    kernel = int(np.sum(s <= tol * scale))
    if kernel == 0:
        raise SteadyStateError(f"generator has no kernel (smallest singular value {s[-1]:.3e})")
    if kernel > 1:
        raise SteadyStateError(f"steady state not unique: kernel dimension {kernel}")
    rho = vh[-1].conj().reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise SteadyStateError("kernel vector has zero trace")
    return rho / tr


# -- superoperators -----------------------------------------------------------

def spre(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return np.kron(a, np.eye(a.shape[0]))


def spost(b) -> np.ndarray:
    b = np.asarray(b, dtype=complex)
    return np.kron(np.eye(b.shape[0]), b.T)


def sandwich(a, b=None) -> np.ndarray:
    """Superoperator of ``rho -> a rho b`` (``b`` defaults to ``a^dagger``)."""
    a = np.asarray(a, dtype=complex)
    b = a.conj().T if b is None else np.asarray(b, dtype=complex)
    return np.kron(a, b.T)


def hamiltonian_superop(h) -> np.ndarray:
    return -1j * (spre(h) - spost(h))


def dissipator(c, rate: float = 1.0) -> np.ndarray:
    """``rate * (c rho c^dagger - {c^dagger c, rho}/2)``."""
    c = np.asarray(c, dtype=complex)
    cdc = c.conj().T @ c
    return rate * (sandwich(c) - 0.5 * (spre(cdc) + spost(cdc)))


def trace_covector(d: int) -> np.ndarray:
    return np.eye(d).reshape(-1).astype(complex)
