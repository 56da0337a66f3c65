"""Independent checks of the heat-engine counting statistics.

Two routes that never touch the line-spectrum formulas:

* a counting-field (tilted) Lindblad generator whose dominant eigenvalue is
  ``-f(xi)``; probe-assisted relaxation of the two-level system carries
  ``exp(+i xi W)`` and probe-assisted excitation ``exp(-i xi W)``;
* a Gillespie sampler of the classical jump process (no drive), counting
  quanta absorbed by the probe.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import linalg
from .models import SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Z, QheSpec, qhe_rates

EVENT_BUDGET = 1e6
BLOCK_SIZE = 4096


@dataclass(frozen=True)
class TiltedGenerator:
    xi: complex
    matrix: np.ndarray


def _tilted_parts(spec: QheSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Untilted generator and the two probe jump superoperators."""
    rates = qhe_rates(spec)
    up, down = rates.probe
    base = linalg.hamiltonian_superop(0.5 * spec.rabi * SIGMA_X)
    for u, d in zip(rates.up, rates.down):
        base = base + linalg.dissipator(SIGMA_MINUS, d) + linalg.dissipator(SIGMA_PLUS, u)
    if spec.pump:
        base = base + linalg.dissipator(SIGMA_PLUS, spec.pump)
    if spec.dephasing:
        base = base + linalg.dissipator(SIGMA_Z, 0.5 * spec.dephasing)
    j_down = down * linalg.sandwich(SIGMA_MINUS)
    j_up = up * linalg.sandwich(SIGMA_PLUS)
    return base, j_down, j_up


def build_tilted(spec: QheSpec, xi: complex) -> TiltedGenerator:
    base, j_down, j_up = _tilted_parts(spec)
    w = spec.splitting
    xi = complex(xi)
    mat = base + np.expm1(1j * xi * w) * j_down + np.expm1(-1j * xi * w) * j_up
    return TiltedGenerator(xi, mat)


def fcs_via_tilted(spec: QheSpec, xi: complex, step: float | None = None) -> complex:
    """``-lambda(xi)``, following the eigenvalue branch from ``xi = 0``.

    The straight path from 0 uses steps of at most ``0.05 / splitting``.
    """
    xi = complex(xi)
    if step is None:
        step = 0.05 / spec.splitting
    n = max(1, int(np.ceil(abs(xi) / step)))
    path = xi * np.linspace(0.0, 1.0, n + 1)
    res = linalg.track_eigenvalue(lambda z: build_tilted(spec, z).matrix, path, anchor=0.0)
    return -res.value


def tilted_cumulants(spec: QheSpec, nmax: int = 4) -> list[float]:
    """Cumulant rates ``C_1..C_nmax`` from perturbation theory in ``xi``.

    Expands the dominant eigenvalue ``lambda(xi) = sum lambda_n xi^n / n!``
    around the stationary state with the usual Rayleigh-Schrödinger
    recursion and the Drazin pseudo-inverse of the untilted generator,
    then ``C_n = (-i)^n lambda_n``.
    """
    base, j_down, j_up = _tilted_parts(spec)
    w = spec.splitting
    d = 2
    one = linalg.trace_covector(d)
    rho0 = linalg.steady_state(base).reshape(-1)

    def deriv(k: int) -> np.ndarray:
        return (1j * w) ** k * j_down + (-1j * w) ** k * j_up

    aug = np.vstack([base, one[None, :]])

    def pseudo_solve(x: np.ndarray) -> np.ndarray:
        y, *_ = np.linalg.lstsq(aug, np.concatenate([x, [0.0]]), rcond=None)
        return y

    lam = [0j]
    rhos = [rho0]
    for n in range(1, nmax + 1):
        ln = sum(comb(n, k) * (one @ deriv(k) @ rhos[n - k]) for k in range(1, n + 1))
        lam.append(ln)
        rhs = sum(comb(n, k) * (lam[k] * rhos[n - k] - deriv(k) @ rhos[n - k]) for k in range(1, n + 1))
        rhos.append(pseudo_solve(rhs))
    out = []
    for n in range(1, nmax + 1):
        c = (-1j) ** n * lam[n]
        if abs(c.imag) > 1e-8 * max(abs(c.real), 1e-300):
            warnings.warn(f"tilted cumulant C{n} has imaginary part {c.imag:.3e}", RuntimeWarning, stacklevel=2)
        out.append(float(c.real))
    return out


# -- Monte Carlo ------------------------------------------------------------------

@dataclass
class TrajectoryStats:
    """Mergeable statistics of net probe quanta per trajectory."""

    quantum: float
    duration: float
    seed: int
    n_traj: int = 0
    power_sums: np.ndarray = field(default_factory=lambda: np.zeros(4))
    histogram: dict[int, int] = field(default_factory=dict)

    def add_counts(self, counts: np.ndarray) -> None:
        c = counts.astype(float)
        self.n_traj += len(c)
        self.power_sums += [np.sum(c), np.sum(c**2), np.sum(c**3), np.sum(c**4)]
        vals, freq = np.unique(counts, return_counts=True)
        for v, f in zip(vals.tolist(), freq.tolist()):
            self.histogram[v] = self.histogram.get(v, 0) + f

    def merge(self, other: "TrajectoryStats") -> "TrajectoryStats":
        out = TrajectoryStats(self.quantum, self.duration, self.seed, self.n_traj + other.n_traj,
                              self.power_sums + other.power_sums, dict(self.histogram))
        for k, v in other.histogram.items():
            out.histogram[k] = out.histogram.get(k, 0) + v
        return out

    def _central(self) -> tuple[float, float, float]:
        n = self.n_traj
        s1, s2, s3, s4 = self.power_sums / n
        var = s2 - s1**2
        m4 = s4 - 4 * s3 * s1 + 6 * s2 * s1**2 - 3 * s1**4
        return s1, var, m4

    @property
    def c1(self) -> tuple[float, float]:
        """Mean energy current into the probe and its standard error."""
        mean, var, _ = self._central()
        scale = self.quantum / self.duration
        return scale * mean, scale * np.sqrt(var / self.n_traj)

    @property
    def c2(self) -> tuple[float, float]:
        """Energy-transfer variance rate and its (large-sample) standard error."""
        _, var, m4 = self._central()
        n = self.n_traj
        var_unbiased = var * n / (n - 1)
        se = np.sqrt(max(m4 - var**2, 0.0) / n)
        scale = self.quantum**2 / self.duration
        return scale * var_unbiased, scale * se

    def histogram_rows(self) -> list[tuple[int, int]]:
        return sorted(self.histogram.items())


def _jump_tables(spec: QheSpec):
    """Per-state channel rates and the probe-quanta change of each channel."""
    rates = qhe_rates(spec)
    up = list(rates.up) + ([spec.pump] if spec.pump else [])
    down = list(rates.down)
    up_dq = [-1] + [0] * (len(up) - 1)
    down_dq = [1] + [0] * (len(down) - 1)
    return np.array(up), np.array(up_dq), np.array(down), np.array(down_dq)


def _run_block(rng: np.random.Generator, n: int, duration: float, up, up_dq, down, down_dq) -> np.ndarray:
    r_up, r_down = up.sum(), down.sum()
    p1 = r_up / (r_up + r_down) if r_up + r_down > 0 else 0.0
    state = rng.random(n) < p1
    t = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    cum_up = np.cumsum(up) / r_up if r_up > 0 else None
    cum_down = np.cumsum(down) / r_down if r_down > 0 else None
    active = np.arange(n)
    while active.size:
        s = state[active]
        total = np.where(s, r_down, r_up)
        alive = total > 0
        active, s, total = active[alive], s[alive], total[alive]
        if not active.size:
            break
        t[active] += rng.exponential(size=active.size) / total
        inside = t[active] <= duration
        active, s = active[inside], s[inside]
        u = rng.random(active.size)
        if cum_down is not None:
            ch = np.searchsorted(cum_down, u[s], side="right").clip(max=len(down) - 1)
            counts[active[s]] += down_dq[ch]
        if cum_up is not None:
            ch = np.searchsorted(cum_up, u[~s], side="right").clip(max=len(up) - 1)
            counts[active[~s]] += up_dq[ch]
        state[active] = ~s
    return counts


def sample_trajectories(spec: QheSpec, duration: float, n_traj: int, seed: int,
                        block_size: int = BLOCK_SIZE) -> TrajectoryStats:
    """Gillespie sampling of net quanta absorbed by the probe.

    Trajectories start from the stationary populations. Block ``b`` draws
    from a Philox stream keyed by ``(seed, b)``, so results depend only on
    ``(seed, n_traj, block_size)`` and blocks may run in any order.
    """
    if spec.rabi:
        raise ValueError("the jump sampler covers the undriven engine only (rabi must be 0)")
    if duration <= 0 or n_traj <= 0:
        raise ValueError("duration and n_traj must be positive")
    up, up_dq, down, down_dq = _jump_tables(spec)
    max_rate = max(up.sum(), down.sum())
    if duration * max_rate > EVENT_BUDGET:
        raise ValueError(f"expected events per trajectory {duration * max_rate:.3g} exceed budget {EVENT_BUDGET:g}")
    stats = TrajectoryStats(spec.splitting, duration, seed)
    n_blocks = -(-n_traj // block_size)
    for b in range(n_blocks):
        n = min(block_size, n_traj - b * block_size)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, b])))
        stats.add_counts(_run_block(rng, n, duration, up, up_dq, down, down_dq))
    return stats
