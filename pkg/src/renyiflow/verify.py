"""Self-verification suites run by ``renyiflow verify``.

Each suite draws its random cases from ``SeedSequence([seed, k])`` with a
fixed per-suite ``k``, so a report depends on the seed alone.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bath import BathSpec, Susceptibility
from .fcs import NonRealWarning, analytic_cumulant, gf_incoherent
from .models import (OscillatorSpec, QheSpec, QheSteadyState, ho_closed_fcs, ho_closed_rflow, ho_spectra,
                     qhe_closed_fcs, qhe_closed_rflow, qhe_rates, qhe_spectra, qhe_steady_state)
from .oracle import sample_trajectories, tilted_cumulants
from .rflow import (reflection_identity_sides, correspondence_point, flow_via_correspondence, multi_world_flow_closed,
                    multi_world_flow_diagram_sum, shannon_flow, total_flow)
from .spectrum import random_psd, random_spectrum

# Flows below this fraction of their summed term magnitudes are round-off
# dominated; residuals are then taken relative to the term scale.
RESIDUAL_FLOOR = 1e-4


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    cases: int = 0
    max_residual: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, residual: float, label: str, tol: float | None = None) -> None:
        tol = self.tolerance if tol is None else tol
        self.cases += 1
        # residuals are reported relative to their own tolerance when it differs
        self.max_residual = max(self.max_residual, residual * self.tolerance / tol)
        if not residual <= tol:
            self.failures.append(f"{label}: residual {residual:.3e} > {tol:.1e}")


def rel_residual(a: float | complex, b: float | complex, scale: float = 0.0) -> float:
    """``|a - b| / max(|a|, |b|, RESIDUAL_FLOOR * scale)``; zero when both vanish."""
    den = max(abs(a), abs(b), RESIDUAL_FLOOR * scale)
    return 0.0 if den == 0 else abs(a - b) / den


def _rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, k]))


def _random_chi(rng: np.random.Generator, dim: int) -> Susceptibility:
    amp = random_psd(rng, dim, scale=rng.uniform(0.5, 2.0))
    if rng.random() < 0.5:
        return Susceptibility.constant(amp)
    return Susceptibility.ohmic(amp, cutoff=rng.uniform(2.0, 10.0))


def _random_case(rng: np.random.Generator):
    dim = int(rng.integers(1, 4))
    bath = BathSpec(float(rng.uniform(0.1, 5.0)), _random_chi(rng, dim))
    ycal = random_spectrum(rng, dim, int(rng.integers(1, 6)), freq_range=(0.2, 3.0))
    ycoh = random_spectrum(rng, dim, int(rng.integers(1, 6)), freq_range=(0.2, 3.0), coherent=True)
    return bath, ycal, ycoh


def suite_correspondence(seed: int, n_cases: int = 200, coherent_sign: float = 1.0) -> SuiteResult:
    res = SuiteResult("correspondence", 1e-10)
    rng = _rng(seed, 1)
    for k in range(n_cases):
        bath, ycal, ycoh = _random_case(rng)
        m = float(rng.choice([2, 3, 5]))
        fr = total_flow(bath, m, ycal, ycoh)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonRealWarning)
            via = flow_via_correspondence(bath, m, ycal, ycoh, coherent_sign=coherent_sign)
        res.check(rel_residual(fr.value, via.value, fr.scale), f"case {k} (M={m:g})")
    return res


def suite_diagram_sum(seed: int, n_spectra: int = 50) -> SuiteResult:
    res = SuiteResult("diagram-sum", 1e-12)
    rng = _rng(seed, 2)
    for k in range(n_spectra):
        dim = int(rng.integers(1, 4))
        bath = BathSpec(float(rng.uniform(0.1, 2.0)), _random_chi(rng, dim))
        ycoh = random_spectrum(rng, dim, int(rng.integers(1, 6)), freq_range=(0.2, 2.0), coherent=True)
        for m in range(2, 11):
            a = multi_world_flow_diagram_sum(bath, m, ycoh)
            b = multi_world_flow_closed(bath, m, ycoh)
            res.check(rel_residual(a, b), f"spectrum {k}, M={m}")
    return res


def suite_reflection_identity(seed: int, n_spectra: int = 50) -> SuiteResult:
    res = SuiteResult("appendix-a", 1e-12)
    rng = _rng(seed, 3)
    tests: dict[str, Callable[[float], complex]] = {
        "1": lambda w: 1.0,
        "w": lambda w: w,
        "exp": lambda w: np.exp(0.7j * w),
    }
    for k in range(n_spectra):
        dim = int(rng.integers(1, 4))
        bath = BathSpec(float(rng.uniform(0.1, 3.0)), _random_chi(rng, dim))
        spec = random_spectrum(rng, dim, int(rng.integers(1, 6)), freq_range=(0.2, 3.0))
        m = float(rng.choice([0.5, 2.0, 3.0, 4.5]))
        for name, fn in tests.items():
            lhs, rhs = reflection_identity_sides(bath, m, spec, fn)
            res.check(rel_residual(lhs, rhs), f"spectrum {k}, M={m:g}, test {name}")
    return res


def qhe_reference() -> tuple[QheSpec, QheSteadyState]:
    spec = QheSpec(1.0, BathSpec(1.0))
    return spec, QheSteadyState.from_populations(0.3)


def suite_closed_form(seed: int, n_cases: int = 50) -> SuiteResult:
    res = SuiteResult("closed-form", 1e-12)
    rng = _rng(seed, 4)
    for k in range(n_cases):
        beta, w = rng.uniform(0.2, 3.0), rng.uniform(0.3, 2.0)
        spec = QheSpec(w, BathSpec(beta, Susceptibility.constant(rng.uniform(0.5, 2.0))))
        p1 = rng.uniform(0.0, 1.0)
        rho = np.sqrt(p1 * (1 - p1)) * rng.uniform(0, 1) * np.exp(2j * np.pi * rng.random())
        st = QheSteadyState.from_populations(p1, rho)
        ycal, ycoh = qhe_spectra(spec, st)
        m = float(rng.choice([2, 3, 5]))
        fr = total_flow(spec.probe, m, ycal, ycoh)
        res.check(rel_residual(fr.value, qhe_closed_rflow(spec, st, m), fr.scale), f"QHE flow {k}")
        probe, xi = correspondence_point(spec.probe, m)
        res.check(rel_residual(gf_incoherent(probe, ycal, xi), qhe_closed_fcs(spec, st, m, "incoherent")),
                  f"QHE f_i {k}")

        osc = OscillatorSpec(w, rng.uniform(0.3, 2.0) + 2.5, rng.uniform(0.3, 3.0),
                             complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
        bath = BathSpec(beta, Susceptibility.constant(rng.uniform(0.5, 2.0)))
        hcal, hcoh = ho_spectra(osc)
        fr = total_flow(bath, m, hcal, hcoh)
        res.check(rel_residual(fr.value, ho_closed_rflow(osc, bath, m), fr.scale), f"HO flow {k}")
        xi = complex(*rng.normal(size=2)) * 0.5
        for which, ys in (("incoherent", hcal), ("coherent", hcoh)):
            res.check(rel_residual(gf_incoherent(bath, ys, xi), ho_closed_fcs(osc, bath, xi, which)),
                      f"HO f_{which[0]} {k}")
    spec, st = qhe_reference()
    ycal, ycoh = qhe_spectra(spec, st)
    probe, xi = correspondence_point(spec.probe, 2.0)
    res.check(abs(gf_incoherent(probe, ycal, xi).real - 0.031058), "QHE reference f_i", 1e-5)
    res.check(abs(total_flow(spec.probe, 2.0, ycal, ycoh).value - 0.062115), "QHE reference flow", 1e-5)
    return res


def oracle_reference(probe_ratio: float, rabi: float = 0.0) -> QheSpec:
    """Two-level engine: cold probe (beta 1) against a hot bath (beta 0.2)."""
    hot = BathSpec(0.2, Susceptibility.constant(1.0))
    probe = BathSpec(1.0, Susceptibility.constant(probe_ratio))
    return QheSpec(1.0, probe, (hot,), rabi=rabi)


def perturbative_cumulants(spec: QheSpec, nmax: int = 2) -> list[float]:
    st = qhe_steady_state(spec, include_probe=False)
    ycal, _ = qhe_spectra(spec, st)
    return [analytic_cumulant(spec.probe, ycal, n) for n in range(1, nmax + 1)]


def rate_balance_c1(spec: QheSpec) -> float:
    st = qhe_steady_state(spec, include_probe=True)
    up, down = qhe_rates(spec).probe
    return spec.splitting * (down * st.p1 - up * st.p0)


def suite_oracle(seed: int, n_traj: int = 100_000, duration: float = 50.0) -> SuiteResult:
    res = SuiteResult("oracle", 1e-6)
    spec = oracle_reference(1e-7)
    tilted = tilted_cumulants(spec, 2)
    for n, (a, b) in enumerate(zip(tilted, perturbative_cumulants(spec)), 1):
        res.check(rel_residual(a, b), f"no drive C{n}")
    driven = oracle_reference(1e-3, rabi=0.5)
    a, b = tilted_cumulants(driven, 1)[0], perturbative_cumulants(driven, 1)[0]
    res.check(rel_residual(a, b), "driven C1", 1e-2)
    mc_spec = oracle_reference(1.0)
    stats = sample_trajectories(mc_spec, duration, n_traj, seed)
    c1, se = stats.c1
    res.check(abs(c1 - rate_balance_c1(mc_spec)) / se, "Monte-Carlo C1 (in standard errors)", 3.0)
    return res


def suite_classical_limit(seed: int, n_cases: int = 100) -> SuiteResult:
    res = SuiteResult("classical-limit", 1e-15)
    rng = _rng(seed, 6)
    for k in range(n_cases):
        bath, _, y = _random_case(rng)
        m = float(rng.choice([0.5, 2.0, 3.0, 5.0]))
        fr = total_flow(bath, m, y, y)
        res.check(abs(fr.value) / max(fr.scale, 1e-300), f"case {k}")
    return res


def shannon_model_cases() -> list[tuple[str, BathSpec, object, object]]:
    """Physical configurations for the literal Shannon-limit check."""
    cases = []
    for rabi, deph in ((0.0, 0.0), (0.4, 0.0), (1.0, 0.3)):
        spec = QheSpec(1.0, BathSpec(1.0), (BathSpec(0.2),), rabi=rabi, dephasing=deph)
        cases.append((f"QHE rabi={rabi:g} dephasing={deph:g}", spec.probe,
                      *qhe_spectra(spec, qhe_steady_state(spec, include_probe=False))))
    for t_eff in (0.5, 2.0, 3.0):
        osc = OscillatorSpec(1.0, 1.7, t_eff, 0.3 + 0.1j, 0.8 - 0.2j)
        cases.append((f"HO t_eff={t_eff:g}", BathSpec(1.0), *ho_spectra(osc)))
    spec, st = qhe_reference()
    cases.append(("QHE reference", spec.probe, *qhe_spectra(spec, st)))
    return cases


def suite_shannon_limit(seed: int, n_cases: int = 50, eps: float = 1e-4) -> SuiteResult:
    """Model configurations relative to the flow itself; random ones relative to the term scale.

    Random spectra can cancel their incoherent and coherent parts, so the
    O(eps) remainder of ``total_flow(1 + eps) / eps`` is only small against
    the summed term magnitudes.
    """
    res = SuiteResult("shannon-limit", 1e-3)
    for label, bath, ycal, ycoh in shannon_model_cases():
        fs = shannon_flow(bath, ycal, ycoh)
        res.check(rel_residual(fs, total_flow(bath, 1.0 + eps, ycal, ycoh).value / eps), label)
    rng = _rng(seed, 7)
    for k in range(n_cases):
        bath, ycal, ycoh = _random_case(rng)
        bath = BathSpec(min(bath.beta, 2.0), bath.chi)
        fs = shannon_flow(bath, ycal, ycoh)
        fr = total_flow(bath, 1.0 + eps, ycal, ycoh)
        scale = fr.scale / eps
        res.check(abs(fs - fr.value / eps) / max(abs(fs), scale), f"random case {k}")
    spec, st = qhe_reference()
    ycal, ycoh = qhe_spectra(spec, st)
    res.check(abs(shannon_flow(spec.probe, ycal, ycoh) - 0.067209), "QHE reference value", 1e-5)
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "correspondence": suite_correspondence,
    "diagram-sum": suite_diagram_sum,
    "closed-form": suite_closed_form,
    "appendix-a": suite_reflection_identity,
    "oracle": suite_oracle,
    "classical-limit": suite_classical_limit,
    "shannon-limit": suite_shannon_limit,
}


def run_suites(seed: int = 0, names=None, coherent_sign: float = 1.0,
               n_traj: int = 100_000, duration: float = 50.0) -> list[SuiteResult]:
    names = list(SUITES) if names is None else list(names)
    out = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        if name == "correspondence":
            out.append(suite_correspondence(seed, coherent_sign=coherent_sign))
        elif name == "oracle":
            out.append(suite_oracle(seed, n_traj=n_traj, duration=duration))
        else:
            out.append(SUITES[name](seed))
    return out
