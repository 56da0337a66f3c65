"""Print the reference numbers for both worked systems and the oracle comparison."""
import argparse

from renyiflow.bath import BathSpec
from renyiflow.fcs import analytic_cumulant
from renyiflow.models import OscillatorSpec, ho_spectra, qhe_spectra
from renyiflow.oracle import sample_trajectories, tilted_cumulants
from renyiflow.rflow import flow_via_correspondence, shannon_flow, total_flow
from renyiflow.verify import qhe_reference, oracle_reference, rate_balance_c1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-traj", type=int, default=100_000)
    args = ap.parse_args()

    spec, st = qhe_reference()
    ycal, ycoh = qhe_spectra(spec, st)
    print("two-level engine, beta=1, splitting=1, p1=0.3")
    for m in (2, 3, 5):
        fr = total_flow(spec.probe, m, ycal, ycoh)
        via = flow_via_correspondence(spec.probe, m, ycal, ycoh).value
        print(f"  M={m}: flow {fr.value:.10f}  via FCS {via:.10f}")
    print(f"  Shannon flow {shannon_flow(spec.probe, ycal, ycoh):.10f}")
    print(f"  C1 {analytic_cumulant(spec.probe, ycal, 1):.10f}  C2 {analytic_cumulant(spec.probe, ycal, 2):.10f}")

    bath = BathSpec(1.0)
    print("oscillator, beta=1, omega0=1")
    for t_eff in (0.5, 1.0, 2.0):
        fr = total_flow(bath, 2, *ho_spectra(OscillatorSpec(1.0, 1.7, t_eff, 0.3, 0.8)))
        print(f"  t_eff={t_eff}: F_2 {fr.value:+.10f}")

    mc_spec = oracle_reference(1.0)
    stats = sample_trajectories(mc_spec, 50.0, args.n_traj, args.seed)
    c1, se = stats.c1
    print("oracle (probe against a hot bath)")
    print(f"  rate balance C1 {rate_balance_c1(mc_spec):.6f}  tilted {tilted_cumulants(mc_spec, 1)[0]:.6f}  "
          f"Monte Carlo {c1:.6f} +- {se:.6f}")


if __name__ == "__main__":
    main()
