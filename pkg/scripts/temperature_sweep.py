"""Oscillator Rényi flow against its effective temperature, written as CSV."""
import argparse
import csv
import sys

import numpy as np

from renyiflow.bath import BathSpec
from renyiflow.models import OscillatorSpec, ho_spectra
from renyiflow.rflow import shannon_flow, total_flow


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--orders", type=float, nargs="+", default=[0.5, 2.0, 3.0])
    ap.add_argument("--t-min", type=float, default=0.2)
    ap.add_argument("--t-max", type=float, default=4.0)
    ap.add_argument("--steps", type=int, default=20)
    args = ap.parse_args()

    bath = BathSpec(args.beta)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t_eff", "shannon"] + [f"M={m:g}" for m in args.orders])
    for t in np.linspace(args.t_min, args.t_max, args.steps):
        ycal, ycoh = ho_spectra(OscillatorSpec(1.0, 1.7, t, 0.3, 0.8))
        row = [t, shannon_flow(bath, ycal, ycoh)] + [total_flow(bath, m, ycal, ycoh).value for m in args.orders]
        w.writerow([format(v, ".10g") for v in row])


if __name__ == "__main__":
    main()
