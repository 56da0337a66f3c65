"""Command-line driver.

Units are hbar = k_B = 1: frequencies are energies and ``beta`` is an
inverse energy. Exit codes: 0 success, 1 verification failure, 2 usage or
config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_config, with_parameter
from .fcs import NonRealWarning, analytic_cumulant, cumulant, gf_coherent, gf_incoherent
from .models import OscillatorSpec, QheSpec, ho_spectra, qhe_spectra, qhe_steady_state
from .oracle import sample_trajectories, tilted_cumulants
from .rflow import flow_via_correspondence, total_flow
from .verify import SUITES, rel_residual, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)


def model_spectra(cfg: RunConfig):
    if isinstance(cfg.model, OscillatorSpec):
        return ho_spectra(cfg.model)
    state = cfg.state or qhe_steady_state(cfg.model, include_probe=cfg.include_probe)
    return qhe_spectra(cfg.model, state)


def flow_rows(cfg: RunConfig, coherent_sign: float = 1.0) -> list[list]:
    ycal, ycoh = model_spectra(cfg)
    rows = []
    for m in cfg.orders:
        fr = total_flow(cfg.probe, m, ycal, ycoh)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonRealWarning)
            via = flow_via_correspondence(cfg.probe, m, ycal, ycoh, coherent_sign).value
        rows.append([m, fr.value, fr.single_world, fr.multi_world, via, rel_residual(fr.value, via, fr.scale)])
    return rows


FLOW_COLUMNS = ["M", "total_flow", "single_world", "multi_world", "via_correspondence", "residual"]


def cmd_rflow(cfg: RunConfig, args) -> tuple[list[Table], int]:
    return [Table("rflow", FLOW_COLUMNS, flow_rows(cfg, args.coherent_sign))], EXIT_OK


def cmd_fcs(cfg: RunConfig, args) -> tuple[list[Table], int]:
    if not cfg.xi_grid:
        raise ConfigError("xi_grid: required by the fcs command")
    ycal, ycoh = model_spectra(cfg)
    grid = Table("fcs", ["xi_re", "xi_im", "f_i_re", "f_i_im", "f_c_re", "f_c_im"])
    for xi in cfg.xi_grid:
        fi = gf_incoherent(cfg.probe, ycal, xi)
        fc = gf_coherent(cfg.probe, ycoh, xi)
        grid.rows.append([xi.real, xi.imag, fi.real, fi.imag, fc.real, fc.imag])
    wmax = max(ycal.max_frequency(), ycoh.max_frequency())
    cum = Table("cumulants", ["n", "C_incoherent", "C_coherent"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonRealWarning)
        for n in range(1, 5):
            ci = cumulant(lambda x: gf_incoherent(cfg.probe, ycal, x), n, wmax).value
            cc = cumulant(lambda x: gf_coherent(cfg.probe, ycoh, x), n, wmax).value
            cum.rows.append([n, ci, cc])
    return [grid, cum], EXIT_OK


def cmd_oracle(cfg: RunConfig, args) -> tuple[list[Table], int]:
    if not isinstance(cfg.model, QheSpec):
        raise ConfigError("oracle supports QHE only")
    spec = cfg.model
    ycal, _ = model_spectra(cfg)
    tilted = tilted_cumulants(spec, 2)
    mc = [(np.nan, np.nan), (np.nan, np.nan)]
    if spec.rabi == 0:
        stats = sample_trajectories(spec, cfg.oracle_duration, cfg.oracle_n_traj, _seed(cfg, args))
        mc = [stats.c1, stats.c2]
        if args.histogram:
            with open(args.histogram, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["net_quanta", "count"])
                w.writerows(stats.histogram_rows())
    table = Table("oracle", ["quantity", "analytic", "tilted", "monte_carlo", "mc_stderr"])
    for n in (1, 2):
        table.rows.append([f"C{n}", analytic_cumulant(cfg.probe, ycal, n), tilted[n - 1], *mc[n - 1]])
    return [table], EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> tuple[list[Table], int]:
    if cfg.sweep is None:
        raise ConfigError("sweep: required by the sweep command")
    table = Table("sweep", [cfg.sweep.name] + FLOW_COLUMNS)
    for value in cfg.sweep.values():
        point = parse_config(with_parameter(cfg.raw, cfg.sweep.name, value))
        table.rows.extend([value] + row for row in flow_rows(point, args.coherent_sign))
    table.rows.sort(key=lambda r: (r[0], r[1]))
    return [table], EXIT_OK


def cmd_verify(cfg: RunConfig | None, args) -> tuple[list[Table], int]:
    names = [args.suite] if args.suite else None
    kw = {}
    if cfg is not None:
        kw = {"n_traj": cfg.oracle_n_traj, "duration": cfg.oracle_duration}
    results = run_suites(_seed(cfg, args), names, coherent_sign=args.coherent_sign, **kw)
    table = Table("verify", ["suite", "status", "cases", "max_residual", "tolerance", "first_failure"])
    for r in results:
        table.rows.append([r.name, "pass" if r.passed else "FAIL", r.cases, r.max_residual, r.tolerance,
                           r.failures[0] if r.failures else ""])
    return [table], EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _seed(cfg: RunConfig | None, args) -> int:
    if args.seed is not None:
        return args.seed
    if cfg is not None and cfg.seed is not None:
        return cfg.seed
    return 0


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")  # + 0.0 drops negative zero
    return str(v)


def render(tables: list[Table], meta: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {"meta": meta,
               "tables": {t.name: {"columns": t.columns,
                                   "rows": [[float(v) + 0.0 if isinstance(v, (float, np.floating)) else v
                                             for v in r]
                                            for r in t.rows]}
                          for t in tables}}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    for i, t in enumerate(tables):
        if i:
            buf.write(f"\n# table: {t.name}\n")
        w.writerow(t.columns)
        w.writerows([[_fmt(v) for v in r] for r in t.rows])
    return buf.getvalue()


COMMANDS = {"rflow": cmd_rflow, "fcs": cmd_fcs, "verify": cmd_verify, "oracle": cmd_oracle, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="renyiflow",
        description="Rényi entropy flows and energy-transfer statistics of a weakly coupled thermal probe "
                    "(units hbar = k_B = 1).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "rflow": "Rényi flow per order M, directly and via the FCS correspondence",
        "fcs": "generating functions on xi_grid and cumulants C1..C4",
        "verify": "run the self-verification suites",
        "oracle": "compare cumulants with the tilted generator and Monte Carlo (QHE only)",
        "sweep": "Rényi flow along the configured parameter sweep",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", required=name != "verify", help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--corrupt-sign", dest="coherent_sign", action="store_const", const=-1.0, default=1.0,
                        help=argparse.SUPPRESS)
        if name == "verify":
            sp.add_argument("--suite", choices=list(SUITES), help="run a single suite")
        if name == "oracle":
            sp.add_argument("--histogram", help="write the net-quanta histogram to this CSV file")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config) if args.config else None
        tables, code = COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    meta = {"renyiflow": __version__, "command": args.command,
            "config_sha256": cfg.digest if cfg else "none", "seed": _seed(cfg, args)}
    text = render(tables, meta, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
