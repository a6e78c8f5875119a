"""Command-line experiment runner.

    qergodic SUBCOMMAND [--config PATH] [--seed U64] [--workers N] [--out DIR]
                        [--tol-override KEY=VAL ...]

Each subcommand writes CSV / JSON-lines files into the output directory
together with a ``<name>.meta.json`` sidecar.  The output root defaults to
``$QERGODIC_OUT`` or ``./qergodic_out``.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .config import apply_overrides, build_dictionary, build_model, load_config, parse_symbol
from .ensembles import expected_mass_check, make_rng, sample_gaussian, sample_spherical
from .equilibrium import (
    compare_routes,
    density_of_states_defects,
    envelope_oracle,
    equilibrium_measure,
)
from .exceptions import ConfigurationError, QErgodicError
from .hilb import BergmanSpace
from .model import bernstein_markov_ratio
from .onbstats import ergodic_property_experiment, orbit_integral_check, szego_experiment
from .qe import qe_experiment
from .zeros import empirical_zero_measure, zero_convergence_experiment

EXIT_OK = 0
EXIT_USAGE = 2  # unknown subcommand or bad flags (argparse)
EXIT_CONFIG_PATH = 3
EXIT_SCHEMA = 4
EXIT_NUMERICAL = 5

OUT_ENV = "QERGODIC_OUT"
MASS_STREAM = 2**32  # stream (N, MASS_STREAM) lies beyond every sample index
SUBCOMMANDS = ("gram", "bergman", "envelope", "measure", "sample", "zeros", "qe", "onb",
               "szego", "orbit", "report")


class Run:
    """Resolved inputs and shared, lazily built objects for one invocation."""

    def __init__(self, cfg, out, workers):
        self.cfg = cfg
        self.out = out
        self.workers = workers
        self.weight, self.measure, self.grid = build_model(cfg)
        self.seeds = []
        self._env = None
        self._eq = None
        self._spaces = {}

    @property
    def tol(self):
        return self.cfg["tolerances"]

    @property
    def seed(self):
        return self.cfg["ensemble"]["master_seed"]

    def space(self, N):
        if N not in self._spaces:
            self._spaces[N] = BergmanSpace(degree=N, weight=self.weight,
                                           tol=self.tol["orthonormality_tol"]).fit_measure(self.measure)
        return self._spaces[N]

    def spaces(self):
        return {N: self.space(N) for N in self.cfg["N_list"]}

    def envelope(self):
        if self._env is None:
            self._env = envelope_oracle(self.weight, self.measure, self.grid,
                                        tol=self.tol["envelope_tol"])
        return self._env

    def eq_measure(self):
        if self._eq is None:
            ct = self.tol["coincidence_tol"] or None
            self._eq = equilibrium_measure(self.envelope(), self.weight, coincidence_tol=ct)
        return self._eq

    def note_seed(self, *stream):
        self.seeds.append(make_rng(self.seed, *stream).seed_record.as_dict())


def _cmd_gram(run):
    rows = []
    for N in run.cfg["N_list"]:
        sp = run.space(N)
        io.write_complex_matrix_csv(run.out / f"gram_N{N}.csv", sp.gram_)
        io.write_complex_matrix_csv(run.out / f"onb_coeffs_N{N}.csv", sp.onb_coeffs_)
        rows.append({"N": N, "dim": sp.dim, "cond": sp.cond_, "scaled_cond": sp.scaled_cond_,
                     "orthonormality_error": sp.orthonormality_error_,
                     "bernstein_markov_ratio": bernstein_markov_ratio(sp)})
    return {"gram.csv": rows}


def _cmd_bergman(run):
    for N in run.cfg["N_list"]:
        run.space(N).log_bergman_potential(run.grid).to_csv(run.out / f"log_bergman_N{N}.csv")
    rows = compare_routes(run.weight, run.measure, run.cfg["N_list"], envelope=run.envelope(),
                          region=lambda z: np.abs(z) <= 2.0)
    return {"bergman.csv": rows}


def _cmd_envelope(run):
    env = run.envelope()
    env.to_csv(run.out / "envelope.csv")
    return {"envelope_summary.csv": [{
        "boundary_constant": env.boundary_constant, "iterations": env.iterations,
        "residual": env.residual, "method": env.method, "spacing": run.grid.spacing,
        "contact_points": int(env.contact_mask.sum())}]}


def _cmd_measure(run):
    eq = run.eq_measure()
    eq.to_csv(run.out / "equilibrium_measure.csv")
    rows = density_of_states_defects(run.weight, run.measure, run.cfg["N_list"], eq,
                                     build_dictionary(run.cfg), spaces=run.spaces())
    for r in rows:
        r["raw_mass"] = eq.raw_mass
        r["kappa"] = eq.kappa
    return {"measure.csv": rows}


def _draw(run):
    return sample_spherical if run.cfg["ensemble"]["kind"] == "spherical" else sample_gaussian


def _cmd_sample(run):
    ens = run.cfg["ensemble"]
    records, checks = [], []
    pts = np.array([complex(x, y) for x, y in run.cfg["sample"]["points"]])
    for N in run.cfg["N_list"]:
        sp = run.space(N)
        run.note_seed(N, 0)
        for i in range(ens["n_samples"]):
            sec = _draw(run)(sp, make_rng(run.seed, N, i))
            records.append({"N": N, "sample": i, "ensemble": sec.ensemble,
                            "coeffs_re": sec.coeffs.real, "coeffs_im": sec.coeffs.imag,
                            "seed": sec.provenance})
        run.note_seed(N, MASS_STREAM)
        for r in expected_mass_check(sp, pts, 10000, make_rng(run.seed, N, MASS_STREAM),
                                     ensemble=ens["kind"]):
            checks.append({"N": N, **r})
    io.write_jsonl(run.out / "samples.jsonl", records)
    return {"expected_mass.csv": checks}


def _cmd_zeros(run):
    ens = run.cfg["ensemble"]
    rows = zero_convergence_experiment(run.weight, run.measure, run.cfg["N_list"],
                                       ens["n_samples"], run.seed, run.eq_measure(),
                                       build_dictionary(run.cfg), ensemble=ens["kind"],
                                       workers=run.workers, spaces=run.spaces())
    roots = []
    for N in run.cfg["N_list"]:
        sp = run.space(N)
        em = empirical_zero_measure(sp, _draw(run)(sp, make_rng(run.seed, N, 0)).coeffs)
        roots.append({"N": N, "sample": 0, "roots_re": em.points.real, "roots_im": em.points.imag,
                      "degree_drop": em.degree_drop})
    io.write_jsonl(run.out / "zeros_roots.jsonl", roots)
    for r in rows:
        r["convention"] = f"{ens['kind']} coefficients"
    return {"zeros.csv": rows}


def _cmd_qe(run):
    ens = run.cfg["ensemble"]
    rows, reports = qe_experiment(run.weight, run.measure, run.cfg["N_list"], ens["n_samples"],
                                  run.seed, run.eq_measure(), run.envelope(),
                                  build_dictionary(run.cfg), ensemble=ens["kind"],
                                  spaces=run.spaces())
    io.write_jsonl(run.out / "qe_reports.jsonl", reports)
    return {"qe.csv": rows}


def _cmd_onb(run):
    o = run.cfg["onb"]
    rows = ergodic_property_experiment(run.weight, run.measure, run.cfg["N_list"],
                                       parse_symbol(o["symbol"]), run.eq_measure(), o["n_draws"],
                                       run.seed, eps=o["eps"], spaces=run.spaces())
    return {"onb.csv": rows}


def _cmd_szego(run):
    rows = []
    for text in run.cfg["symbols"]:
        rows += szego_experiment(run.weight, run.measure, run.cfg["N_list"], parse_symbol(text),
                                 run.eq_measure(), spaces=run.spaces())
    return {"szego.csv": rows}


def _cmd_orbit(run):
    o = run.cfg["orbit"]
    rows = []
    for k, lam in enumerate(o["spectra"]):
        run.note_seed(0, k)
        rows.append(orbit_integral_check(lam, o["n_samples"], make_rng(run.seed, 0, k)))
    return {"orbit.csv": rows}


_REPORT_KEYS = {
    "gram.csv": ["orthonormality_error", "bernstein_markov_ratio"],
    "bergman.csv": ["sup_error"],
    "measure.csv": ["max_defect"],
    "zeros.csv": ["max_defect", "mean_defect"],
    "qe.csv": ["mean_qe_defect", "mean_l1_error", "control_qe_defect"],
    "onb.csv": ["y_mean", "y_limit", "y_over_d", "cesaro"],
}


def _cmd_report(run):
    """One row per N collecting the headline metric of every earlier output."""
    table = {}
    for name, keys in _REPORT_KEYS.items():
        path = run.out / name
        if not path.exists():
            continue
        with path.open(encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                rec = table.setdefault(int(row["N"]), {"N": int(row["N"])})
                for k in keys:
                    if k in row:
                        rec[f"{name[:-4]}.{k}"] = float(row[k])
    if not table:
        raise ConfigurationError(f"no experiment outputs found in {run.out}")
    return {"report.csv": [table[N] for N in sorted(table)]}


COMMANDS = {name: globals()[f"_cmd_{name}"] for name in SUBCOMMANDS}


def build_parser():
    p = argparse.ArgumentParser(prog="qergodic", description=__doc__.split("\n\n")[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="TOML experiment config")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./qergodic_out)")
    p.add_argument("--tol-override", action="append", default=[], metavar="KEY=VAL")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.config is not None and not args.config.is_file():
        print(f"qergodic: config file not found: {args.config}", file=sys.stderr)
        return EXIT_CONFIG_PATH
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigurationError("--seed must be an unsigned 64-bit integer")
            cfg["ensemble"]["master_seed"] = args.seed
        cfg = apply_overrides(cfg, args.tol_override)
        if args.workers < 1:
            raise ConfigurationError("--workers must be positive")
        out = args.out or Path(cfg["output"]["dir"] or os.environ.get(OUT_ENV, "qergodic_out"))
        cfg["output"]["dir"] = str(out)
        run = Run(cfg, out, args.workers)
    except ConfigurationError as exc:
        print(f"qergodic: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        outputs = COMMANDS[args.subcommand](run)
    except ConfigurationError as exc:
        print(f"qergodic: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except QErgodicError as exc:
        print(f"qergodic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    wall = time.perf_counter() - t0
    for name, rows in outputs.items():
        io.write_rows_csv(out / name, rows)
    io.write_sidecar(out / f"{args.subcommand}.meta.json", config=cfg, seeds=run.seeds,
                     wall_time=wall, extra={"subcommand": args.subcommand, "workers": args.workers,
                                            "outputs": sorted(outputs)})
    print(f"qergodic {args.subcommand}: wrote {', '.join(sorted(outputs))} to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
