"""Command-line entry point: ``photonfield {polynomials,optimize,sample,autocorr,verify}``.

Settings come from defaults, then an optional flat ``key = value`` config file
(``--config``), then command-line flags; flags win.  Exit codes: 0 success,
2 configuration error, 3 numeric or regression failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import acceptance
from .hermite import hermite_as_photon_terms
from .lattice import GridSpec, to_json, write_csv
from .optimizer import (
    PhotonContent,
    ascent_maximize,
    most_likely_autocorrelation,
    most_likely_density,
    stationarity_residual,
)
from .sampler import (
    EnsembleSpec,
    dump_samples,
    estimate_autocorrelation,
    estimate_density,
    sample,
)
from .validation import ContractError, UnsupportedContentError
from .wavefunctional import nphoton_polynomial

UNITS = "natural units, hbar = c = 1"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class RunConfig:
    grid_n: int = 128
    box_length: float = 20 * math.pi
    mass: float = 0.0
    include_zero_mode: bool = False
    mode: int = 10
    count: int = 1
    mode2: int | None = None
    samples: int = 100_000
    seed: int = 0
    batches: int = 16
    out: str | None = None
    format: str = "json"
    threads: int = os.cpu_count() or 1
    dump_samples: str | None = None
    n_max: int = 4
    vacuum_baseline: bool = False

    def grid(self):
        try:
            return GridSpec(self.grid_n, self.box_length, include_zero_mode=self.include_zero_mode,
                            mass=self.mass)
        except ContractError as exc:
            key = "box-length" if "box_length" in str(exc) else "mass" if "mass" in str(exc) else "grid-n"
            raise ConfigError(key, str(exc)) from None

    def content(self, grid):
        try:
            if self.mode2 is not None:
                if self.count != 1:
                    raise ConfigError("count", "two-mode content needs count = 1")
                return PhotonContent.pair(grid, self.mode, self.mode2)
            return PhotonContent.single(grid, self.mode, self.count)
        except ContractError as exc:
            raise ConfigError("mode", str(exc)) from None


def _parse_float(text):
    """Accept plain numbers and multiples of pi such as ``20pi`` or ``20*pi``."""
    t = str(text).strip().lower().replace(" ", "")
    if t.endswith("pi"):
        head = t[:-2].rstrip("*")
        return (float(head) if head else 1.0) * math.pi
    return float(t)


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_CASTS = {
    "grid_n": int, "box_length": _parse_float, "mass": _parse_float,
    "include_zero_mode": _parse_bool, "mode": int, "count": int,
    "mode2": lambda v: None if str(v).lower() in ("", "none") else int(v),
    "samples": int, "seed": int, "batches": int, "out": str, "format": str,
    "threads": int, "dump_samples": str, "n_max": int, "vacuum_baseline": _parse_bool,
}


def read_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_config(file_values, flag_values):
    merged = {}
    merged.update(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    cfg = RunConfig()
    for key, value in merged.items():
        if key not in _CASTS:
            raise ConfigError(key.replace("_", "-"), "unknown setting")
        try:
            setattr(cfg, key, _CASTS[key](value))
        except (TypeError, ValueError) as exc:
            raise ConfigError(key.replace("_", "-"), str(exc)) from None
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.grid_n <= 0 or cfg.grid_n % 2:
        raise ConfigError("grid-n", f"must be a positive even integer, got {cfg.grid_n}")
    if not cfg.box_length > 0:
        raise ConfigError("box-length", f"must be positive, got {cfg.box_length}")
    if cfg.mass < 0:
        raise ConfigError("mass", f"must be nonnegative, got {cfg.mass}")
    if cfg.count < 0:
        raise ConfigError("count", f"must be nonnegative, got {cfg.count}")
    if cfg.samples < 2:
        raise ConfigError("samples", f"need at least 2, got {cfg.samples}")
    if cfg.batches < 2:
        raise ConfigError("batches", f"need at least 2, got {cfg.batches}")
    if cfg.threads < 1:
        raise ConfigError("threads", f"must be positive, got {cfg.threads}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "must fit in 64 unsigned bits")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format", f"must be csv or json, got {cfg.format!r}")
    if cfg.n_max < 0:
        raise ConfigError("n-max", f"must be nonnegative, got {cfg.n_max}")
    cfg.grid()


# -- output helpers -----------------------------------------------------------


def _outdir(cfg):
    if cfg.out is None:
        return None
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_field(obj, outdir, stem, fmt):
    if outdir is None:
        return None
    if fmt == "csv":
        path = outdir / f"{stem}.csv"
        write_csv(obj, path)
    else:
        path = outdir / f"{stem}.json"
        path.write_text(json.dumps(to_json(obj), indent=2))
    return path.name


def _write_json(doc, outdir, name):
    if outdir is not None:
        (outdir / name).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _header(cmd):
    print(f"# photonfield {cmd} ({UNITS})")


# -- commands -----------------------------------------------------------------


def cmd_polynomials(cfg):
    failures = []
    doc = []
    for n in range(cfg.n_max + 1):
        poly = nphoton_polynomial(n)
        print(f"Q_{n} = {poly.to_text()}")
        doc.append(poly.to_json())
        if n in acceptance.PRINTED_FORMS:
            expected = acceptance.printed_polynomial(n)
            if poly != expected:
                failures.append(f"Q_{n}: expected {expected.to_text()}, got {poly.to_text()}")
        if dict(poly.terms) != hermite_as_photon_terms(n):
            failures.append(f"Q_{n}: differs from mapped H_{n}")
    _write_json({"polynomials": doc}, _outdir(cfg), "polynomials.json")
    if failures:
        for line in failures:
            print(f"FAIL {line}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"hermite check n = 0..{cfg.n_max}: PASS", file=sys.stderr)
    return EXIT_OK


def cmd_optimize(cfg):
    grid = cfg.grid()
    content = cfg.content(grid)
    outdir = _outdir(cfg)
    _header("optimize")
    closed = most_likely_density(content)
    report = {"units": UNITS, "content": content.to_dict()}

    if content.is_counter_propagating:
        ok = closed.certificate_passed and not np.any(closed.density.values)
        ascent = ascent_maximize(content)
        ok &= ascent.converged and not np.any(ascent.density.values)
        report["counter_propagating"] = {
            "density_is_zero": bool(not np.any(closed.density.values)),
            "certificate_passed": closed.certificate_passed,
            "certificate_max": float(np.max(closed.certificate)),
            "ascent_collapsed": bool(not np.any(ascent.density.values)),
        }
        report["closed_form"] = closed.to_json(_write_field(closed.density, outdir, "density_closed_form", cfg.format))
        report["ascent"] = ascent.to_json(_write_field(ascent.density, outdir, "density_ascent", cfg.format))
        _write_json(report, outdir, "optimize_report.json")
        print(f"D = 0, certificate {'PASS' if ok else 'FAIL'}")
        return EXIT_OK if ok else EXIT_NUMERIC

    ascent = ascent_maximize(content)
    report["closed_form"] = closed.to_json(_write_field(closed.density, outdir, "density_closed_form", cfg.format))
    report["ascent"] = ascent.to_json(_write_field(ascent.density, outdir, "density_ascent", cfg.format))
    peaks = []
    worst = 0.0
    for k, n in content.entries:
        d_closed = closed.density.at(k)
        d_ascent = ascent.density.at(k)
        single = 1.0 / (2.0 * grid.dispersion[grid.slot(k)] * grid.dp)
        rel = abs(d_ascent - d_closed) / d_closed
        worst = max(worst, rel)
        peaks.append({
            "mode": k,
            "momentum": k * grid.dp,
            "photons": n,
            "closed_form_peak": d_closed,
            "ascent_peak": d_ascent,
            "single_photon_peak": single,
            "peak_ratio_to_single_photon": d_closed / single,
            "pair_weight": 2.0 * d_closed * grid.dp,
        })
        print(f"mode {k:+d}: closed-form peak {d_closed:.12g}, ascent peak {d_ascent:.12g}, "
              f"ratio to one photon {d_closed / single:.9f}")
    mask = closed.density.values == 0
    off_peak = float(np.sum(ascent.density.values[mask]))
    report["photon_peaks"] = peaks
    report["agreement"] = {"peak_rel_err": worst, "off_peak_mass": off_peak,
                           "stationarity_residual": stationarity_residual(closed)}
    autocorr = most_likely_autocorrelation(content)
    report["autocorrelation_ref"] = _write_field(autocorr, outdir, "autocorrelation", cfg.format)
    _write_json(report, outdir, "optimize_report.json")
    print(f"ascent: {'converged' if ascent.converged else 'NOT converged'} in {ascent.iterations} "
          f"iterations, residual {ascent.residual:.2e}, peak rel err {worst:.2e}, off-peak mass {off_peak:.2e}")
    return EXIT_OK if ascent.converged else EXIT_NUMERIC


def _vacuum_level(grid):
    lvl = np.zeros(grid.n_modes)
    r = grid.retained
    lvl[r] = 1.0 / (2.0 * grid.dispersion[r] * grid.dp)
    return lvl


def _spec(cfg, content, seed=None):
    return EnsembleSpec(content, cfg.samples, seed=cfg.seed if seed is None else seed,
                        threads=cfg.threads)


def _density_table(stats, grid, outdir, name):
    if outdir is None:
        return None
    order = np.argsort(grid.signed_indices, kind="stable")
    lvl = _vacuum_level(grid)
    lines = ["index,momentum,mean_density,stderr,vacuum_level"]
    for s in order:
        lines.append(f"{grid.signed_indices[s]},{grid.momenta[s]!r},{stats.mean_density.values[s]!r},"
                     f"{stats.density_stderr[s]!r},{lvl[s]!r}")
    (outdir / name).write_text("\n".join(lines) + "\n")
    return name


def cmd_sample(cfg):
    grid = cfg.grid()
    content = cfg.content(grid)
    if content.is_counter_propagating:
        print("refused: counter-propagating pair has no normalizable lattice density; "
              "see 'photonfield optimize' for its extremum certificate", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _outdir(cfg)
    _header("sample")
    spec = _spec(cfg, content)
    stream = sample(spec)
    if cfg.dump_samples:
        stream = dump_samples(stream, cfg.dump_samples)
    stats = estimate_density(stream, spec, n_batches=cfg.batches)
    lvl = _vacuum_level(grid)
    photon_slots = {grid.slot(k) for k, _ in content.entries} | {grid.slot(-k) for k, _ in content.entries}
    r = grid.retained.copy()
    for s in photon_slots:
        r[s] = False
    within = np.abs(stats.mean_density.values - lvl) < 3 * stats.density_stderr
    frac = float(np.mean(within[r]))
    ok = frac >= 0.95
    report = {"units": UNITS, "content": content.to_dict(), "seed": cfg.seed,
              "stats": stats.to_json(),
              "density_csv_ref": _density_table(stats, grid, outdir, "density.csv"),
              "vacuum_modes_within_3se": frac}
    print(f"vacuum modes within 3 stderr: {100 * frac:.1f}%")

    baseline = None
    if cfg.vacuum_baseline:
        vspec = _spec(cfg, PhotonContent.vacuum(grid), seed=cfg.seed + 1)
        baseline = estimate_density(sample(vspec), vspec, n_batches=cfg.batches)
        report["vacuum_baseline"] = baseline.to_json()
        _density_table(baseline, grid, outdir, "vacuum_density.csv")

    excesses = []
    for k, n in content.entries:
        s = grid.slot(k)
        target = n / (2.0 * grid.dispersion[s] * grid.dp)
        excess = stats.mean_density.values[s] - lvl[s]
        z = (excess - target) / stats.density_stderr[s]
        ok &= abs(z) < 3
        item = {"mode": k, "photons": n, "excess": excess, "expected_excess": target,
                "stderr": stats.density_stderr[s], "z": z}
        if baseline is not None:
            item["excess_over_sampled_vacuum"] = excess + lvl[s] - baseline.mean_density.values[s]
        excesses.append(item)
        print(f"mode {k:+d}: excess density {excess:.5f} vs {target:.5f} ({z:+.2f} stderr)")
    report["photon_excess"] = excesses
    report["summary"] = "PASS" if ok else "FAIL"
    _write_json(report, outdir, "sample_stats.json")
    print(f"summary: {report['summary']}")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_autocorr(cfg):
    grid = cfg.grid()
    content = cfg.content(grid)
    outdir = _outdir(cfg)
    _header("autocorr")
    likely = most_likely_autocorrelation(content)
    report = {"units": UNITS, "content": content.to_dict(),
              "most_likely_ref": _write_field(likely, outdir, "autocorrelation_most_likely", cfg.format),
              "most_likely_at_zero": float(likely.values[0])}
    print(f"most likely R(0) = {likely.values[0]:.12g}")
    if not content.is_counter_propagating:
        spec = _spec(cfg, content)
        stats = estimate_autocorrelation(sample(spec), spec, n_batches=cfg.batches)
        vspec = _spec(cfg, PhotonContent.vacuum(grid), seed=cfg.seed + 1)
        vac = estimate_autocorrelation(sample(vspec), vspec, n_batches=cfg.batches)
        excess = stats.mean_autocorr.values - vac.mean_autocorr.values
        corr = float(np.corrcoef(excess, likely.values)[0, 1]) if content.entries else float("nan")
        report["sampled_ref"] = _write_field(stats.mean_autocorr, outdir, "autocorrelation_sampled", cfg.format)
        report["vacuum_ref"] = _write_field(vac.mean_autocorr, outdir, "autocorrelation_vacuum", cfg.format)
        report["excess_correlation_with_most_likely"] = corr
        report["sampled_at_zero"] = float(stats.mean_autocorr.values[0])
        report["mean_energy"] = stats.mean_energy
        print(f"sampled R(0) = {stats.mean_autocorr.values[0]:.6g} "
              f"(mean energy {stats.mean_energy:.6g}); excess vs most likely correlation {corr:.5f}")
    _write_json(report, outdir, "autocorr_report.json")
    return EXIT_OK


def cmd_verify(cfg, only=None, list_only=False):
    if list_only:
        for c in acceptance.CRITERIA:
            print(f"{c.id}\t{c.summary}")
        return EXIT_OK
    unknown = [i for i in (only or []) if i not in acceptance.BY_ID]
    if unknown:
        raise ConfigError("only", f"unknown criterion {unknown[0]!r}")
    ctx = acceptance.VerifyContext(n_modes=cfg.grid_n, box_length=cfg.box_length, mass=cfg.mass,
                                   seed=cfg.seed or acceptance.VerifyContext.seed,
                                   samples=cfg.samples, threads=cfg.threads)
    _header("verify")
    results = []
    for c in ([acceptance.BY_ID[i] for i in only] if only else acceptance.CRITERIA):
        res = c.run(ctx)
        print(res.line(), flush=True)
        results.append(res)
    ok = all(r.passed for r in results)
    _write_json({"units": UNITS, "passed": ok, "criteria": [r.to_json() for r in results]},
                _outdir(cfg), "verify.json")
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if ok else EXIT_NUMERIC


# -- argument parsing ---------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--grid-n", dest="grid_n")
    p.add_argument("--box-length", dest="box_length", help="e.g. 62.83 or 20pi")
    p.add_argument("--mass")
    p.add_argument("--include-zero-mode", dest="include_zero_mode", action="store_const", const="true")
    p.add_argument("--mode", help="signed photon mode index")
    p.add_argument("--count", help="photons in --mode")
    p.add_argument("--mode2", help="second photon mode (one photon in each)")
    p.add_argument("--samples")
    p.add_argument("--seed")
    p.add_argument("--batches", help="batch count for standard errors")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--threads")
    p.add_argument("--dump-samples", dest="dump_samples", help="write raw samples to this CSV")


def make_parser():
    parser = argparse.ArgumentParser(prog="photonfield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("polynomials", help="print photon prefactors Q_0..Q_n")
    _common(p)
    p.add_argument("--n-max", dest="n_max")
    for name, text in (("optimize", "most likely spectral density"),
                       ("sample", "Monte Carlo ensemble statistics"),
                       ("autocorr", "most likely and sampled autocorrelation")):
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "sample":
            p.add_argument("--vacuum-baseline", dest="vacuum_baseline", action="store_const", const="true")
    p = sub.add_parser("verify", help="run the acceptance criteria")
    _common(p)
    p.add_argument("--list", action="store_true", help="list criterion ids without running")
    p.add_argument("--only", nargs="+", help="run only these criterion ids")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items()
             if k in _CASTS and v is not None}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(file_values, flags)
        if args.command == "polynomials":
            return cmd_polynomials(cfg)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "autocorr":
            return cmd_autocorr(cfg)
        return cmd_verify(cfg, only=args.only, list_only=args.list)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedContentError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
