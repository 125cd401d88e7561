"""Command-line front end: ``aklt-graphs {sample,stats,percolate,reduce,oracle}``.

Every run needs a seed.  Options come from flags or from a ``key = value``
config file (``--config``); flags win.  Config keys are the long flag names
without the leading dashes (``p-grid`` and ``p_grid`` are both accepted).

Random streams are derived from the top-level seed as
``(seed, subcommand id, L, chain)`` for Markov chains and
``(seed + subcommand id, config index, replicate)`` for dilution replicates.

Exit codes: 0 success, 2 configuration error, 3 runtime failure,
4 verification failed (oracle check or grid certificate).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

SUBCOMMANDS = ("sample", "stats", "percolate", "reduce", "oracle")
SUBCOMMAND_ID = {name: k for k, name in enumerate(SUBCOMMANDS)}


class ConfigError(ValueError):
    """Invalid or missing run configuration."""


class VerificationError(RuntimeError):
    """An oracle check or grid certificate failed."""


@dataclass
class RunConfig:
    subcommand: str
    seed: int
    lattice: str = "honeycomb"
    L: list[int] = field(default_factory=lambda: [20])
    boundary: str = "periodic"
    warmup: int = 1000
    sweeps: int = 1000
    interval: int = 10
    chains: int = 1
    workers: int = 1
    mode: str = "site"
    p_grid: list[float] = field(default_factory=list)
    replicates: int = 16
    direction: str = "both"
    l_const: float | None = None
    pitch: float | None = None
    instance: str = "chain:4"
    dump_configs: bool = False
    out: str = "."
    format: str = "csv"

    def validate(self) -> "RunConfig":
        from .lattice import BOUNDARIES, KINDS
        from .percolation import DIRECTIONS, MODES

        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if not 0 <= self.seed < 2**63:
            raise ConfigError("seed must be a non-negative 63-bit integer")
        if self.lattice not in KINDS:
            raise ConfigError(f"lattice must be one of {KINDS}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}")
        if not self.L or any(L < 2 for L in self.L):
            raise ConfigError("every L must be at least 2")
        if self.lattice == "honeycomb" and self.boundary != "open" and any(L % 2 for L in self.L):
            raise ConfigError("periodic honeycomb sizes must be even")
        for name in ("warmup", "sweeps"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("interval", "chains", "workers", "replicates"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.mode not in MODES + ("both",):
            raise ConfigError(f"mode must be one of {MODES + ('both',)}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}")
        if self.subcommand == "percolate":
            if not self.p_grid:
                raise ConfigError("percolate needs a non-empty --p-grid")
            if any(not 0 <= p <= 1 for p in self.p_grid) or np.any(np.diff(self.p_grid) <= 0):
                raise ConfigError("p-grid values must be increasing and lie in [0, 1]")
        if self.l_const is not None and self.l_const <= 0:
            raise ConfigError("l-const must be positive")
        if self.pitch is not None and self.pitch < 1:
            raise ConfigError("pitch must be at least 1")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError("format must be csv or jsonl")
        if self.subcommand in ("sample", "stats", "percolate", "reduce") and self.sweeps < self.interval:
            raise ConfigError("sweeps must be at least one interval")
        if self.subcommand == "stats" and self.chains * (self.sweeps // self.interval) < 2:
            raise ConfigError("stats needs at least two samples per size")
        return self


# --------------------------------------------------------------------------
# parsing


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).replace(" ", "").split(",") if x]


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive of ``b`` up to rounding) or a comma list."""
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("p-grid range must be start:stop:step")
        a, b, h = map(float, parts)
        if h <= 0:
            raise ConfigError("p-grid step must be positive")
        n = int(math.floor((b - a) / h + 1e-9)) + 1
        return [round(a + k * h, 12) for k in range(max(n, 0))]
    return [float(x) for x in text.split(",") if x.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


CONVERTERS = {
    "seed": int,
    "lattice": str,
    "L": _ints,
    "boundary": str,
    "warmup": int,
    "sweeps": int,
    "interval": int,
    "chains": int,
    "workers": int,
    "mode": str,
    "p_grid": parse_grid,
    "replicates": int,
    "direction": str,
    "l_const": float,
    "pitch": float,
    "instance": str,
    "dump_configs": _bool,
    "out": str,
    "format": str,
}


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key.lower() == "l":
            key = "L"
        if key not in CONVERTERS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aklt-graphs", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--seed")
        p.add_argument("--lattice", help="honeycomb | chain1d")
        p.add_argument("--L", help="size, or comma-separated sizes")
        p.add_argument("--boundary", help="periodic | open | cut")
        p.add_argument("--warmup", help="sweeps discarded before sampling")
        p.add_argument("--sweeps", help="measurement sweeps per chain")
        p.add_argument("--interval", help="sweeps between samples")
        p.add_argument("--chains", help="independent chains per size")
        p.add_argument("--workers", help="processes running chains in parallel")
        p.add_argument("--mode", help="site | bond | both (percolate)")
        p.add_argument("--p-grid", dest="p_grid", help="start:stop:step or comma list (percolate)")
        p.add_argument("--replicates", help="dilution replicates per sample (percolate)")
        p.add_argument("--direction", help="both | horizontal | vertical (percolate)")
        p.add_argument("--l-const", dest="l_const", help="c in l = ceil(c ln L) (reduce)")
        p.add_argument("--pitch", help="band spacing in band widths (reduce)")
        p.add_argument("--instance", help="oracle instance: chain:N, open-chain:N, dimer, star, hexagon, honeycomb:2")
        p.add_argument("--dump-configs", dest="dump_configs", action="store_const", const="true",
                       help="also write configurations as base-3 strings (sample)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", help="csv | jsonl")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in CONVERTERS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "seed" not in values:
        raise ConfigError("a seed is required (--seed or seed = ... in the config file)")
    kwargs = {}
    for key, raw in values.items():
        try:
            kwargs[key] = CONVERTERS[key](raw)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad value for {key}: {raw!r}") from err
    cfg = RunConfig(subcommand=args.subcommand, **kwargs)
    if args.subcommand == "reduce" and "boundary" not in values:
        cfg.boundary = "open"
    if args.subcommand == "oracle" and "L" in values:
        raise ConfigError("oracle takes --instance, not --L")
    return cfg.validate()


# --------------------------------------------------------------------------
# shared pieces


def _lattice(cfg: RunConfig, L: int):
    from .lattice import build_lattice, cut_open

    if cfg.boundary == "cut":
        return cut_open(build_lattice(cfg.lattice, L, "periodic"))
    return build_lattice(cfg.lattice, L, cfg.boundary)


def _chain_params(cfg: RunConfig, L: int, chain: int):
    from .sampler import ChainParams

    return ChainParams(
        seed=cfg.seed,
        warmup=cfg.warmup,
        sweeps=cfg.sweeps,
        interval=cfg.interval,
        spawn_key=(SUBCOMMAND_ID[cfg.subcommand], L, chain),
    )


def _run_one_chain(job):
    """Worker: samples of one chain as ``(sweep, config)`` pairs."""
    from .sampler import run_chain

    cfg, L, chain = job
    lat = _lattice(cfg, L)
    stream = run_chain(lat, _chain_params(cfg, L, chain))
    return [(s.sweep, s.config) for s in stream.samples]


def _chains(cfg: RunConfig, L: int):
    """Samples of every chain at size ``L``: a list (one per chain) of ``(sweep, config)`` lists."""
    jobs = [(cfg, L, k) for k in range(cfg.chains)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_run_one_chain, jobs))
    return [_run_one_chain(j) for j in jobs]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(rows: list[dict], path: Path, fmt: str, columns: list[str] | None = None) -> Path:
    """Write a table as CSV (header row) or JSON lines; returns the path written."""
    import csv

    path = path.with_suffix(".csv" if fmt == "csv" else ".jsonl")
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(r[c]) for c in columns])
        else:
            for r in rows:
                fh.write(json.dumps({c: _jsonable(r[c]) for c in columns}) + "\n")
    return path


def _jsonable(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


# --------------------------------------------------------------------------
# subcommands

SAMPLE_UNITS = {
    "n_vertices": "count",
    "n_edges": "count",
    "n_edges_pre": "count",
    "components": "count",
    "betti": "count",
    "mean_degree": "edges_per_vertex",
    "domain_mean": "sites",
    "domain_std": "sites",
    "largest_domain": "sites",
    "spanning_h": "flag",
    "spanning_v": "flag",
}


def _sample_columns():
    from .stats import STAT_FIELDS

    return ["L", "chain", "sweep"] + [f"{k}[{SAMPLE_UNITS[k]}]" for k in STAT_FIELDS]


def _sample_rows(cfg: RunConfig, L: int, chains, lat):
    from .stats import STAT_FIELDS, stats_for_config

    rows, per_stat = [], []
    for k, samples in enumerate(chains):
        for sweep, config in samples:
            st = stats_for_config(lat, config, spanning=cfg.lattice == "honeycomb")
            per_stat.append(st)
            row = {"L": L, "chain": k, "sweep": sweep}
            row.update({f"{f}[{SAMPLE_UNITS[f]}]": getattr(st, f) for f in STAT_FIELDS})
            rows.append(row)
    return rows, per_stat


def cmd_sample(cfg: RunConfig, out: Path) -> list[Path]:
    from .domains import format_config

    written = []
    for L in cfg.L:
        lat = _lattice(cfg, L)
        chains = _chains(cfg, L)
        rows, _ = _sample_rows(cfg, L, chains, lat)
        written.append(write_rows(rows, out / f"samples_L{L}", cfg.format, _sample_columns()))
        if cfg.dump_configs:
            path = out / f"configs_L{L}.txt"
            with open(path, "w") as fh:
                fh.write("# chain sweep config(base-3: 0=X 1=Y 2=Z)\n")
                for k, samples in enumerate(chains):
                    for sweep, config in samples:
                        fh.write(f"{k} {sweep} {format_config(config)}\n")
            written.append(path)
    return written


def cmd_stats(cfg: RunConfig, out: Path) -> list[Path]:
    from .stats import aggregate, extrapolate, fit_largest_domain

    aggs, rows = [], []
    for L in cfg.L:
        lat = _lattice(cfg, L)
        _, per_stat = _sample_rows(cfg, L, _chains(cfg, L), lat)
        agg = aggregate(per_stat, L, n_sites=lat.n_sites)
        aggs.append(agg)
        for name, e in agg.estimates.items():
            rows.append({"L": L, "observable": name, "unit": SAMPLE_UNITS[name], "mean": e.mean,
                         "err": e.err, "bootstrap_err": e.bootstrap_err, "block": e.block, "count": agg.count})
        for name in ("n_vertices", "n_edges", "n_edges_pre", "betti"):
            d = agg.density(name)
            rows.append({"L": L, "observable": f"{name}_per_site", "unit": "per_site", "mean": d.mean,
                         "err": d.err, "bootstrap_err": d.bootstrap_err, "block": d.block, "count": agg.count})
    written = [write_rows(rows, out / "stats", cfg.format)]
    if len(aggs) >= 2:
        ext = []
        for key, density, unit in (
            ("n_vertices", True, "per_site"),
            ("n_edges", True, "per_site"),
            ("n_edges_pre", True, "per_site"),
            ("betti", True, "per_site"),
            ("mean_degree", False, "edges_per_vertex"),
            ("domain_mean", False, "sites"),
        ):
            fit = extrapolate(aggs, key, density=density)
            ext.append({"observable": key, "unit": unit, "limit": fit.intercept, "limit_err": fit.intercept_err,
                        "slope_1_over_L": fit.slope, "slope_err": fit.slope_err})
        written.append(write_rows(ext, out / "extrapolation", cfg.format))
    if len({a.n_sites for a in aggs}) >= 3:
        fit = fit_largest_domain(aggs)
        row = {"model": "largest_domain = a ln(N) + b", "unit": "sites", "a": fit.slope, "a_err": fit.slope_err,
               "b": fit.intercept, "b_err": fit.intercept_err}
        written.append(write_rows([row], out / "largest_domain_fit", cfg.format))
    return written


def cmd_percolate(cfg: RunConfig, out: Path) -> list[Path]:
    from .percolation import critical_values, curve_from_critical, estimate_threshold

    modes = ("site", "bond") if cfg.mode == "both" else (cfg.mode,)
    curve_rows, thr_rows = [], []
    for L in cfg.L:
        lat = _lattice(cfg, L)
        configs = [c for samples in _chains(cfg, L) for _, c in samples]
        for mode in modes:
            crit = critical_values(lat, configs, mode, cfg.replicates,
                                   seed=cfg.seed + SUBCOMMAND_ID["percolate"], direction=cfg.direction)
            curve = curve_from_critical(crit, cfg.p_grid, L, mode)
            for r in curve.rows():
                curve_rows.append({"L": L, "mode": mode, "p_delete": r["p_delete"],
                                   "p_cluster": r["p_cluster"], "err": r["err"], "samples": curve.n_samples})
            try:
                t = estimate_threshold(curve)
                thr = {"p_delete_star": t.p_delete, "err": t.err, "p_c": t.p_c}
            except ValueError:
                thr = {"p_delete_star": float("nan"), "err": float("nan"), "p_c": float("nan")}
            thr_rows.append({"L": L, "mode": mode, "direction": cfg.direction, **thr,
                             "p_span_at_zero": float((crit.ravel() >= 0.0).mean()), "samples": curve.n_samples})
    return [
        write_rows(curve_rows, out / "percolation_curve", cfg.format),
        write_rows(thr_rows, out / "percolation_threshold", cfg.format),
    ]


def cmd_reduce(cfg: RunConfig, out: Path) -> list[Path]:
    from .domains import build_graph, label_domains
    from .lattice import cut_open
    from .reduction import DEFAULT_L_CONST, PITCH_FACTOR, Extents, RewritableGraph, run_pipeline

    if cfg.lattice != "honeycomb":
        raise ConfigError("reduce needs a honeycomb lattice")
    c = cfg.l_const if cfg.l_const is not None else DEFAULT_L_CONST
    pitch = cfg.pitch if cfg.pitch is not None else PITCH_FACTOR
    reports, summary = [], []
    bad_certificates = 0
    for L in cfg.L:
        lat = _lattice(cfg, L)
        open_lat = cut_open(lat) if lat.boundary == "periodic" else lat
        runs = ok = 0
        sizes = []
        for k, samples in enumerate(_chains(cfg, L)):
            for sweep, config in samples:
                g = build_graph(label_domains(open_lat, config))
                res = run_pipeline(RewritableGraph.from_graph_state(g), Extents.from_graph_state(g), L, c, pitch)
                runs += 1
                ok += res.ok
                if res.ok:
                    sizes.append(res.size)
                if res.certificate is not None and not res.verified:
                    bad_certificates += 1
                rep = {"L": L, "chain": k, "sweep": sweep, **res.report()}
                if res.certificate is not None:
                    rep["certificate"] = res.certificate.as_dict()
                reports.append(rep)
        summary.append({"L": L, "l_const": c, "pitch": pitch, "runs": runs, "successes": ok,
                        "success_rate": ok / runs if runs else float("nan"),
                        "mean_lambda_prime": float(np.mean(sizes)) if sizes else 0.0})
    path = out / "reduce_reports.jsonl"
    with open(path, "w") as fh:
        for rep in reports:
            fh.write(json.dumps(rep, sort_keys=True) + "\n")
    written = [path, write_rows(summary, out / "reduce_summary", cfg.format)]
    if bad_certificates:
        raise VerificationError(f"{bad_certificates} grid certificates failed verification", written)
    return written


def oracle_instance(spec: str):
    """Lattice for an oracle instance name."""
    from .lattice import build_lattice, named_patch

    name, _, arg = spec.partition(":")
    try:
        if name == "chain":
            return build_lattice("chain1d", int(arg), "periodic")
        if name == "open-chain":
            return build_lattice("chain1d", int(arg), "open")
        if name == "honeycomb":
            return build_lattice("honeycomb", int(arg or 2), "periodic")
        return named_patch(name)
    except ValueError as err:
        raise ConfigError(f"bad oracle instance {spec!r}: {err}") from err


def cmd_oracle(cfg: RunConfig, out: Path) -> list[Path]:
    from .domains import format_config, label_domains, log2_weight
    from .oracle.dense import (
        build_aklt,
        exact_distribution,
        periodic_chain_p0,
        transfer_matrix_norm,
        verify_povm_completeness,
        weight_formula_residual,
    )
    from .oracle.encoded import verify_all_configs

    lat = oracle_instance(cfg.instance)
    state = build_aklt(lat)
    dist = exact_distribution(lat, state)
    residual = weight_formula_residual(dist)
    table = []
    for config, p in zip(dist.configs, dist.probs):
        w = log2_weight(label_domains(lat, config))
        table.append({"config": format_config(config, digits=False), "prob": float(p),
                      "log2_weight": w})
    reports = verify_all_configs(lat)
    checks = {
        "povm_complete_spin1": verify_povm_completeness(1.0),
        "povm_complete_spin3/2": verify_povm_completeness(1.5),
        "weight_formula": residual < 1e-9,
        "encoded_cluster": all(r.ok for r in reports),
    }
    report = {
        "instance": cfg.instance,
        "n_sites": lat.n_sites,
        "n_qubits": state.n_qubits,
        "norm2": state.norm2,
        "weight_formula_max_rel_residual": residual,
        "distribution": table,
        "encoded_cluster": {
            "configs_checked": len(reports),
            "passed": sum(r.ok for r in reports),
            "max_deviation": max((r.max_deviation for r in reports), default=0.0),
            "failures": [
                {"config": format_config(np.array(r.config), digits=False), "failures": r.failures}
                for r in reports if not r.ok
            ],
        },
    }
    if lat.kind == "chain1d" and lat.boundary == "periodic":
        n = lat.n_sites
        p0 = periodic_chain_p0(n)
        same = [i for i, c in enumerate(dist.configs) if len(set(c.tolist())) == 1]
        mixed = [i for i in range(len(dist.configs)) if i not in set(same)]
        want_same = 2 * p0 if n % 2 == 0 else 0.0
        dev = max(
            max(abs(dist.probs[i] - p0) for i in mixed),
            max(abs(dist.probs[i] - want_same) for i in same),
        )
        tm = transfer_matrix_norm(n)
        report["chain"] = {"p0": p0, "all_same_prob": want_same, "max_abs_deviation": float(dev),
                           "transfer_matrix_norm2": tm}
        checks["chain_p0"] = dev < 1e-10
        checks["chain_norm"] = abs(tm - state.norm2) < 1e-9 * max(1.0, tm)
    checks = {k: bool(v) for k, v in checks.items()}
    report["checks"] = checks
    report["ok"] = all(checks.values())
    path = out / "oracle_report.json"
    path.write_text(json.dumps(report, indent=1, sort_keys=True, default=_jsonable) + "\n")
    if not report["ok"]:
        raise VerificationError("oracle checks failed: " + ", ".join(k for k, v in checks.items() if not v), [path])
    return [path]


COMMANDS = {
    "sample": cmd_sample,
    "stats": cmd_stats,
    "percolate": cmd_percolate,
    "reduce": cmd_reduce,
    "oracle": cmd_oracle,
}


def run(cfg: RunConfig) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return COMMANDS[cfg.subcommand](cfg, out)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = run(cfg)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationError as err:
        print(f"verification failed: {err.args[0]}", file=sys.stderr)
        return EXIT_VERIFY
    except Exception as err:  # noqa: BLE001 - anything else is a runtime failure
        print(f"runtime error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
