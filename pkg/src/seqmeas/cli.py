"""Command-line sweeps writing CSV or JSON tables.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure,
3 optimizer non-convergence (the table is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .measurement import PbsImperfection, knowledge_of_kit, MeasurementKit, werner_state, strength_to_waveplate
from .montecarlo import derive_seed, emulate_point
from .strategies import (
    adaptive_coherent_pair,
    incoherent_sequence,
    independent_sequence,
    optimize_adaptive_pair,
    single_coherent,
    strategy_point,
)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NONCONVERGED = 0, 1, 2, 3
COMMANDS = ("sweep-single", "sweep-strategies", "adaptive-angles", "accumulation", "montecarlo")
SWEEP_STRATEGIES = ("incoherent", "independent", "adaptive")


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    command: str
    psi_steps: int = 51
    kbar_steps: int = 101
    n: int = 2
    strategy: str = "all"
    werner_p: float = 1.0
    pbs_th: float | None = None
    pbs_rv: float | None = None
    shots: int = 0
    seed: int = 42
    out: str | None = None
    format: str = "csv"
    psi: float | None = None
    bootstrap: int = 20
    jobs: int = 1

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("psi_steps", "kbar_steps", "n", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name.replace('_', '-')} must be at least 1")
        if self.psi_steps < 2 and self.psi is None:
            raise ConfigError("psi-steps must be at least 2")
        if self.kbar_steps < 2:
            raise ConfigError("kbar-steps must be at least 2")
        if not 0.0 <= self.werner_p <= 1.0:
            raise ConfigError("werner-p must lie in [0, 1]")
        for name in ("pbs_th", "pbs_rv"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name.replace('_', '-')} must lie in [0, 1]")
        if self.shots < 0:
            raise ConfigError("shots must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.strategy not in ("all", "single") + SWEEP_STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.psi is not None and not 0.0 <= self.psi <= math.pi / 4:
            raise ConfigError("psi must lie in [0, pi/4]")
        if self.n > 8:
            raise ConfigError("n is capped at 8")

    @property
    def imperfection(self) -> PbsImperfection | None:
        if self.pbs_th is None and self.pbs_rv is None:
            return None
        return PbsImperfection(
            t_H=1.0 if self.pbs_th is None else self.pbs_th,
            r_V=1.0 if self.pbs_rv is None else self.pbs_rv,
        )

    def initial_state(self) -> np.ndarray:
        return werner_state(self.werner_p)

    def psi_grid(self) -> np.ndarray:
        if self.psi is not None:
            return np.array([self.psi])
        return np.linspace(0.0, math.pi / 4, self.psi_steps)

    def kbar_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.kbar_steps)

    def echo(self) -> dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if k not in ("out", "jobs")}


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    # results come back in input order, so output never depends on scheduling
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --- commands -----------------------------------------------------------------


def _single_row(args):
    psi, cfg = args
    imp = cfg.imperfection
    k_ideal = knowledge_of_kit(MeasurementKit(psi)).value
    return {
        "psi": psi,
        "theta_b": strength_to_waveplate(psi).theta_b,
        "k": knowledge_of_kit(MeasurementKit(psi, imperfection=imp)).value,
        "c_ideal": single_coherent(psi).c,
        "c_model": single_coherent(psi, cfg.initial_state(), imp).c,
        "c_incoherent_reference": incoherent_sequence(k_ideal, 1).c,
    }


def cmd_sweep_single(cfg: SweepConfig) -> tuple[list[dict], int]:
    rows = _pmap(_single_row, [(float(p), cfg) for p in cfg.psi_grid()], cfg.jobs)
    return rows, EXIT_OK


def _strategy_rows(args):
    psi, cfg = args
    imp, rho = cfg.imperfection, cfg.initial_state()
    k_bar = knowledge_of_kit(MeasurementKit(psi, imperfection=imp)).value
    wanted = SWEEP_STRATEGIES if cfg.strategy == "all" else (cfg.strategy,)
    rows = []
    for name in wanted:
        if name == "incoherent":
            pt = incoherent_sequence(k_bar, 2, rho)
        elif name == "independent":
            pt = independent_sequence(psi, 2, rho, imp)
        else:
            sol = optimize_adaptive_pair(psi, imperfection=imp)
            pt = adaptive_coherent_pair(psi, sol.lambda0, sol.lambda1, rho, imp)
        rows.append({"psi": psi, "k_bar": k_bar, "strategy": name, "k_tot": pt.k_tot, "c": pt.c})
    return rows


def cmd_sweep_strategies(cfg: SweepConfig) -> tuple[list[dict], int]:
    if cfg.n != 2:
        raise ConfigError("sweep-strategies compares two-kit sequences; use --n 2")
    if cfg.strategy == "single":
        raise ConfigError("sweep-strategies takes incoherent, independent, adaptive or all")
    chunks = _pmap(_strategy_rows, [(float(p), cfg) for p in cfg.psi_grid()], cfg.jobs)
    return [row for chunk in chunks for row in chunk], EXIT_OK


def _angle_row(args):
    psi, cfg = args
    sol = optimize_adaptive_pair(psi, imperfection=cfg.imperfection)
    pt = adaptive_coherent_pair(psi, sol.lambda0, sol.lambda1, cfg.initial_state(), cfg.imperfection)
    residual = abs(math.sqrt(max(0.0, 1.0 - pt.c**2)) - sol.k_tot)
    return {
        "psi": psi,
        "lambda0": sol.lambda0,
        "lambda1": sol.lambda1,
        "k_tot": sol.k_tot,
        "residual_vs_optimal_tradeoff": residual,
        "converged": int(sol.converged),
    }


def cmd_adaptive_angles(cfg: SweepConfig) -> tuple[list[dict], int]:
    rows = _pmap(_angle_row, [(float(p), cfg) for p in cfg.psi_grid()], cfg.jobs)
    status = EXIT_OK if all(r["converged"] for r in rows) else EXIT_NONCONVERGED
    return rows, status


def _accumulation_rows(args):
    k_bar, cfg = args
    wanted = SWEEP_STRATEGIES if cfg.strategy == "all" else (cfg.strategy,)
    rows = []
    for name in wanted:
        pt = strategy_point(name, k_bar, cfg.n, cfg.initial_state(), cfg.imperfection)
        n_eff = 1 if name == "single" else cfg.n
        if name == "incoherent":
            zeno = 1.0 - n_eff * k_bar
        else:
            zeno = 1.0 - n_eff * k_bar * k_bar / 2.0
        rows.append(
            {"k_bar": k_bar, "strategy": name, "n": n_eff, "k_tot": pt.k_tot, "c": pt.c, "c_zeno_expansion": zeno}
        )
    return rows


def cmd_accumulation(cfg: SweepConfig) -> tuple[list[dict], int]:
    chunks = _pmap(_accumulation_rows, [(float(k), cfg) for k in cfg.kbar_grid()], cfg.jobs)
    return [row for chunk in chunks for row in chunk], EXIT_OK


def _mc_row(args):
    index, psi, cfg, strategy = args
    point_seed = derive_seed(cfg.seed, index)
    pt = emulate_point(
        psi, strategy, cfg.shots, point_seed, cfg.initial_state(), cfg.imperfection, cfg.bootstrap
    )
    return {
        "psi": psi,
        "k_hat": pt.k_hat,
        "k_sigma": pt.k_sigma,
        "c_hat": pt.c_hat,
        "c_sigma": pt.c_sigma,
        "seed": point_seed,
    }


def cmd_montecarlo(cfg: SweepConfig) -> tuple[list[dict], int]:
    if cfg.shots < 1:
        raise ConfigError("montecarlo needs --shots >= 1")
    strategy = "single" if cfg.strategy == "all" else cfg.strategy
    if strategy == "incoherent":
        raise ConfigError("montecarlo emulates coherent kits: single, independent or adaptive")
    items = [(i, float(p), cfg, strategy) for i, p in enumerate(cfg.psi_grid())]
    return _pmap(_mc_row, items, cfg.jobs), EXIT_OK


HANDLERS = {
    "sweep-single": cmd_sweep_single,
    "sweep-strategies": cmd_sweep_strategies,
    "adaptive-angles": cmd_adaptive_angles,
    "accumulation": cmd_accumulation,
    "montecarlo": cmd_montecarlo,
}


# --- output -----------------------------------------------------------------


def _fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.12g}")
    return value


def render(rows: list[dict], cfg: SweepConfig) -> str:
    if cfg.format == "json":
        doc = {
            "config": {k: _jsonable(v) for k, v in cfg.echo().items()},
            "rows": [{k: _jsonable(v) for k, v in row.items()} for row in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def run(cfg: SweepConfig) -> tuple[str, int]:
    cfg.validate()
    rows, status = HANDLERS[cfg.command](cfg)
    return render(rows, cfg), status


# --- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which is reserved for I/O
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    # defaults are None so that config-file values survive unless a flag is given
    shared.add_argument("--config", help="JSON file whose keys mirror the flag names")
    shared.add_argument("--psi-steps", type=int, default=None)
    shared.add_argument("--kbar-steps", type=int, default=None)
    shared.add_argument("--n", type=int, default=None)
    shared.add_argument("--strategy", default=None)
    shared.add_argument("--werner-p", type=float, default=None)
    shared.add_argument("--pbs-th", type=float, default=None, help="PBS transmission of H")
    shared.add_argument("--pbs-rv", type=float, default=None, help="PBS reflection of V")
    shared.add_argument("--shots", type=int, default=None)
    shared.add_argument("--seed", type=int, default=None)
    shared.add_argument("--out", default=None, help="output file (default: stdout)")
    shared.add_argument("--format", choices=("csv", "json"), default=None)
    shared.add_argument("--psi", type=float, default=None, help="evaluate a single strength instead of a grid")
    shared.add_argument("--bootstrap", type=int, default=None, help="bootstrap resamples for c_sigma")
    shared.add_argument("--jobs", type=int, default=None, help="worker processes")

    parser = _Parser(prog="seqmeas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "sweep-single": "single-kit knowledge and concurrence versus strength",
        "sweep-strategies": "incoherent / independent / adaptive two-kit trade-offs",
        "adaptive-angles": "optimal second-kit meter angles versus strength",
        "accumulation": "accumulated knowledge and concurrence versus single-kit knowledge",
        "montecarlo": "finite-shot emulation with simulated tomography",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared], help=helps[name])
    return parser


def _load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(SweepConfig)} - {"command"}
    out = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        out[name] = value
    return out


def config_from_args(ns: argparse.Namespace) -> SweepConfig:
    values: dict[str, Any] = {}
    if ns.config:
        values.update(_load_config_file(ns.config))
    for f in fields(SweepConfig):
        if f.name == "command":
            continue
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    try:
        return SweepConfig(command=ns.command, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(None if argv is None else list(argv))
    try:
        cfg = config_from_args(ns)
        text, status = run(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"seqmeas: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.out in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(cfg.out).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        print(f"seqmeas: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if status == EXIT_NONCONVERGED:
        print("seqmeas: optimizer did not converge for some rows (see 'converged' column)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
