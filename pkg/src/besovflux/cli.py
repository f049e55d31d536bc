"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 bad configuration, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dyadic import make_partition
from .fields import (
    abc_flow,
    lacunary_field,
    random_smooth_field,
    single_mode,
    taylor_green_2d,
)
from .flux import ENERGY_LP, HELICITY_LP, flux_scan
from .grid import TorusField, TorusGrid
from .io import FieldFileError, provenance, read_tfld, write_csv, write_json, write_tfld
from .mollify import commutator_scan, default_ladder, mollification_rates
from .norms import BesovSpec, besov_norm
from .solver import run

__all__ = ["main", "build_field", "EXIT_OK", "EXIT_CHECK", "EXIT_CONFIG", "EXIT_IO"]

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

COMMANDS = ("generate", "norms", "mollscan", "fluxscan", "simulate", "verify", "report")


def _critical_integrability(p: float) -> float:
    return 2.0 * p / (p - 1.0)


def build_field(cfg: RunConfig) -> tuple[TorusField, dict]:
    """The configured field, either read from ``cfg.input`` or generated, plus a description."""
    if cfg.input is not None:
        f = read_tfld(cfg.input)
        return f, {"kind": "file", "path": str(cfg.input), "dim": f.grid.dim, "n": f.grid.n}
    grid = TorusGrid(cfg.dim, cfg.n)
    gen = cfg.generator
    if gen == "taylor_green":
        if cfg.dim != 2:
            raise ConfigError("taylor_green needs dim = 2")
        return taylor_green_2d(grid), {"kind": gen}
    if gen == "abc":
        if cfg.dim != 3:
            raise ConfigError("abc needs dim = 3")
        return abc_flow(grid, *cfg.abc), {"kind": gen, "abc": list(cfg.abc)}
    if gen == "single_mode":
        if len(cfg.mode_k) != cfg.dim or len(cfg.mode_amplitude) != cfg.dim:
            raise ConfigError("mode_k and mode_amplitude need dim entries")
        return single_mode(grid, cfg.mode_k, cfg.mode_amplitude), {"kind": gen}
    if gen == "smooth":
        return random_smooth_field(grid, cfg.decay_rate, seed=cfg.seed), {"kind": gen, "decay_rate": cfg.decay_rate}
    part = make_partition(grid)
    js = np.arange(part.j_resolved + 1)
    if cfg.planted == "const":
        planted = np.ones(js.size)
    else:
        planted = 2.0 ** (-cfg.planted_rate * js)
    f, cert = lacunary_field(grid, planted, cfg.alpha_value, _critical_integrability(cfg.p), seed=cfg.seed)
    return f, cert.to_dict()


class _Context:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.meta = provenance(cfg.hashed_dict(), cfg.seed)

    def json(self, name: str, payload: dict) -> Path:
        return write_json(self.out / name, {"config": self.cfg.hashed_dict(), **payload}, self.meta)

    def csv(self, name: str, header, rows) -> Path:
        return write_csv(self.out / name, header, rows, self.meta)


def cmd_generate(ctx: _Context) -> int:
    f, desc = build_field(ctx.cfg)
    write_tfld(ctx.out / "field.tfld", f)
    ctx.json("field.json", {"field": desc, "shape": list(f.values.shape)})
    return EXIT_OK


def cmd_norms(ctx: _Context) -> int:
    cfg = ctx.cfg
    f, desc = build_field(cfg)
    report = besov_norm(f, BesovSpec(cfg.alpha_value, cfg.p, cfg.q_value))
    ctx.json("norms.json", {"field": desc, "report": report.to_dict()})
    ctx.csv("norms.csv", ["j", "d_j"], [(int(j), float(d)) for j, d in zip(report.j, report.d_j)])
    return EXIT_OK


def _eps_ladder(cfg: RunConfig, grid: TorusGrid, minimum: int) -> np.ndarray:
    eps = cfg.ladder_values()
    if eps is None:
        eps = default_ladder(grid)
        if eps.size < minimum:
            raise ConfigError(
                f"default mollifier ladder has {eps.size} values on n={grid.n}; "
                f"use n >= 256 or pass --ladder start:stop:ratio"
            )
    return np.sort(eps)[::-1]


def cmd_mollscan(ctx: _Context) -> int:
    cfg = ctx.cfg
    f, desc = build_field(cfg)
    eps = _eps_ladder(cfg, f.grid, 5)
    alpha = cfg.alpha_value
    rates = mollification_rates(f, BesovSpec(alpha, cfg.p), eps, k=cfg.derivative)
    theta = cfg.p - 1.0 if cfg.theta is None else cfg.theta
    comm = commutator_scan(f, eps, theta, cfg.p, _critical_integrability(cfg.p), alpha=alpha)
    summary = {
        "difference_slope": rates["difference_slope"],
        "derivative_slope": rates["derivative_slope"],
        "expected_difference": rates["expected_difference"],
        "expected_derivative": rates["expected_derivative"],
        "commutator_slope": comm["slope"],
        "expected_commutator": comm["expected"],
        "theta": theta,
        "derivative_order": cfg.derivative,
    }
    ctx.json("mollscan.json", {"field": desc, "rates": summary})
    rows = zip(eps, rates["difference"], rates["derivative"], comm["values"])
    ctx.csv("mollscan.csv", ["eps", "difference", "derivative", "commutator"], rows)
    return EXIT_OK


def cmd_fluxscan(ctx: _Context) -> int:
    cfg = ctx.cfg
    f, desc = build_field(cfg)
    if cfg.kind in (ENERGY_LP, HELICITY_LP):
        part = make_partition(f.grid)
        index = cfg.scales if cfg.scales is not None else list(range(part.j_max + 1))
    else:
        index = list(_eps_ladder(cfg, f.grid, 2))
    exps = {"p": cfg.p, "alpha": cfg.alpha_value, "beta": cfg.beta, "theta": cfg.theta}
    series = flux_scan(f, cfg.kind, index, exps)
    ctx.json("flux.json", {"field": desc, "series": series.to_dict()})
    name = "N" if series.by_scale else "eps"
    ctx.csv("flux.csv", [name, "value"], zip(series.to_dict()["index"], series.values))
    return EXIT_OK


def cmd_simulate(ctx: _Context) -> int:
    cfg = ctx.cfg
    f, desc = build_field(cfg)
    traj = run(f, cfg.T, cfg.dt, snapshot_every=cfg.snapshot_value)
    snaps = []
    for i, s in enumerate(traj.snapshots, start=1):
        name = f"snap_{i:06d}.tfld"
        write_tfld(ctx.out / name, s.velocity())
        snaps.append({"file": name, "step": s.step_index, "t": s.t})
    rows = [(i, t, e, q) for i, (t, e, q) in enumerate(zip(traj.times, traj.energy, traj.second))]
    ctx.csv("budgets.csv", ["step", "t", "energy", traj.second_name], rows)
    params = dict(traj.params)
    params["snapshot_every"] = cfg.snapshot_every
    ctx.json(
        "run.json",
        {
            "field": desc,
            "params": params,
            "snapshots": snaps,
            "cfl": [float(c) for c in traj.cfl],
            "energy_drift": traj.relative_drift("energy"),
            f"{traj.second_name}_drift": traj.relative_drift("second"),
        },
    )
    return EXIT_OK


def _criterion(number: int):
    from .verify import CRITERIA

    return CRITERIA[number][1]()


def cmd_verify(ctx: _Context, only: list[int] | None = None) -> int:
    from .verify import CRITERIA, summarize

    numbers = [k for k in CRITERIA if not only or k in only]
    if ctx.cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=ctx.cfg.jobs) as pool:
            groups = list(pool.map(_criterion, numbers))
    else:
        groups = [_criterion(k) for k in numbers]
    checks = []
    for k, got in zip(numbers, groups):
        ok = all(c.passed for c in got)
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {CRITERIA[k][0]} ({len(got)} checks)")
        for c in got:
            mark = "ok  " if c.passed else "FAIL"
            print(f"    {mark} {c.name}: {c.value:.4g} (threshold {c.threshold:.4g}) {c.detail}".rstrip())
        checks.extend(got)
    summary = summarize(checks)
    print(f"{summary['passed']}/{summary['total']} checks passed")
    ctx.json("verify.json", summary)
    return EXIT_OK if summary["passed"] == summary["total"] else EXIT_CHECK


def cmd_report(ctx: _Context) -> int:
    """Merge every JSON and CSV output under --out into bundle.json and an index in bundle.csv."""
    out = ctx.out
    if not out.is_dir():
        raise FileNotFoundError(f"output directory not found: {out}")
    skip = {"bundle.json", "bundle.csv"}
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name not in skip and p.suffix in (".json", ".csv"))
    merged, index = {}, []
    for p in files:
        rel = p.relative_to(out).as_posix()
        text = p.read_text()
        if p.suffix == ".json":
            payload = json.loads(text)
            merged[rel] = payload
            h = payload.get("provenance", {}).get("config_hash", "")
            index.append((rel, "json", len(payload), h))
        else:
            comments = [ln for ln in text.splitlines() if ln.startswith("#")]
            data = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
            merged[rel] = {"header": data[0].split(",") if data else [], "rows": [ln.split(",") for ln in data[1:]]}
            h = next((ln.split("=", 1)[1] for ln in comments if ln.startswith("# config_hash=")), "")
            index.append((rel, "csv", max(len(data) - 1, 0), h))
    ctx.json("bundle.json", {"files": merged})
    ctx.csv("bundle.csv", ["file", "format", "entries", "config_hash"], index)
    return EXIT_OK


def _parse_q(text: str):
    if text in ("inf", "cnat", "vmo"):
        return text
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"q must be a number, 'inf', 'cnat' or 'vmo', got {text!r}") from exc


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--input", help="TFLD field file used instead of a generator")
    common.add_argument("--dim", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--generator")
    common.add_argument("--p", type=float)
    common.add_argument("--q", type=_parse_q)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--kind")
    common.add_argument("--ladder", help='mollifier ladder "start:stop:ratio" in radians')
    common.add_argument("--T", type=float)
    common.add_argument("--dt", type=float)

    parser = argparse.ArgumentParser(prog="besovflux", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "write a velocity field (TFLD) and its description",
        "norms": "per-scale Besov sequence of a field",
        "mollscan": "mollification and commutator rates along an eps ladder",
        "fluxscan": "energy or helicity flux along a scale or eps ladder",
        "simulate": "integrate the Euler equations and record budgets",
        "verify": "run the acceptance battery",
        "report": "merge the outputs under --out into one bundle",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "verify":
            p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


_OVERRIDES = ("seed", "jobs", "out", "input", "dim", "n", "generator", "p", "q", "alpha", "beta", "theta", "kind", "ladder", "T", "dt")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in _OVERRIDES}
    try:
        cfg = load_config(args.config, overrides)
        only = None
        if args.command == "verify" and args.only:
            only = [int(x) for x in args.only.split(",")]
        ctx = _Context(cfg)
        handler = {
            "generate": cmd_generate,
            "norms": cmd_norms,
            "mollscan": cmd_mollscan,
            "fluxscan": cmd_fluxscan,
            "simulate": cmd_simulate,
            "report": cmd_report,
        }.get(args.command)
        return handler(ctx) if handler else cmd_verify(ctx, only)
    except (ConfigError, ValueError, IndexError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FieldFileError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
