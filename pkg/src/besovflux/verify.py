"""The acceptance battery: every desk-checkable inequality and identity, run at fixed sizes.

Each ``criterion_*`` function returns a list of :class:`Check` records; the
battery is their concatenation.  Timing enters only the human-readable summary,
never the pass/fail payload written to disk.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .dyadic import decompose, make_partition
from .fields import (
    abc_flow,
    lacunary_field,
    random_band_limited_field,
    random_smooth_field,
    single_mode,
    taylor_green_2d,
)
from .flux import (
    energy_flux_LP,
    energy_flux_moll,
    gamma_bound,
    GammaKernel,
    helicity_flux_LP,
    helicity_flux_LP_rotational,
    helicity_flux_moll,
    lowpass_energy,
)
from .grid import TorusField, TorusGrid
from .mollify import Mollifier, ceti_decomposition, commutator_field, commutator_scan, default_ladder, mollification_rates
from .norms import BesovSpec, bernstein_ratios, check_interpolation_chain, lebesgue_norm
from .scaling import loglog_fit
from .solver import run

__all__ = ["Check", "CRITERIA", "run_battery", "summarize"]


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = bool(self.passed)
        d["value"] = _finite(self.value)
        d["threshold"] = _finite(self.threshold)
        return d


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _le(criterion, name, value, threshold, detail=""):
    return Check(criterion, name, bool(value <= threshold), float(value), float(threshold), detail)


def _ge(criterion, name, value, threshold, detail=""):
    return Check(criterion, name, bool(value >= threshold), float(value), float(threshold), detail)


# 1. partition of unity and reconstruction


def criterion_partition(fields_per_grid: int = 100) -> list[Check]:
    out = []
    start = time.perf_counter()
    for n in (64, 128):
        g = TorusGrid(2, n)
        part = make_partition(g)
        band = g.kmag <= n / 3
        err = np.abs(part.partition_sum()[band] - 1.0).max()
        out.append(_le(1, f"partition of unity n={n}", err, 1e-12))
    for n in (64, 128):
        g = TorusGrid(2, n)
        worst = 0.0
        for seed in range(fields_per_grid):
            f = random_band_limited_field(g, seed=seed)
            rec = decompose(f).reconstruct()
            worst = max(worst, lebesgue_norm(rec - f, 2) / lebesgue_norm(f, 2))
        out.append(_le(1, f"reconstruction n={n} ({fields_per_grid} fields)", worst, 1e-10))
    out.append(_le(1, "partition suite runtime [s]", time.perf_counter() - start, 10.0))
    return out


# 2. Bernstein inequalities


def criterion_bernstein(n_fields: int = 50) -> list[Check]:
    g = TorusGrid(2, 64)
    upper, lower = 0.0, 0.0
    for seed in range(n_fields):
        r = bernstein_ratios(random_band_limited_field(g, seed=1000 + seed))
        upper = max(upper, max(r["upper"].values()))
        lower = max(lower, max(r["lower"].values()))
    return [
        _le(2, f"Bernstein upper constant ({n_fields} fields)", upper, 20.0),
        _le(2, f"Bernstein lower constant ({n_fields} fields)", lower, 20.0),
    ]


# 3. interpolation inequality


def criterion_interpolation(n_blocks: int = 1000) -> list[Check]:
    g = TorusGrid(2, 32)
    nb = len(make_partition(g).indices)
    n_fields = math.ceil(n_blocks / nb)
    fields = [random_band_limited_field(g, seed=2000 + s) for s in range(n_fields)]
    out = []
    for p in (1.5, 2.0, 2.5, 3.0):
        ratios = np.concatenate([check_interpolation_chain(f, p)["ratio"] for f in fields])
        ratios = ratios[np.isfinite(ratios)]
        out.append(_le(3, f"interpolation ratio p={p} ({ratios.size} blocks)", ratios.max(), 1 + 1e-8))
        if p == 3.0:
            out.append(_le(3, "interpolation ratio p=3 equals 1", np.abs(ratios - 1).max(), 1e-12))
    return out


# 4. commutator identity


def criterion_ceti(n_pairs: int = 100) -> list[Check]:
    g = TorusGrid(2, 64)
    ladder = default_ladder(g)
    worst = 0.0
    for i in range(n_pairs):
        f = random_band_limited_field(g, seed=3000 + 2 * i)
        h = random_band_limited_field(g, seed=3001 + 2 * i)
        m = Mollifier(g, float(ladder[i % ladder.size]))
        direct = commutator_field(f, h, m)
        other = ceti_decomposition(f, h, m)
        scale = np.abs(f.values).max() * np.abs(h.values).max()
        worst = max(worst, np.abs(direct.values - other.values).max() / scale)
    out = [_le(4, f"CETI identity ({n_pairs} random pairs)", worst, 1e-9)]
    k = 3
    m = Mollifier(g, float(ladder[0]))
    c = single_mode(g, (k, 0), (0.0, 1.0))[1]
    x = g.coords[0]
    eta1 = m.kernel_hat[k, 0]
    eta2 = m.kernel_hat[2 * k, 0]
    closed = 0.5 + eta2 * np.cos(2 * k * x) / 2 - eta1**2 * np.cos(k * x) ** 2
    err = max(
        np.abs(commutator_field(c, c, m).values[0] - closed).max(),
        np.abs(ceti_decomposition(c, c, m).values[0] - closed).max(),
    )
    out.append(_le(4, "CETI single-mode closed form", err, 1e-9))
    return out


# 5. mollification rates

RATE_GRID = 2048
RATE_LADDER = 0.78 * 2.0 ** (-np.arange(0, 4.01, 0.5))


def criterion_mollification_rates(n: int = RATE_GRID) -> list[Check]:
    g = TorusGrid(2, n)
    part = make_partition(g)
    out = []
    for alpha in (0.25, 1 / 3, 0.5):
        v, cert = lacunary_field(g, [1.0] * (part.j_resolved + 1), alpha, 2.0, seed=11)
        r = mollification_rates(v, BesovSpec(alpha, 2.0), RATE_LADDER, k=0, certificate=cert)
        out.append(
            _le(
                5,
                f"mollification rate alpha={alpha:.4g}",
                abs(r["planted_residual"]),
                0.1,
                f"slope {r['difference_slope']:.4f} over eps {RATE_LADDER[-1]:.4g}..{RATE_LADDER[0]:.4g}",
            )
        )
        del v
    return out


# 6. commutator rates at the critical exponents


def criterion_commutator_rates(n: int = 256) -> list[Check]:
    g = TorusGrid(2, n)
    part = make_partition(g)
    out = []
    for p in (2, 3):
        theta, q, alpha = p - 1.0, 2.0 * p / (p - 1), 1.0 / p
        v, _ = lacunary_field(g, [1.0] * (part.j_resolved + 1), alpha, q, seed=5)
        r = commutator_scan(v, default_ladder(g), theta, p, q, alpha=alpha)
        out.append(_ge(6, f"commutator rate p={p}", r["slope"], theta * alpha - 0.1, f"slope {r['slope']:.4f}"))
    return out


# 7. Gamma-kernel dichotomy

GAMMA_LENGTH = 240
GAMMA_SCALES = np.arange(60, 181)


def criterion_gamma(length: int = GAMMA_LENGTH) -> list[Check]:
    start = time.perf_counter()
    p = 3.0
    alpha, theta = 2.0 / p, p - 1.0
    j = np.arange(-1, length - 1)
    const = np.ones(length)
    decay = 2.0 ** (-j / 8.0)
    b_const = np.array([gamma_bound(const, None, alpha, None, theta, int(N)).value for N in GAMMA_SCALES])
    b_decay = np.array([gamma_bound(decay, None, alpha, None, theta, int(N)).value for N in GAMMA_SCALES])
    exact = GammaKernel(alpha).l1_norm() ** (theta + 1)
    spread = (b_const.max() - b_const.min()) / exact
    fit = loglog_fit(2.0**GAMMA_SCALES, b_decay)
    warn = gamma_bound(const, None, alpha, None, theta, 10).warning
    return [
        _le(7, "gamma bound constant across N (d_j = 1)", spread, 0.05),
        _le(7, "gamma bound matches l1 norms (d_j = 1)", np.abs(b_const / exact - 1).max(), 0.05),
        _le(7, "gamma bound slope (d_j = 2^{-j/8})", fit.slope, -1.0 / 16.0),
        Check(7, "critical exponent recorded without warning", warn is None, 0.0, 0.0, str(warn)),
        _le(7, "gamma suite runtime [s]", time.perf_counter() - start, 1.0),
    ]


# 8. steady solutions carry no flux


def criterion_steady() -> list[Check]:
    out = []
    g2 = TorusGrid(2, 64)
    tg = taylor_green_2d(g2)
    part = make_partition(g2)
    worst = max(abs(energy_flux_LP(tg, N)) for N in range(part.j_max + 1))
    out.append(_le(8, "Taylor-Green energy flux Pi_N", worst, 1e-9))
    worst = max(abs(energy_flux_moll(tg, Mollifier(g2, float(e)))) for e in default_ladder(g2))
    out.append(_le(8, "Taylor-Green mollified energy flux", worst, 1e-9))
    g3 = TorusGrid(3, 64)
    abc = abc_flow(g3)
    part = make_partition(g3)
    worst = max(abs(energy_flux_LP(abc, N)) for N in range(part.j_max + 1))
    out.append(_le(8, "ABC energy flux Pi_N", worst, 1e-9))
    worst = max(abs(helicity_flux_LP(abc, N)) for N in range(part.j_max + 1))
    out.append(_le(8, "ABC helicity flux (scale form)", worst, 1e-9))
    worst = max(abs(helicity_flux_moll(abc, Mollifier(g3, float(e)))) for e in default_ladder(g3))
    out.append(_le(8, "ABC mollified helicity flux", worst, 1e-9))
    return out


# 9. solver budgets

BUDGET_SCALES = (2, 3, 4)


def lp_budget_residuals(v0: TorusField, T: float, dt: float):
    diag = {}
    for N in BUDGET_SCALES:
        diag[f"pi{N}"] = lambda s, N=N: energy_flux_LP(s.velocity(), N)
        diag[f"e{N}"] = lambda s, N=N: lowpass_energy(s.velocity(), N)
    traj = run(v0, T, dt, diagnostics=diag)
    res = {}
    for N in BUDGET_SCALES:
        e = traj.diagnostics[f"e{N}"]
        res[N] = (e[-1] - e[0]) + simpson(traj.diagnostics[f"pi{N}"], x=traj.times)
    return traj, res


def criterion_budgets(n2: int = 256, dt: float = 0.004) -> list[Check]:
    start = time.perf_counter()
    out = []
    v0 = random_smooth_field(TorusGrid(2, n2), 3.0, seed=7)
    coarse, r_coarse = lp_budget_residuals(v0, 1.0, dt)
    fine, r_fine = lp_budget_residuals(v0, 1.0, dt / 2)
    out.append(_le(9, f"2D energy drift ({n2}^2, T=1)", fine.relative_drift("energy"), 1e-8))
    out.append(_le(9, f"2D enstrophy drift ({n2}^2, T=1)", fine.relative_drift("second"), 1e-6))
    scale = abs(fine.diagnostics[f"e{BUDGET_SCALES[-1]}"][0])
    for N in BUDGET_SCALES:
        step_err = abs(r_coarse[N] - r_fine[N])
        tol = max(10 * step_err, 1e-13 * scale)
        out.append(
            _le(9, f"LP energy budget N={N}", abs(r_fine[N]), tol, f"residual {r_fine[N]:.3e}, dt-halving estimate {step_err:.3e}")
        )
    g3 = TorusGrid(3, 32)
    traj = run(abc_flow(g3), 0.1, 0.01)
    out.append(_le(9, "3D ABC energy drift (32^3, T=0.1)", traj.relative_drift("energy"), 1e-7))
    out.append(_le(9, "3D ABC helicity drift (32^3, T=0.1)", traj.relative_drift("second"), 1e-6))
    out.append(_le(9, "budget suite runtime [s]", time.perf_counter() - start, 300.0))
    return out


# 10. helicity formulations


def criterion_helicity_forms(n_fields: int = 20) -> list[Check]:
    g = TorusGrid(3, 32)
    part = make_partition(g)
    worst = 0.0
    for s in range(n_fields):
        v = random_smooth_field(g, 2.0, seed=4000 + s)
        for N in range(part.j_max + 1):
            a = helicity_flux_LP(v, N)
            b = helicity_flux_LP_rotational(v, N)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    return [_le(10, f"helicity flux forms agree ({n_fields} fields)", worst, 1e-8)]


# 11. determinism


def criterion_determinism() -> list[Check]:
    from .cli import main

    out = []
    g = TorusGrid(2, 64)
    same = all(
        np.array_equal(a.values, b.values)
        for a, b in [
            (lacunary_field(g, [1.0] * 4, 1 / 3, 3.0, seed=9)[0], lacunary_field(g, [1.0] * 4, 1 / 3, 3.0, seed=9)[0]),
            (random_smooth_field(g, 3.0, seed=9), random_smooth_field(g, 3.0, seed=9)),
            (random_band_limited_field(g, seed=9), random_band_limited_field(g, seed=9)),
        ]
    )
    out.append(Check(11, "generators bit-identical", same, float(same), 1.0))
    commands = {
        "generate": ["--n", "64", "--seed", "17"],
        "norms": ["--n", "64", "--seed", "17", "--alpha", "0.3333333333333333"],
        "mollscan": ["--n", "256", "--seed", "17", "--p", "2", "--alpha", "0.5"],
        "fluxscan": ["--n", "64", "--seed", "17", "--p", "3"],
        "simulate": ["--n", "32", "--seed", "17", "--generator", "smooth", "--T", "0.05", "--dt", "0.01"],
    }
    with tempfile.TemporaryDirectory() as tmp:
        for cmd, args in commands.items():
            blobs = []
            for rep in range(2):
                d = Path(tmp) / f"{cmd}{rep}"
                code = main([cmd, *args, "--out", str(d)])
                files = sorted(p for p in d.rglob("*") if p.is_file())
                blobs.append((code, [(p.relative_to(d).as_posix(), p.read_bytes()) for p in files]))
            ok = blobs[0] == blobs[1] and blobs[0][0] == 0 and len(blobs[0][1]) > 0
            out.append(Check(11, f"command {cmd} byte-identical", ok, float(ok), 1.0))
        d = Path(tmp) / "generate0"
        code = main(["report", "--out", str(d)])
        first = (d / "bundle.json").read_bytes()
        main(["report", "--out", str(d)])
        ok = code == 0 and first == (d / "bundle.json").read_bytes()
        out.append(Check(11, "command report byte-identical", ok, float(ok), 1.0))
    return out


CRITERIA: dict[int, tuple[str, Callable[[], list[Check]]]] = {
    1: ("partition and reconstruction", criterion_partition),
    2: ("Bernstein inequalities", criterion_bernstein),
    3: ("interpolation inequality", criterion_interpolation),
    4: ("commutator identity", criterion_ceti),
    5: ("mollification rates", criterion_mollification_rates),
    6: ("commutator rates", criterion_commutator_rates),
    7: ("gamma-kernel dichotomy", criterion_gamma),
    8: ("steady-solution nullity", criterion_steady),
    9: ("budget identities", criterion_budgets),
    10: ("helicity formulation equivalence", criterion_helicity_forms),
    11: ("determinism", criterion_determinism),
}


def run_battery(only: list[int] | None = None, echo: Callable[[str], None] | None = None) -> list[Check]:
    checks: list[Check] = []
    for number, (title, fn) in CRITERIA.items():
        if only and number not in only:
            continue
        start = time.perf_counter()
        got = fn()
        checks.extend(got)
        if echo is not None:
            status = "PASS" if all(c.passed for c in got) else "FAIL"
            echo(f"[{status}] criterion {number}: {title} ({len(got)} checks, {time.perf_counter() - start:.1f} s)")
            for c in got:
                if not c.passed:
                    echo(f"       failed: {c.name}: {c.value:.4g} vs {c.threshold:.4g} {c.detail}")
    return checks


def summarize(checks: list[Check]) -> dict:
    return {
        "total": len(checks),
        "passed": sum(c.passed for c in checks),
        "failed": [c.name for c in checks if not c.passed],
        "checks": [c.to_dict() for c in checks],
    }
