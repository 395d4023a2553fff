"""Synthetic test functions and the RMSE experiment runner.

One experiment cell is a (budget, macro-replication) pair: draw a randomized
TSG design, simulate replicated noisy outputs, fit, predict on points drawn
from an interior lattice and score the RMSE against the noiseless truth.
Every random stream is derived from ``(seed, budget, rep, role)``, so the
report does not depend on how cells are scheduled.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .designs import truncated_sg
from .errors import InputError, TMSKError
from .kernels import DomainMap, parse_kernel_spec
from .kriging import Dataset, NoiseModel, fit, predict_arrays, sample_stats

__all__ = [
    "TestFunction",
    "eval_test_function",
    "simulate",
    "simulate_design",
    "rmse",
    "ExperimentConfig",
    "ExperimentRow",
    "ExperimentReport",
    "run_experiment",
    "emit_report",
    "NOISE_LAWS",
]

NOISE_LAWS = ("zeta_y2", "zeta_abs_y", "unit")
_ROLE_DESIGN, _ROLE_NOISE, _ROLE_PRED = 0, 1, 2
# relative floor applied to zero sample variances in estimated-noise mode
VARIANCE_FLOOR = 1e-6


@dataclass(frozen=True)
class TestFunction:
    """``schwefel222`` on (-1, 1)^d or ``griewank`` on (-4, 4)^d."""

    __test__ = False  # not a pytest class

    name: str
    d: int
    griewank_denominator: str = "sqrt_j"

    def __post_init__(self):
        if self.name not in ("schwefel222", "griewank"):
            raise InputError(f"unknown test function {self.name!r}")
        if self.d < 1:
            raise InputError("dimension must be >= 1")
        self._divisors()  # validates the denominator option

    @property
    def domain(self) -> DomainMap:
        half = 1.0 if self.name == "schwefel222" else 4.0
        return DomainMap.box(-half, half, self.d)

    def _divisors(self) -> np.ndarray:
        opt = self.griewank_denominator
        if opt == "sqrt_j":
            return np.sqrt(np.arange(1, self.d + 1, dtype=float))
        if opt.startswith("constant:"):
            try:
                c = float(opt.split(":", 1)[1])
            except ValueError as exc:
                raise InputError(f"bad Griewank denominator {opt!r}") from exc
            if not c > 0:
                raise InputError("Griewank denominator must be positive")
            return np.full(self.d, c)
        raise InputError(f"Griewank denominator must be sqrt_j or constant:c, got {opt!r}")

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.name == "schwefel222":
            a = np.abs(X)
            return a.sum(axis=-1) + a.prod(axis=-1)
        return (X**2).sum(axis=-1) / 4000.0 - np.cos(X / self._divisors()).prod(axis=-1) + 1.0


def eval_test_function(f: TestFunction, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (f.d,):
        raise InputError(f"point must have shape ({f.d},)")
    lo, hi = np.asarray(f.domain.lo), np.asarray(f.domain.hi)
    if not np.all(np.isfinite(x)) or np.any(x < lo) or np.any(x > hi):
        raise InputError(f"point {x.tolist()} outside the native box of {f.name}")
    return float(f(x))


def _noise_var(y, zeta, law):
    if law == "zeta_y2":
        return zeta * y**2
    if law == "zeta_abs_y":
        return zeta * np.abs(y)
    if law == "unit":
        return np.ones_like(y)
    raise InputError(f"unknown noise law {law!r}; choose from {NOISE_LAWS}")


def simulate_design(f: TestFunction, X, zeta: float, m: int, rng, law: str = "zeta_y2"):
    """``(n, m)`` Gaussian outputs with mean ``f(x)`` and the chosen variance law."""
    if m < 1 or zeta < 0:
        raise InputError("need m >= 1 and zeta >= 0")
    y = np.atleast_1d(f(X))
    sd = np.sqrt(_noise_var(y, zeta, law))
    return y[:, None] + sd[:, None] * rng.standard_normal((y.size, m))


def simulate(f: TestFunction, x, zeta: float, m: int, rng, law: str = "zeta_y2") -> np.ndarray:
    """``m`` replications at one native point."""
    x = np.asarray(x, dtype=float)
    return simulate_design(f, x[None, :], zeta, m, rng, law)[0]


def rmse(predictions, truths) -> float:
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if p.size != t.size:
        raise InputError(f"length mismatch: {p.size} predictions, {t.size} truths")
    if p.size == 0:
        raise InputError("rmse of empty vectors")
    return float(np.sqrt(np.mean((p - t) ** 2)))


@dataclass(frozen=True)
class ExperimentConfig:
    function: str
    d: int
    budgets: tuple
    zeta: float = 0.1
    m: int = 10
    R: int = 1
    n_pred: int = 1000
    seed: int = 0
    kernel: str = "laplace:1"
    lattice_levels: int = 4
    noise_law: str = "zeta_y2"
    griewank_denominator: str = "sqrt_j"
    record_timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        b = tuple(int(v) for v in self.budgets)
        if not b or any(v < 1 for v in b):
            raise InputError("budgets must be a non-empty list of positive sizes")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise InputError("budgets must be strictly ascending")
        object.__setattr__(self, "budgets", b)
        if self.R < 1 or self.n_pred < 1 or self.m < 1 or self.jobs < 1:
            raise InputError("R, n_pred, m and jobs must all be >= 1")
        if self.zeta < 0:
            raise InputError("zeta must be >= 0")
        if self.lattice_levels < 1:
            raise InputError("lattice_levels must be >= 1")
        if self.noise_law not in NOISE_LAWS:
            raise InputError(f"unknown noise law {self.noise_law!r}")

    @property
    def test_function(self) -> TestFunction:
        return TestFunction(self.function, self.d, self.griewank_denominator)


@dataclass
class ExperimentRow:
    budget: int
    rep: int
    rmse: float = math.nan
    fit_seconds: Optional[float] = None
    predict_seconds: Optional[float] = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class ExperimentReport:
    config: Optional[ExperimentConfig] = None
    rows: list = field(default_factory=list)

    @property
    def n_errors(self) -> int:
        return sum(not r.ok for r in self.rows)

    def aggregates(self) -> list:
        """Per budget: ``(budget, mean, sd, fit_mean, predict_mean, n_ok)``.

        SD is the sample standard deviation over successful macro-replications
        (0 with a single one).
        """
        out = []
        for b in dict.fromkeys(r.budget for r in self.rows):
            good = [r for r in self.rows if r.budget == b and r.ok]
            vals = np.array([r.rmse for r in good])
            mean = float(vals.mean()) if vals.size else math.nan
            sd = float(vals.std(ddof=1)) if vals.size > 1 else (0.0 if vals.size else math.nan)

            def avg(attr):
                xs = [getattr(r, attr) for r in good if getattr(r, attr) is not None]
                return float(np.mean(xs)) if xs else None

            out.append((b, mean, sd, avg("fit_seconds"), avg("predict_seconds"), len(good)))
        return out


def _stream(seed: int, budget: int, rep: int, role: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(budget, rep, role)))


def prediction_points(d: int, count: int, levels: int, rng, exclude=None) -> np.ndarray:
    """Unit-cube points with coordinates drawn from ``{k/(levels+1)}``.

    Points coinciding with a row of ``exclude`` are redrawn.
    """
    grid = np.arange(1, levels + 1) / (levels + 1.0)
    taken = set()
    if exclude is not None:
        ex = np.asarray(exclude, dtype=float)
        on = ex[np.all(np.isin(ex, grid), axis=1)]
        taken = {tuple(r) for r in on.tolist()}
    if len(taken) >= levels**d:
        raise InputError("prediction lattice is covered by the design")
    rows = []
    while len(rows) < count:
        batch = grid[rng.integers(0, levels, size=(count - len(rows), d))]
        rows.extend(r for r in batch if tuple(r.tolist()) not in taken)
    return np.asarray(rows)


def _run_cell(cfg: ExperimentConfig, budget: int, rep: int) -> ExperimentRow:
    row = ExperimentRow(budget, rep)
    try:
        f = cfg.test_function
        dom = f.domain
        tm = parse_kernel_spec(cfg.kernel, cfg.d)
        grid = truncated_sg(cfg.d, budget, seed=_stream(cfg.seed, budget, rep, _ROLE_DESIGN))
        X = dom.from_unit(grid.points)
        draws = simulate_design(f, X, cfg.zeta, cfg.m, _stream(cfg.seed, budget, rep, _ROLE_NOISE),
                                cfg.noise_law)
        st = sample_stats(draws)
        t0 = time.perf_counter()
        if cfg.zeta == 0 and cfg.noise_law != "unit":
            data = Dataset(grid, st.means, domain=dom)
            noise = NoiseModel.noiseless(grid.n)
        elif cfg.m == 1:
            known = _noise_var(f(X), cfg.zeta, cfg.noise_law)
            known = _floor(known)
            data = Dataset(grid, st.means, known, st.reps, dom)
            noise = NoiseModel.known(known, st.reps)
        else:
            var = _floor(st.variances)
            data = Dataset(grid, st.means, var, st.reps, dom)
            noise = NoiseModel.estimated(var, st.reps)
        model = fit(tm, data, noise)
        t1 = time.perf_counter()
        U = prediction_points(cfg.d, cfg.n_pred, cfg.lattice_levels,
                              _stream(cfg.seed, budget, rep, _ROLE_PRED), exclude=grid.points)
        P = dom.from_unit(U)
        means, _ = predict_arrays(model, P, with_mse=False)
        t2 = time.perf_counter()
        row.rmse = rmse(means, f(P))
        if cfg.record_timing:
            row.fit_seconds, row.predict_seconds = t1 - t0, t2 - t1
    except (TMSKError, MemoryError, ValueError, ArithmeticError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _floor(var: np.ndarray) -> np.ndarray:
    # exact zeros arise where the response (hence the noise) vanishes
    pos = var[var > 0]
    if pos.size == 0:
        return np.full_like(var, 1.0)
    return np.where(var > 0, var, VARIANCE_FLOOR * pos.mean())


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    cells = [(b, r) for b in cfg.budgets for r in range(cfg.R)]
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(lambda c: _run_cell(cfg, *c), cells))
    else:
        rows = [_run_cell(cfg, *c) for c in cells]
    return ExperimentReport(cfg, rows)


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


ROW_HEADER = ["budget", "rep", "rmse", "fit_seconds", "predict_seconds", "error"]
AGG_HEADER = ["budget", "rmse_mean", "rmse_sd", "fit_seconds_mean", "predict_seconds_mean", "n_ok"]


def emit_report(report: ExperimentReport, path) -> None:
    """Per-cell rows, then a blank line and one aggregate row per budget."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_HEADER)
        for r in report.rows:
            w.writerow([r.budget, r.rep, _fmt(r.rmse), _fmt(r.fit_seconds),
                        _fmt(r.predict_seconds), r.error])
        if not report.rows:
            return
        w.writerow([])
        w.writerow(AGG_HEADER)
        for b, mean, sd, fm, pm, k in report.aggregates():
            w.writerow([b, _fmt(mean), _fmt(sd), _fmt(fm), _fmt(pm), k])
