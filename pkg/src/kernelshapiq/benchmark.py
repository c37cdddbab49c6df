"""Benchmark sweeps over (method, budget, run) and numerical checks of the
closed-form precision matrix and the higher-order split representation."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .combinatorics import all_masks, kernel_weights, popcount
from .estimators import EstimatorConfig, estimate
from .exact import exact_sii
from .games import Game, SoumGame, generate_soum
from .metrics import mse, prec_at_10
from .values import InteractionValues
from .wls import (
    WlsSystem,
    aggregate_sii_to_ksii,
    build_design_matrix,
    conjectured_precision_matrix,
    sii_weight_matrix,
    solve_wls,
    solve_wls_limit,
)

log = logging.getLogger(__name__)

CSV_HEADER = ("method", "order", "budget", "run_seed", "mse", "prec_at_10", "runtime_ms", "status")
CONJECTURE_THRESHOLD = 1e-10


@dataclass
class BenchmarkRow:
    method: str
    order: int
    budget: int
    run_seed: int
    mse: float
    prec_at_10: float
    runtime_ms: float
    status: str = "ok"


def ground_truth(game: Game, max_order: int, index: str = "sii") -> InteractionValues:
    """Analytic for SOUMs, brute force otherwise."""
    gt = game.exact_sii(max_order) if isinstance(game, SoumGame) else exact_sii(game, max_order)
    return aggregate_sii_to_ksii(gt, max_order) if index == "ksii" else gt


def run_benchmark(
    game: Game,
    methods: Sequence[str],
    orders: Sequence[int],
    budget_grid: Sequence[int],
    n_runs: int,
    seed0: int = 0,
    index: str = "sii",
    mu_inf: float = 1e6,
    timing: bool = True,
    gt: Optional[InteractionValues] = None,
) -> list[BenchmarkRow]:
    """One row per (method, budget, run, order).

    Run ``r`` uses seed ``seed0 + r`` for every method and budget. Ground truth
    is computed once up front and excluded from the timings. A failing cell is
    recorded with its error in ``status`` and NaN metrics.
    """
    if index not in ("sii", "ksii"):
        raise ValueError(f"index must be 'sii' or 'ksii', got {index!r}")
    max_order = max(orders)
    if gt is None:
        gt = ground_truth(game, max_order, index)
    rows = []
    for method in methods:
        for budget in budget_grid:
            for run in range(n_runs):
                seed = seed0 + run
                game.reset_counter()
                start = time.perf_counter()
                try:
                    est = estimate(method, game, EstimatorConfig(max_order, budget, mu_inf=mu_inf, seed=seed))
                    elapsed = (time.perf_counter() - start) * 1e3 if timing else 0.0
                    result = est.ksii if index == "ksii" else est.sii
                    status = "ok" if game.eval_counter <= budget else f"over_budget:{game.eval_counter}"
                    for ell in orders:
                        rows.append(
                            BenchmarkRow(method, ell, budget, seed, mse(result, gt, ell), prec_at_10(result, gt, ell), elapsed, status)
                        )
                except Exception as exc:  # keep long sweeps alive
                    log.warning("%s budget=%d seed=%d failed: %s", method, budget, seed, exc)
                    for ell in orders:
                        rows.append(BenchmarkRow(method, ell, budget, seed, float("nan"), float("nan"), 0.0, f"failed:{exc}"))
    return rows


def _fmt(value) -> str:
    return format(value, ".17g") if isinstance(value, float) else str(value)


def write_benchmark_csv(rows: Iterable[BenchmarkRow], path_or_file):
    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_fmt(getattr(row, name)) for name in CSV_HEADER])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def read_benchmark_csv(path: Union[str, Path]) -> list[BenchmarkRow]:
    types = {f.name: f.type for f in fields(BenchmarkRow)}
    casts = {"int": int, "float": float, "str": str}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [BenchmarkRow(**{k: casts[types[k]](v) for k, v in rec.items()}) for rec in reader]


def summarize(rows: Sequence[BenchmarkRow]) -> dict[tuple[str, int, int], dict[str, float]]:
    """Median and mean MSE / Prec@10 per (method, order, budget) over runs."""
    groups: dict[tuple[str, int, int], list[BenchmarkRow]] = {}
    for row in rows:
        if row.status == "ok":
            groups.setdefault((row.method, row.order, row.budget), []).append(row)
    out = {}
    for key, group in sorted(groups.items()):
        errs = np.array([r.mse for r in group])
        precs = np.array([r.prec_at_10 for r in group])
        out[key] = {
            "median_mse": float(np.median(errs)),
            "mean_mse": float(errs.mean()),
            "sem_mse": float(errs.std(ddof=1) / np.sqrt(len(errs))) if len(errs) > 1 else 0.0,
            "mean_prec_at_10": float(precs.mean()),
            "runs": len(group),
        }
    return out


# --- conjecture validation ---------------------------------------------------


@dataclass
class ConjectureReport:
    conjecture: str
    n_range: tuple[int, int]
    k_range: tuple[int, int]
    max_mse: float
    details: list[tuple[int, int, float]] = field(default_factory=list)
    threshold: float = CONJECTURE_THRESHOLD

    @property
    def passed(self) -> bool:
        return bool(self.max_mse < self.threshold)

    def table(self) -> str:
        lines = [f"{'n':>3} {'k':>3} {'mse':>12}  result"]
        for n, k, err in self.details:
            lines.append(f"{n:>3} {k:>3} {err:>12.3e}  {'pass' if err < self.threshold else 'FAIL'}")
        lines.append(f"{self.conjecture}: max mse {self.max_mse:.3e} -> {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _grid(n_range):
    lo, hi = n_range
    return [(n, k) for n in range(lo, hi + 1) for k in range(1, n // 2 + 1)]


def full_system(n: int, k: int, mu_inf: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Design matrix and ``mu_k`` weights over all ``2^n`` coalitions."""
    masks = all_masks(n)
    return masks, build_design_matrix(masks, k, n), kernel_weights(k, n, mu_inf)[popcount(masks)]


def precision_matrix_error(n: int, k: int, mu_inf: float = 1e7) -> float:
    """MSE between the numerically inverted ``X^T W X`` and the closed form."""
    _, X, w = full_system(n, k, mu_inf)
    numeric = WlsSystem(X, np.zeros(len(w)), w).precision_matrix()
    return float(np.mean((numeric - conjectured_precision_matrix(n, k)) ** 2))


def validate_conjecture_inverse(n_range=(2, 11), mu_inf: float = 1e7) -> ConjectureReport:
    details = []
    for n, k in _grid(n_range):
        try:
            err = precision_matrix_error(n, k, mu_inf)
        except np.linalg.LinAlgError as exc:
            log.warning("inversion failed for n=%d k=%d: %s", n, k, exc)
            err = float("inf")
        details.append((n, k, err))
    ks = [k for _, k in _grid(n_range)]
    return ConjectureReport("inverse", tuple(n_range), (1, max(ks)), max(e for *_, e in details), details)


def split_representation(
    game: Game,
    k: int,
    lower_sii: Optional[InteractionValues] = None,
    mu_inf: float = 1e7,
    limit: bool = True,
) -> np.ndarray:
    """Order-``k`` SII via the band split over the full power set.

    The target is the residual ``nu - nu_hat_{k-1}`` built from ``lower_sii``
    (orders below ``k``). Coalitions outside ``k <= t <= n - k`` contribute
    through their exact SII weights; inside the band the residual is fitted by
    weighted least squares with ``mu_k`` weights. With ``limit`` the
    ``mu_inf -> inf`` solution is computed exactly, otherwise ``mu_inf`` is
    used as a finite weight.
    """
    n = game.n
    masks, X, w = full_system(n, k, mu_inf)
    y = game(masks)
    y = y - y[0]
    for ell in range(1, k):
        y = y - build_design_matrix(masks, ell, n) @ lower_sii.at_order(ell)
    t = popcount(masks)
    band = (t >= k) & (t <= n - k)
    Q = sii_weight_matrix(masks[~band], k, n)
    target = np.where(band, y, 0.0)
    fit = solve_wls_limit(X, target, w, ~band) if limit else solve_wls(X, target, w)
    return Q @ y[~band] + fit


def validate_conjecture_sii(
    n_range=(2, 11),
    n_soums: int = 10,
    m_terms: int = 1000,
    seed: int = 0,
    mu_inf: float = 1e7,
    limit: bool = True,
) -> ConjectureReport:
    """Average MSE (over random SOUMs) between analytic SII and the split representation.

    ``limit=False`` keeps ``mu_inf`` finite; its ``O(1 / mu_inf)`` bias scales
    with the game values, which for 1000-term SOUMs reach the hundreds.
    """
    details = []
    rng = np.random.default_rng(seed)
    for n, k in _grid(n_range):
        errs = []
        for _ in range(n_soums):
            game = generate_soum(n, m_terms, None, 0, seed=int(rng.integers(2**63)))
            gt = game.exact_sii(k)
            est = split_representation(game, k, gt, mu_inf, limit)
            errs.append(float(np.mean((est - gt.at_order(k)) ** 2)))
        details.append((n, k, float(np.mean(errs))))
    ks = [k for _, k in _grid(n_range)]
    name = "sii" if limit else f"sii(mu_inf={mu_inf:g})"
    return ConjectureReport(name, tuple(n_range), (1, max(ks)), max(e for *_, e in details), details)
