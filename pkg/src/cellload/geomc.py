"""Monte-Carlo geometry oracle: PPP sampling and per-cell area and load.

Cells are never built as polygons. A randomly shifted lattice of
integration points covers the outer window and every point is assigned to
its nearest BS, which is exactly the Poisson-Voronoi partition. Per cell::

    area = (#points) * h^2
    load = h^2 * sum over its points of w / (B log2(1 + xi d^-alpha))

Only cells whose BS lies in the inner window (outer window shrunk by the
guard margin) are used for statistics; their cells are complete with
overwhelming probability once the guard is a few mean inter-BS distances.

Realization ``i`` of a run with master seed ``s`` is seeded by
``np.random.SeedSequence(s, spawn_key=(i,))``, so serial and parallel runs
produce the same numbers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.spatial import cKDTree

from .analytic import LoadModel
from .errors import EmptyRealizationError, InsufficientSamplesError

GUARD_FACTOR = 3.0
DEFAULT_INNER_CELLS = 100
DEFAULT_INTEGRATION_POINTS = 100_000
_QUERY_CHUNK = 1 << 18


def realization_seed(master_seed: int, index: int, attempt: int = 0) -> np.random.SeedSequence:
    """Seed of realization ``index``; ``attempt`` > 0 for empty-sample retries."""
    key = (index,) if attempt == 0 else (index, attempt)
    return np.random.SeedSequence(master_seed, spawn_key=key)


@dataclass(frozen=True)
class PppRealization:
    points: np.ndarray
    window_half: float
    guard: float
    seed: object = None

    @property
    def inner_half(self) -> float:
        return self.window_half - self.guard

    @property
    def outer_area(self) -> float:
        return (2.0 * self.window_half) ** 2

    def inner_mask(self) -> np.ndarray:
        return np.all(np.abs(self.points) <= self.inner_half, axis=1)


def default_window(lambda_bs: float, inner_cells: float = DEFAULT_INNER_CELLS, guard_factor: float = GUARD_FACTOR):
    """Outer half-width and guard giving ``inner_cells`` expected inner BSs."""
    inner_half = 0.5 * math.sqrt(inner_cells / lambda_bs)
    guard = guard_factor / math.sqrt(lambda_bs)
    return inner_half + guard, guard


def sample_ppp(lambda_bs: float, window_half: float, seed, guard: float | None = None) -> PppRealization:
    """Homogeneous PPP on the square ``[-window_half, window_half]^2``."""
    if not lambda_bs > 0 or not window_half > 0:
        raise ValueError("lambda_bs and window_half must be positive")
    if guard is None:
        guard = GUARD_FACTOR / math.sqrt(lambda_bs)
    if not 0 <= guard < window_half:
        raise ValueError("guard must lie in [0, window_half)")
    rng = np.random.default_rng(seed)
    n = rng.poisson(lambda_bs * (2.0 * window_half) ** 2)
    if n == 0:
        raise EmptyRealizationError("PPP realization has no points")
    pts = rng.uniform(-window_half, window_half, size=(n, 2))
    return PppRealization(pts, float(window_half), float(guard), seed)


@dataclass(frozen=True)
class CellLoadSample:
    bs_index: int
    area_m2: float
    load: float
    in_inner_window: bool


@dataclass
class CellLoads:
    """Column-oriented table of per-cell areas and loads."""

    bs_index: np.ndarray
    area_m2: np.ndarray
    load: np.ndarray
    in_inner_window: np.ndarray
    n_empty: int = 0

    def __len__(self):
        return len(self.bs_index)

    def __iter__(self) -> Iterator[CellLoadSample]:
        for i, a, l, f in zip(self.bs_index, self.area_m2, self.load, self.in_inner_window):
            yield CellLoadSample(int(i), float(a), float(l), bool(f))

    def inner(self) -> "CellLoads":
        m = self.in_inner_window
        return CellLoads(self.bs_index[m], self.area_m2[m], self.load[m], self.in_inner_window[m], self.n_empty)

    @classmethod
    def from_samples(cls, samples) -> "CellLoads":
        samples = list(samples)
        return cls(
            np.array([s.bs_index for s in samples], dtype=np.int64),
            np.array([s.area_m2 for s in samples], dtype=float),
            np.array([s.load for s in samples], dtype=float),
            np.array([s.in_inner_window for s in samples], dtype=bool),
        )

    @classmethod
    def concat(cls, tables) -> "CellLoads":
        tables = list(tables)
        return cls(
            np.concatenate([t.bs_index for t in tables]),
            np.concatenate([t.area_m2 for t in tables]),
            np.concatenate([t.load for t in tables]),
            np.concatenate([t.in_inner_window for t in tables]),
            sum(t.n_empty for t in tables),
        )

    def write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bs_index", "area_m2", "load", "in_inner_window"])
        for s in self:
            writer.writerow([s.bs_index, repr(s.area_m2), repr(s.load), int(s.in_inner_window)])


def integration_lattice(r: PppRealization, n_points: int, rng) -> tuple[np.ndarray, float]:
    """Randomly shifted square lattice of about ``n_points`` over the outer window."""
    m = max(1, int(math.ceil(math.sqrt(n_points))))
    h = 2.0 * r.window_half / m
    off = rng.uniform(0.0, h, size=2)
    ax = -r.window_half + off[0] + h * np.arange(m)
    ay = -r.window_half + off[1] + h * np.arange(m)
    gx, gy = np.meshgrid(ax, ay, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()]), h


def nearest_bs(tree: cKDTree, pts: np.ndarray):
    dist = np.empty(len(pts))
    idx = np.empty(len(pts), dtype=np.int64)
    for start in range(0, len(pts), _QUERY_CHUNK):
        d, i = tree.query(pts[start : start + _QUERY_CHUNK])
        dist[start : start + len(d)] = d
        idx[start : start + len(d)] = i
    return dist, idx


def shannon_rate(d, model: LoadModel):
    """Noise-limited rate ``B log2(1 + xi d^-alpha)`` [bit/s]."""
    d = np.maximum(d, 1e-9)
    return model.net.bandwidth_hz * np.log2(1.0 + model.xi * d ** (-model.alpha))


def cell_loads(
    r: PppRealization, model: LoadModel, n_integration_points: int = DEFAULT_INTEGRATION_POINTS, rng=None
) -> CellLoads:
    """Per-cell area and load estimates for one realization."""
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(0) if r.seed is None else _child(r.seed))
    pts, h = integration_lattice(r, n_integration_points, rng)
    tree = cKDTree(r.points)
    dist, idx = nearest_bs(tree, pts)
    n_bs = len(r.points)
    cell_w = h * h
    counts = np.bincount(idx, minlength=n_bs)
    if model.w == 0:
        loads = np.zeros(n_bs)
    else:
        loads = cell_w * np.bincount(idx, weights=model.w / shannon_rate(dist, model), minlength=n_bs)
    keep = counts > 0
    inner = r.inner_mask()
    return CellLoads(
        np.flatnonzero(keep),
        counts[keep] * cell_w,
        loads[keep],
        inner[keep],
        n_empty=int(np.count_nonzero(~keep & inner)),
    )


def _child(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (1 << 20,))


@dataclass
class CellStats:
    n_cells: int
    typical_mean_load: float
    typical_load_stderr: float
    zero_mean_load: float
    zero_load_stderr: float
    typical_mean_area: float
    zero_mean_area: float
    load_grid: np.ndarray
    empirical_load_cdf: np.ndarray


def _ratio_stderr(num, den):
    # delta-method stderr of sum(num)/sum(den) for i.i.d. pairs
    n = len(num)
    if n < 2:
        return float("nan")
    r = num.sum() / den.sum()
    resid = num - r * den
    return float(math.sqrt(np.sum(resid**2) / (n * (n - 1))) / den.mean())


def typical_vs_zero_stats(samples, load_grid=None, min_samples: int = 1000) -> CellStats:
    """Typical-cell (unweighted) and zero-cell (area-weighted) statistics.

    Only inner-window cells count. A uniformly placed point falls in a cell
    with probability proportional to its area, hence the area weighting for
    the zero cell.
    """
    table = samples if isinstance(samples, CellLoads) else CellLoads.from_samples(samples)
    table = table.inner()
    n = len(table)
    if n < min_samples:
        raise InsufficientSamplesError(f"{n} inner cells, need at least {min_samples}")
    a, l = table.area_m2, table.load
    if load_grid is None:
        load_grid = np.linspace(0.0, 1.0, 11)
    load_grid = np.asarray(load_grid, dtype=float)
    srt = np.sort(l)
    ecdf = np.searchsorted(srt, load_grid, side="right") / n
    return CellStats(
        n_cells=n,
        typical_mean_load=float(l.mean()),
        typical_load_stderr=float(l.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan"),
        zero_mean_load=float(np.sum(a * l) / np.sum(a)),
        zero_load_stderr=_ratio_stderr(a * l, a),
        typical_mean_area=float(a.mean()),
        zero_mean_area=float(np.sum(a * a) / np.sum(a)),
        load_grid=load_grid,
        empirical_load_cdf=ecdf,
    )


# ---------------------------------------------------------------- multi-realization driver


@dataclass
class RealizationSummary:
    index: int
    n_inner: int
    sum_load: float
    sum_area: float
    sum_area_load: float
    retries: int


@dataclass
class MonteCarloRun:
    summaries: list
    cells: CellLoads | None

    @property
    def n_cells(self) -> int:
        return sum(s.n_inner for s in self.summaries)

    def _arrays(self):
        s = self.summaries
        return (
            np.array([x.n_inner for x in s], float),
            np.array([x.sum_load for x in s]),
            np.array([x.sum_area for x in s]),
            np.array([x.sum_area_load for x in s]),
        )

    def typical_mean_load(self):
        """Pooled mean over all inner cells and its cluster-robust stderr."""
        n, sl, _, _ = self._arrays()
        return float(sl.sum() / n.sum()), _ratio_stderr(sl, n)

    def zero_mean_load(self):
        _, _, sa, sal = self._arrays()
        return float(sal.sum() / sa.sum()), _ratio_stderr(sal, sa)

    def realization_means(self) -> np.ndarray:
        n, sl, _, _ = self._arrays()
        return sl / np.maximum(n, 1)

    @property
    def retries(self) -> int:
        return sum(s.retries for s in self.summaries)


def _one(args):
    model, master_seed, index, inner_cells, n_points, guard_factor, keep_cells = args
    half, guard = default_window(model.lam, inner_cells, guard_factor)
    attempt = 0
    while True:
        seed = realization_seed(master_seed, index, attempt)
        try:
            r = sample_ppp(model.lam, half, seed, guard)
            break
        except EmptyRealizationError:
            attempt += 1
    cells = cell_loads(r, model, n_points).inner()
    summary = RealizationSummary(
        index,
        len(cells),
        float(cells.load.sum()),
        float(cells.area_m2.sum()),
        float(np.sum(cells.area_m2 * cells.load)),
        attempt,
    )
    return summary, (cells if keep_cells else None)


def run_monte_carlo(
    model: LoadModel,
    n_realizations: int,
    master_seed: int,
    *,
    inner_cells: float = DEFAULT_INNER_CELLS,
    n_integration_points: int = DEFAULT_INTEGRATION_POINTS,
    guard_factor: float = GUARD_FACTOR,
    jobs: int = 1,
    keep_cells: bool = False,
) -> MonteCarloRun:
    """Evaluate ``n_realizations`` independent PPP windows.

    Results are aggregated in realization order, so ``jobs`` does not change
    any output bit.
    """
    args = [
        (model, master_seed, i, inner_cells, n_integration_points, guard_factor, keep_cells)
        for i in range(n_realizations)
    ]
    if jobs <= 1:
        results = [_one(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_one, args, chunksize=max(1, n_realizations // (4 * jobs))))
    summaries = [s for s, _ in results]
    cells = CellLoads.concat([c for _, c in results]) if keep_cells else None
    return MonteCarloRun(summaries, cells)
