"""Event-driven processor-sharing simulation of dynamic downlink traffic.

Flows arrive as a space-time Poisson process, attach to their nearest BS
and download an exponentially distributed file. A BS with ``n`` active
flows serves each at ``C(d_i) / n`` (egalitarian processor sharing, the
fluid limit of round robin). Cells do not interact in a noise-limited
network, so each cell is an independent multi-class PS queue.

The simulation is exact between events: with ``n`` flows the shared
"virtual time" advances at rate ``1/n`` and flow ``i`` leaves once it has
received ``size_i / C_i`` seconds of exclusive service.

The static baseline instead drops ``n ~ Poisson(N)`` full-buffer users
uniformly in each cell and averages ``C(d) / n`` over users.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import geomc
from .analytic import LoadModel
from .geomc import PppRealization, shannon_rate


@dataclass(frozen=True)
class FlowEvent:
    kind: str  # "arrival" or "departure"
    time: float
    position: tuple
    remaining_bits: float


@dataclass(frozen=True)
class SimConfig:
    """Run control for the dynamic simulation.

    ``warmup_s=None`` picks the warm-up automatically: the first window after
    which the running mean of the user count moves by less than 1 %.
    Arrivals keep coming for ``drain_factor * duration_s`` so that flows
    arriving near the end still complete.
    """

    duration_s: float
    warmup_s: float | None = None
    seed: int = 0
    max_users_cap: int = 5000
    n_windows: int = 50
    drain_factor: float = 0.25

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError("duration_s must be positive")
        if self.warmup_s is not None and not 0 <= self.warmup_s < self.duration_s:
            raise ValueError("warmup_s must lie in [0, duration_s)")
        if not self.max_users_cap > 0:
            raise ValueError("max_users_cap must be positive")
        if self.n_windows < 2:
            raise ValueError("n_windows must be at least 2")


@dataclass
class QueueStats:
    rho_hat: float
    mean_users: float
    mean_users_stderr: float
    arrival_rate: float
    mean_sojourn: float
    completed_flows: int
    bits_completed: float
    sojourn_total: float
    flow_throughput: float
    flow_throughput_stderr: float
    mean_flow_rate: float
    little_gap: float
    little_stderr: float
    warmup_s: float
    unstable: bool
    censored_flows: int = 0
    events: list = field(default_factory=list)


def _ratio_stats(num, den):
    n = len(num)
    tot = den.sum()
    if n < 2 or tot <= 0:
        return float("nan"), float("nan")
    r = num.sum() / tot
    resid = num - r * den
    return float(r), float(math.sqrt(np.sum(resid**2) / (n * (n - 1))) / den.mean())


def simulate_ps_cell(arrival_times, rates, sizes, cfg: SimConfig, positions=None, record_events=False) -> QueueStats:
    """Single processor-sharing cell fed by the given flow sequence.

    ``arrival_times`` must be sorted. Time statistics cover ``[warmup, T]``;
    flow statistics cover flows arriving in that interval.
    """
    times = np.asarray(arrival_times, dtype=float)
    tau = np.asarray(sizes, dtype=float) / np.asarray(rates, dtype=float)
    T = cfg.duration_s
    K = cfg.n_windows
    lw = T / K
    area = np.zeros(K)
    busy = np.zeros(K)
    n_flows = len(times)
    depart = np.full(n_flows, np.nan)
    events = []

    def accumulate(t0, t1, n):
        if n == 0 and t1 <= t0:
            return
        t1 = min(t1, T)
        while t0 < t1:
            k = min(int(t0 / lw), K - 1)
            if k < K - 1 and (k + 1) * lw <= t0:
                k += 1  # t0 on a boundary that rounded down
            end = t1 if k == K - 1 else min(t1, (k + 1) * lw)
            dt = end - t0
            if n:
                area[k] += n * dt
                busy[k] += dt
            t0 = end

    heap: list = []
    v = 0.0
    t = 0.0
    n = 0
    i = 0
    unstable = False
    inf = math.inf
    t_end = times[-1] if n_flows else 0.0
    while True:
        next_arr = times[i] if i < n_flows else inf
        next_dep = t + max(heap[0][0] - v, 0.0) * n if heap else inf
        if next_arr == inf and next_dep == inf:
            break
        if next_dep <= next_arr:
            t_next = next_dep
        else:
            t_next = next_arr
        if t < T:
            accumulate(t, t_next, n)
        if n:
            v += (t_next - t) / n
        t = t_next
        if next_dep <= next_arr:
            _, j = heapq.heappop(heap)
            depart[j] = t
            n -= 1
            if record_events:
                pos = tuple(positions[j]) if positions is not None else ()
                events.append(FlowEvent("departure", t, pos, 0.0))
        else:
            heapq.heappush(heap, (v + tau[i], i))
            n += 1
            if record_events:
                pos = tuple(positions[i]) if positions is not None else ()
                events.append(FlowEvent("arrival", t, pos, float(sizes[i])))
            i += 1
            if n > cfg.max_users_cap:
                unstable = True
                break
        if t >= T and not heap and i >= n_flows:
            break
        if t >= t_end and i >= n_flows and not heap:
            break

    if unstable:
        nan = float("nan")
        return QueueStats(nan, nan, nan, nan, nan, 0, 0.0, 0.0, 0.0, nan, nan, nan, nan, 0.0, True, 0, events)

    n_k = area / lw
    if cfg.warmup_s is not None:
        k0 = min(int(math.ceil(cfg.warmup_s / lw)), K - 2)
    else:
        k0 = _auto_warmup_window(n_k)
    warm = k0 * lw
    span = T - warm
    kk = slice(k0, K)

    in_win = (times >= warm) & (times < T)
    done = in_win & ~np.isnan(depart)
    censored = int(np.count_nonzero(in_win & np.isnan(depart)))
    soj = depart[done] - times[done]
    sz = np.asarray(sizes, dtype=float)[done]
    win_idx = np.minimum((times[done] / lw).astype(int), K - 1)
    soj_k = np.bincount(win_idx, weights=soj, minlength=K)[kk]
    size_k = np.bincount(win_idx, weights=sz, minlength=K)[kk]
    arr_k = np.bincount(np.minimum((times[in_win] / lw).astype(int), K - 1), minlength=K)[kk]

    mean_users = float(area[kk].sum() / span)
    nk = n_k[kk]
    n_arr = int(np.count_nonzero(in_win))
    lam_hat = n_arr / span
    mean_soj = float(soj.mean()) if len(soj) else float("nan")
    thr, thr_se = _ratio_stats(size_k, soj_k)
    gap_k = nk - soj_k / lw
    return QueueStats(
        rho_hat=float(busy[kk].sum() / span),
        mean_users=mean_users,
        mean_users_stderr=float(nk.std(ddof=1) / math.sqrt(len(nk))),
        arrival_rate=lam_hat,
        mean_sojourn=mean_soj,
        completed_flows=int(done.sum()),
        bits_completed=float(sz.sum()),
        sojourn_total=float(soj.sum()),
        flow_throughput=thr,
        flow_throughput_stderr=thr_se,
        mean_flow_rate=float(np.mean(sz / soj)) if len(soj) else float("nan"),
        little_gap=float(gap_k.mean()),
        little_stderr=float(gap_k.std(ddof=1) / math.sqrt(len(gap_k))),
        warmup_s=warm,
        unstable=False,
        censored_flows=censored,
        events=events,
    )


def _auto_warmup_window(n_k) -> int:
    cum = np.cumsum(n_k) / np.arange(1, len(n_k) + 1)
    for k in range(1, len(n_k) - 1):
        if cum[k] == 0 or abs(cum[k] - cum[k - 1]) <= 0.01 * abs(cum[k]):
            return k
    return len(n_k) // 2


# ---------------------------------------------------------------- arrival streams


def disk_flows(area: float, lambda_u: float, sigma_bits: float, model: LoadModel, cfg: SimConfig, rng):
    """Poisson flows on a disk of ``area`` centred on a single BS."""
    t_ext = cfg.duration_s * (1.0 + cfg.drain_factor)
    n = rng.poisson(lambda_u * area * t_ext)
    times = np.sort(rng.uniform(0.0, t_ext, n))
    radius = math.sqrt(area / math.pi)
    d = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    pos = np.column_stack([d * np.cos(theta), d * np.sin(theta)])
    sizes = rng.exponential(sigma_bits, n)
    return times, shannon_rate(d, model), sizes, pos


def simulate_disk_cell(area: float, model: LoadModel, cfg: SimConfig, record_events=False) -> QueueStats:
    """One BS serving a disk of the given area."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    times, rates, sizes, pos = disk_flows(area, model.traffic.lambda_u, model.traffic.sigma_bits, model, cfg, rng)
    return simulate_ps_cell(times, rates, sizes, cfg, positions=pos, record_events=record_events)


def _cell_boxes(r: PppRealization, n_points: int, rng):
    """Bounding boxes of each Voronoi cell from the integration lattice."""
    pts, h = geomc.integration_lattice(r, n_points, rng)
    tree = cKDTree(r.points)
    _, idx = geomc.nearest_bs(tree, pts)
    n_bs = len(r.points)
    lo = np.full((n_bs, 2), np.inf)
    hi = np.full((n_bs, 2), -np.inf)
    np.minimum.at(lo, idx, pts)
    np.maximum.at(hi, idx, pts)
    lo -= 2.0 * h
    hi += 2.0 * h
    w = r.window_half
    return tree, np.clip(lo, -w, w), np.clip(hi, -w, w)


def _uniform_in_cell(tree, cell, lo, hi, count, rng):
    """``count`` uniform points in Voronoi cell ``cell`` by rejection from its box."""
    out = []
    need = count
    box = (hi - lo).prod()
    while need > 0:
        batch = max(16, int(need * 1.5) + 16)
        cand = lo + (hi - lo) * rng.uniform(size=(batch, 2))
        _, idx = tree.query(cand)
        ok = cand[idx == cell]
        out.append(ok[:need])
        need -= len(ok[:need])
        if box <= 0:
            break
    return np.concatenate(out) if out else np.empty((0, 2))


def _cell_flows(tree, cell, lo, hi, bs_xy, model, cfg, rng):
    t_ext = cfg.duration_s * (1.0 + cfg.drain_factor)
    box_area = float((hi - lo).prod())
    n_box = rng.poisson(model.traffic.lambda_u * box_area * t_ext)
    cand = lo + (hi - lo) * rng.uniform(size=(n_box, 2))
    if n_box:
        _, idx = tree.query(cand)
        pos = cand[idx == cell]
    else:
        pos = np.empty((0, 2))
    n = len(pos)
    times = np.sort(rng.uniform(0.0, t_ext, n))
    d = np.hypot(pos[:, 0] - bs_xy[0], pos[:, 1] - bs_xy[1])
    sizes = rng.exponential(model.traffic.sigma_bits, n)
    return times, shannon_rate(d, model), sizes, pos


@dataclass
class DynamicResult:
    bs_index: np.ndarray
    rho_hat: np.ndarray
    mean_users: np.ndarray
    completed_flows: np.ndarray
    unstable: np.ndarray
    flow_throughput_hat: float
    flow_throughput_stderr: float
    cells: list

    @property
    def unstable_cells(self) -> int:
        return int(self.unstable.sum())

    def write_csv(self, fh):
        import csv

        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["cell_index", "rho_hat", "mean_users", "completed_flows", "unstable_flag"])
        for i, rh, mu, c, u in zip(self.bs_index, self.rho_hat, self.mean_users, self.completed_flows, self.unstable):
            wr.writerow([int(i), repr(float(rh)), repr(float(mu)), int(c), int(u)])


def _cell_rng(cfg, cell, stream):
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(stream, int(cell))))


def simulate_dynamic(
    r: PppRealization, model: LoadModel, cfg: SimConfig, n_integration_points: int = geomc.DEFAULT_INTEGRATION_POINTS
) -> DynamicResult:
    """Dynamic PS traffic on every inner cell of a realization.

    The flow throughput pools stable cells: total bits over total sojourn
    time, i.e. the ratio of means that Little's law links to ``w A / N``.
    """
    box_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(7,)))
    tree, lo, hi = _cell_boxes(r, n_integration_points, box_rng)
    inner = np.flatnonzero(r.inner_mask())
    cells = []
    for c in inner:
        rng = _cell_rng(cfg, c, 1)
        times, rates, sizes, pos = _cell_flows(tree, c, lo[c], hi[c], r.points[c], model, cfg, rng)
        cells.append(simulate_ps_cell(times, rates, sizes, cfg, positions=pos))
    unstable = np.array([s.unstable for s in cells], dtype=bool)
    stable = [s for s in cells if not s.unstable]
    # pool per-cell windowed ratio estimates through totals
    bits = np.array([s.bits_completed for s in stable])
    soj = np.array([s.sojourn_total for s in stable])
    thr, thr_se = _ratio_stats(bits, soj) if len(stable) > 1 else (float("nan"), float("nan"))
    return DynamicResult(
        bs_index=inner,
        rho_hat=np.array([s.rho_hat for s in cells]),
        mean_users=np.array([s.mean_users for s in cells]),
        completed_flows=np.array([s.completed_flows for s in cells]),
        unstable=unstable,
        flow_throughput_hat=thr,
        flow_throughput_stderr=thr_se,
        cells=cells,
    )


@dataclass
class StaticResult:
    throughput_hat: float
    throughput_stderr: float
    n_users: int
    n_empty_draws: int


def simulate_static_ppp_users(
    r: PppRealization,
    model: LoadModel,
    mean_users: float,
    cfg: SimConfig,
    n_draws: int = 400,
    n_integration_points: int = geomc.DEFAULT_INTEGRATION_POINTS,
) -> StaticResult:
    """Full-buffer baseline: ``E[B/n log2(1 + SNR)]`` over users.

    Every inner cell gets ``n_draws`` independent drops of ``Poisson(mean_users)``
    users. Empty drops contribute no users; the estimate is the mean over all
    users, with a stderr clustered by drop.
    """
    if not mean_users > 0:
        raise ValueError("mean_users must be positive")
    box_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(7,)))
    tree, lo, hi = _cell_boxes(r, n_integration_points, box_rng)
    sums, counts = [], []
    empty = 0
    for c in np.flatnonzero(r.inner_mask()):
        rng = _cell_rng(cfg, c, 2)
        ns = rng.poisson(mean_users, n_draws)
        empty += int(np.count_nonzero(ns == 0))
        total = int(ns.sum())
        if total == 0:
            continue
        pos = _uniform_in_cell(tree, c, lo[c], hi[c], total, rng)
        d = np.hypot(pos[:, 0] - r.points[c, 0], pos[:, 1] - r.points[c, 1])
        per_user = shannon_rate(d, model) / np.repeat(ns, ns)
        draw_of_user = np.repeat(np.arange(n_draws), ns)
        s = np.bincount(draw_of_user, weights=per_user, minlength=n_draws)
        keep = ns > 0
        sums.append(s[keep])
        counts.append(ns[keep].astype(float))
    sums = np.concatenate(sums) if sums else np.empty(0)
    counts = np.concatenate(counts) if counts else np.empty(0)
    thr, se = _ratio_stats(sums, counts)
    return StaticResult(thr, se, int(counts.sum()), empty)
