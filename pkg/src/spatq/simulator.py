"""Monte Carlo engines: static SIR sampling, coupled slotted queues, and
spatial arrival-rate spread estimation.

These are deliberately direct simulations of the slot dynamics so they can
serve as independent checks on the closed forms in `analytics`.  Slot
convention throughout: arrivals land at the start of a slot and can be served
within it, so the smallest possible packet delay is one slot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analytics import DelayResult, NetworkParameters
from .geometry import (
    PER_CLUSTER,
    PER_USER,
    TOROIDAL,
    AssociationMap,
    PointPattern,
    Window,
    associate,
    sample_pcp,
    sample_ppp,
)
from .traffic import ArrivalRateDistribution, ArrivalStream

CELL_TYPICAL = "typical"
CELL_CENTER = "center"

_TRACE_GRID = 2048


@dataclass(frozen=True)
class MetricsReport:
    """Empirical counterparts of the analytic quantities for one run."""

    empirical_busy_prob: float
    empirical_success_prob: float
    per_user_mean_delay: float
    delay_samples: int
    unstable_fraction: float
    clamped_rate_fraction: float
    seed: int
    horizon: int
    warmup: int

    _FIELDS = (
        "empirical_busy_prob",
        "empirical_success_prob",
        "per_user_mean_delay",
        "delay_samples",
        "unstable_fraction",
        "clamped_rate_fraction",
        "seed",
        "horizon",
        "warmup",
    )

    def to_kv_text(self) -> str:
        lines = [f"{name}={_format_value(getattr(self, name))}" for name in self._FIELDS]
        return "\n".join(lines) + "\n"

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(cls._FIELDS)

    def to_csv_row(self) -> str:
        return ",".join(_format_value(getattr(self, name)) for name in self._FIELDS)


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass(frozen=True)
class NetworkTrace:
    """Detailed per-queue bookkeeping from a coupled run (for verification).

    Queue lengths are sampled on a grid of at most 2048 slots, which is what
    the drift classifier consumes; exact per-packet accounting lives in the
    departure log and the arrival/departure counters.
    """

    trace_slots: np.ndarray
    queue_lengths: np.ndarray
    arrivals: np.ndarray
    departures: np.ndarray
    delay_values: np.ndarray
    delay_users: np.ndarray
    departure_log: list

    @property
    def final_queue(self) -> np.ndarray:
        return self.arrivals - self.departures


def _drift_fraction(traces: np.ndarray, slots: np.ndarray, slope_eps: float) -> float:
    """Fraction of queues whose length drifts upward over the last half."""
    half = slots >= slots[-1] / 2.0
    x = slots[half].astype(float)
    y = traces[:, half].astype(float)
    x_c = x - x.mean()
    denom = float((x_c**2).sum())
    slopes = (y - y.mean(axis=1, keepdims=True)) @ x_c / denom
    return float(np.mean(slopes > slope_eps))


def classify_queue_stability(
    traces: np.ndarray,
    slots: np.ndarray | None = None,
    slope_eps: float = 1e-3,
    min_span: int = 100_000,
) -> float:
    """Fraction of queues flagged unstable by a linear-drift test.

    `traces` holds queue lengths, one row per queue, sampled at `slots`
    (consecutive slots when omitted).  A queue is unstable when the
    least-squares slope of its length over the last half of the horizon
    exceeds `slope_eps` packets per slot.
    """
    traces = np.atleast_2d(np.asarray(traces))
    if slots is None:
        slots = np.arange(traces.shape[1])
    slots = np.asarray(slots)
    if traces.shape[1] != len(slots):
        raise ValueError("traces and slots disagree on length")
    if len(slots) < 8 or slots[-1] - slots[0] + 1 < min_span:
        raise ValueError(
            f"trace spans {0 if not len(slots) else slots[-1] - slots[0] + 1} slots; "
            f"need at least {min_span} for a drift test"
        )
    return _drift_fraction(traces, slots, slope_eps)


def run_sir_static(
    params: NetworkParameters,
    q: float,
    samples: int,
    seed: int,
    mean_bss: float = 200.0,
    batch: int = 4096,
) -> tuple[float, float]:
    """Empirical success probability with interferers active independently w.p. q.

    Each sample draws the serving-link length from the nearest-station
    distance law and, independently, a fresh station scatter thinned by q as
    the interference field, with unit-mean exponential fading on every link.
    The serving distance and the interference field are decoupled exactly as
    in the closed form being checked; coupling them through one pattern would
    carve an interferer-free disc around the user and raise the result.
    Returns (estimate, standard error).  The window holds `mean_bss` stations
    on average, which bounds the far-field truncation bias; the result is
    scale invariant in the station intensity.
    """
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"activity probability must lie in [0, 1], got {q!r}")
    if samples < 100_000:
        raise ValueError("need at least 1e5 samples for a stable estimate")
    lam = params.lambda_b
    half_width = 0.5 * math.sqrt(mean_bss / lam)
    rng = np.random.default_rng(seed)
    exponent = -0.5 * params.alpha
    successes = 0
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        link_sq = -np.log(rng.random(n)) / (math.pi * lam)
        signal = rng.standard_exponential(n) * link_sq**exponent
        counts = rng.poisson(mean_bss, n)
        m = max(int(counts.max()), 1)
        xs = (rng.random((n, m)) * 2.0 - 1.0) * half_width
        ys = (rng.random((n, m)) * 2.0 - 1.0) * half_width
        r2 = xs**2 + ys**2
        r2[np.arange(m) >= counts[:, None]] = np.inf  # mask padded columns
        active = rng.random((n, m)) < q
        gains = rng.standard_exponential((n, m))
        contrib = active * gains * r2**exponent  # padded columns contribute 0
        interference = contrib.sum(axis=1)
        successes += int(np.count_nonzero(signal > params.theta * interference))
        done += n
    p_hat = successes / samples
    stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / samples)
    return p_hat, stderr


def _queue_departure_slots(
    arrival_slots: np.ndarray, success_slots: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Departure slot per packet for a FIFO head-retry queue.

    Packet i departs at the first service-success slot that is >= its arrival
    and strictly later than the previous departure.  Returns (departure slots
    of served packets, boolean mask of packets served within the horizon).
    """
    m = len(arrival_slots)
    if m == 0:
        return np.empty(0, dtype=int), np.empty(0, dtype=bool)
    first_ok = np.searchsorted(success_slots, arrival_slots, side="left")
    idx = np.arange(m)
    ranks = np.maximum.accumulate(first_ok - idx) + idx
    served = ranks < len(success_slots)
    return success_slots[ranks[served]], served


def _queue_reference_loop(
    arrivals: np.ndarray, service_ok: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Slot-by-slot reference implementation of the same queue dynamics."""
    buffer: list[int] = []
    delays = []
    arrival_slots = []
    for t in range(len(arrivals)):
        if arrivals[t]:
            buffer.append(t)
            arrival_slots.append(t)
        if buffer and service_ok[t]:
            delays.append(t - buffer.pop(0) + 1)
    return np.asarray(delays), np.asarray(arrival_slots)


def run_delay_oracle(
    n_users: float,
    xi0: float,
    mu: float,
    horizon: int,
    seed: int,
    slope_eps: float = 1e-3,
) -> DelayResult:
    """Mean sojourn time of a single queue with Bernoulli arrivals.

    Service succeeds with probability `mu` in every slot the queue is
    non-empty; a failure keeps the head packet in place.  `n_users` is the
    cell occupancy the service rate was derived from and bounds it by 1/n.
    A queue whose length drifts upward is reported as unstable instead of
    returning a divergent average.
    """
    if not (0.0 < mu <= 1.0):
        raise ValueError(f"service probability must lie in (0, 1], got {mu!r}")
    if n_users < 1 or mu * n_users > 1.0 + 1e-9:
        raise ValueError("service probability inconsistent with n_users (mu <= 1/n)")
    if not (0.0 <= xi0 <= 1.0):
        raise ValueError(f"arrival rate must lie in [0, 1], got {xi0!r}")
    if horizon < 1_000_000:
        raise ValueError("delay oracle needs a horizon of at least 1e6 slots")
    rng = np.random.default_rng(seed)
    arrival_slots = _bernoulli_slots(rng, horizon, xi0)
    success_slots = _bernoulli_slots(rng, horizon, mu)
    if len(arrival_slots) == 0:
        raise ValueError("no packets arrived within the horizon; raise xi0 or horizon")
    departures, served = _queue_departure_slots(arrival_slots, success_slots)

    grid = np.unique(np.linspace(0, horizon - 1, _TRACE_GRID).astype(int))
    length = np.searchsorted(arrival_slots, grid, side="right") - np.searchsorted(
        departures, grid, side="right"
    )
    if _drift_fraction(length[None, :], grid, slope_eps) > 0:
        return DelayResult(None)
    if not served.any():
        return DelayResult(None)
    delays = departures - arrival_slots[served] + 1
    return DelayResult(float(delays.mean()))


def _bernoulli_slots(rng: np.random.Generator, horizon: int, p: float) -> np.ndarray:
    """Sorted slot indices of Bernoulli(p) events, drawn in bounded chunks."""
    chunks = []
    step = 1 << 21
    for start in range(0, horizon, step):
        n = min(step, horizon - start)
        hits = np.flatnonzero(rng.random(n) < p)
        if len(hits):
            chunks.append(hits + start)
    if not chunks:
        return np.empty(0, dtype=int)
    return np.concatenate(chunks)


def simulate_network(
    bss: PointPattern,
    users: PointPattern,
    assoc: AssociationMap,
    rates: np.ndarray,
    theta: float,
    alpha: float,
    horizon: int,
    warmup: int,
    seed,
    interference: bool = True,
    active_only: bool = False,
    slope_eps: float = 1e-3,
    clamped_rate_fraction: float = 0.0,
    detail: bool = False,
):
    """Run the coupled slotted dynamics on an explicit network instance.

    Per slot: arrivals are appended, every station draws one of its
    associated users uniformly (all users by default; only backlogged ones
    when `active_only`), transmits iff the drawn queue is non-empty, and all
    concurrent transmissions interfere.  A success removes the head packet
    and records delay = departure - arrival + 1.
    """
    n_users = len(users)
    n_bs = len(bss)
    if n_users == 0:
        raise ValueError("cannot simulate an empty user pattern")
    if not horizon > warmup >= 0:
        raise ValueError("need horizon > warmup >= 0")
    rates = np.asarray(rates, dtype=float)
    if rates.shape != (n_users,):
        raise ValueError("rates must give one Bernoulli parameter per user")
    if np.any((rates < 0) | (rates > 1)):
        raise ValueError("rates must lie in [0, 1]")

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    arrivals_ss, sched_ss, fading_ss = ss.spawn(3)
    seed_value = int(ss.entropy) if isinstance(ss.entropy, int) else -1

    stream_seeds = arrivals_ss.generate_state(n_users, dtype=np.uint64)
    arrived = np.empty((n_users, horizon), dtype=bool)
    for u in range(n_users):
        arrived[u] = ArrivalStream(rate=float(rates[u]), seed=int(stream_seeds[u])).arrivals(
            0, horizon
        )
    cum_arrivals = np.cumsum(arrived, axis=1, dtype=np.int32)
    arrival_slots = [np.flatnonzero(arrived[u]) for u in range(n_users)]
    del arrived

    pathloss = bss.window.distance_sq(users.points, bss.points) ** (-0.5 * alpha)

    live_bs = np.array([j for j in range(n_bs) if len(assoc.cell_members[j])], dtype=int)
    counts = np.array([len(assoc.cell_members[j]) for j in live_bs], dtype=int)
    offsets = np.concatenate(([0], np.cumsum(counts)))[:-1]
    members_flat = (
        np.concatenate([assoc.cell_members[j] for j in live_bs])
        if len(live_bs)
        else np.empty(0, dtype=int)
    )

    sched_rng = np.random.default_rng(sched_ss)
    fading_rng = np.random.default_rng(fading_ss)

    departed = np.zeros(n_users, dtype=np.int64)
    grid = np.unique(np.linspace(0, horizon - 1, min(_TRACE_GRID, horizon)).astype(int))
    grid_set = {int(g): i for i, g in enumerate(grid)}
    traces = np.zeros((n_users, len(grid)), dtype=np.int64)

    busy_bs_slots = 0
    attempts = 0
    successes = 0
    delay_sum = 0.0
    delay_count = 0
    delay_values: list[float] = []
    delay_users: list[int] = []
    departure_log: list[tuple[int, int, int]] = []

    for t in range(horizon):
        if len(live_bs):
            draw = sched_rng.random(len(live_bs))
            if active_only:
                # chosen aligns with live_bs; -1 marks a station with no backlog
                chosen = _choose_backlogged(
                    draw, counts, offsets, members_flat, cum_arrivals[:, t], departed
                )
                act = chosen >= 0
            else:
                chosen = members_flat[offsets + (draw * counts).astype(int)]
                act = (cum_arrivals[chosen, t] - departed[chosen]) > 0
            served_users = chosen[act]
        else:
            act = np.empty(0, dtype=bool)
            served_users = np.empty(0, dtype=int)

        n_act = len(served_users)
        if n_act:
            if interference and n_act > 1:
                station_of = live_bs[act]
                link = fading_rng.standard_exponential((n_act, n_act)) * pathloss[
                    np.ix_(served_users, station_of)
                ]
                own = np.diagonal(link)
                total = link.sum(axis=1)
                ok = own > theta * (total - own)
            else:
                ok = np.ones(n_act, dtype=bool)
            for u in served_users[ok]:
                a_slot = int(arrival_slots[u][departed[u]])
                departed[u] += 1
                if a_slot >= warmup:
                    delay = t - a_slot + 1
                    delay_sum += delay
                    delay_count += 1
                    if detail:
                        delay_values.append(delay)
                        delay_users.append(int(u))
                if detail:
                    departure_log.append((int(u), a_slot, t))
            if t >= warmup:
                busy_bs_slots += n_act
                attempts += n_act
                successes += int(np.count_nonzero(ok))

        gi = grid_set.get(t)
        if gi is not None:
            traces[:, gi] = cum_arrivals[:, t] - departed

    observed = horizon - warmup
    busy_prob = busy_bs_slots / (n_bs * observed) if n_bs else 0.0
    success_prob = successes / attempts if attempts else 0.0
    mean_delay = delay_sum / delay_count if delay_count else float("nan")
    unstable_fraction = _drift_fraction(traces, grid, slope_eps)

    report = MetricsReport(
        empirical_busy_prob=busy_prob,
        empirical_success_prob=success_prob,
        per_user_mean_delay=mean_delay,
        delay_samples=delay_count,
        unstable_fraction=unstable_fraction,
        clamped_rate_fraction=clamped_rate_fraction,
        seed=seed_value,
        horizon=horizon,
        warmup=warmup,
    )
    if not detail:
        return report
    trace = NetworkTrace(
        trace_slots=grid,
        queue_lengths=traces,
        arrivals=cum_arrivals[:, -1].astype(np.int64),
        departures=departed.copy(),
        delay_values=np.asarray(delay_values, dtype=float),
        delay_users=np.asarray(delay_users, dtype=int),
        departure_log=departure_log,
    )
    return report, trace


def _choose_backlogged(
    draw: np.ndarray,
    counts: np.ndarray,
    offsets: np.ndarray,
    members_flat: np.ndarray,
    cum_now: np.ndarray,
    departed: np.ndarray,
) -> np.ndarray:
    """Per station, draw uniformly among its backlogged users (sensitivity mode).

    Returns one entry per station with members, -1 where none are backlogged.
    """
    chosen = np.full(len(counts), -1, dtype=int)
    backlogged = (cum_now - departed) > 0
    for i in range(len(counts)):
        members = members_flat[offsets[i]:offsets[i] + counts[i]]
        pool = members[backlogged[members]]
        if len(pool):
            chosen[i] = pool[int(draw[i] * len(pool))]
    return chosen


def run_coupled(
    params: NetworkParameters,
    dist: ArrivalRateDistribution,
    horizon: int,
    warmup: int,
    seed: int,
    mean_bss: float = 100.0,
    interference: bool = True,
    active_only: bool = False,
    slope_eps: float = 1e-3,
    detail: bool = False,
):
    """Sample a network and run the coupled dynamics on it.

    Stations form a uniform scatter; users follow `params.pcp` when present,
    a uniform scatter otherwise, and associate to their nearest station.
    Each user gets an i.i.d. rate draw, clamped into [0, 1] with the clamp
    frequency recorded in the report.
    """
    if not horizon > warmup >= 0:
        raise ValueError("need horizon > warmup >= 0")
    side = math.sqrt(mean_bss / params.lambda_b)
    window = Window(side, side, TOROIDAL)
    ss = np.random.SeedSequence(seed)
    bs_ss, user_ss, rate_ss, net_ss = ss.spawn(4)
    bss = sample_ppp(params.lambda_b, window, bs_ss)
    if len(bss) == 0:
        raise RuntimeError("station sample came up empty; increase mean_bss")
    if params.pcp is not None:
        users = sample_pcp(params.pcp, window, user_ss)
    else:
        users = sample_ppp(params.lambda_u, window, user_ss)
    if len(users) == 0:
        raise ValueError("user sample came up empty; increase mean_bss or lambda_u")
    assoc = associate(users, bss, PER_USER)

    raw = np.atleast_1d(dist.sample(np.random.default_rng(rate_ss), len(users)))
    rates = np.clip(raw, 0.0, 1.0)
    clamped = float(np.mean(raw != rates))

    result = simulate_network(
        bss,
        users,
        assoc,
        rates,
        params.theta,
        params.alpha,
        horizon,
        warmup,
        net_ss,
        interference=interference,
        active_only=active_only,
        slope_eps=slope_eps,
        clamped_rate_fraction=clamped,
        detail=detail,
    )
    if detail:
        report, trace = result
        return _with_seed(report, seed), trace
    return _with_seed(result, seed)


def _with_seed(report: MetricsReport, seed: int) -> MetricsReport:
    return replace(report, seed=seed)


def estimate_total_arrival_variance(
    params: NetworkParameters,
    dist: ArrivalRateDistribution,
    replications: int,
    seed: int,
    cell: str = CELL_TYPICAL,
    association: str | None = None,
    mean_bss: float = 100.0,
    return_samples: bool = False,
):
    """Mean and variance of the summed arrival rate over one cell.

    Each replication samples fresh stations and users, picks a cell
    (a uniformly chosen station by default, or the one covering the window
    center), and sums raw (unclamped) rate draws of the users it serves.
    Clustered users follow their parent's nearest station by default, which
    matches how the closed-form variance counts whole clusters per cell.
    Picking among the finite station count inflates the estimate by roughly
    1/mean_bss, so raise `mean_bss` when chasing percent-level agreement.
    """
    if replications < 1_000:
        raise ValueError("need at least 1000 replications")
    if cell not in (CELL_TYPICAL, CELL_CENTER):
        raise ValueError(f"unknown cell selection {cell!r}")
    clustered = params.pcp is not None
    if association is None:
        association = PER_CLUSTER if clustered else PER_USER
    side = math.sqrt(mean_bss / params.lambda_b)
    window = Window(side, side, TOROIDAL)
    if clustered and 2.0 * params.pcp.r_c >= side:
        raise ValueError("cluster radius too large for the window; raise mean_bss")

    totals = np.empty(replications)
    children = np.random.SeedSequence(seed).spawn(replications)
    for r, child in enumerate(children):
        bs_ss, user_ss, aux_ss = child.spawn(3)
        bss = sample_ppp(params.lambda_b, window, bs_ss)
        if len(bss) == 0:
            raise RuntimeError("station sample came up empty; increase mean_bss")
        if clustered:
            users = sample_pcp(params.pcp, window, user_ss)
        else:
            users = sample_ppp(params.lambda_u, window, user_ss)
        rng = np.random.default_rng(aux_ss)
        if cell == CELL_TYPICAL:
            target = int(rng.integers(len(bss)))
        else:
            target = int(
                np.argmin(window.distance_sq(window.center[None, :], bss.points)[0])
            )
        if len(users) == 0:
            totals[r] = 0.0
            continue
        serving = associate(users, bss, association).serving_bs
        members = np.flatnonzero(serving == target)
        draws = np.atleast_1d(dist.sample(rng, len(users)))
        totals[r] = float(draws[members].sum())
    mean = float(totals.mean())
    variance = float(totals.var(ddof=1))
    if return_samples:
        return mean, variance, totals
    return mean, variance
