"""Experiment configs, parameter sweeps, and analytic-vs-simulated comparison.

Configs are flat INI-style files (sections of key = value); every run is
fully determined by the config plus its seed.  Sweep output is CSV with one
metric per row: sweep_var,value,metric,estimate,stderr,source.  Unstable
delays are rendered as the literal token `unstable`.
"""
from __future__ import annotations

import configparser
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import analytics, simulator
from .analytics import PCP, PPP, NetworkParameters
from .geometry import PcpParams
from .traffic import DETERMINISTIC, ArrivalRateDistribution

ENGINE_ANALYTIC = "analytic"
ENGINE_COUPLED = "coupled"
ENGINE_STATIC_SIR = "static-sir"
ENGINE_ARRIVAL_VARIANCE = "arrival-variance"
ENGINE_DELAY_ORACLE = "delay-oracle"

_ENGINES = (
    ENGINE_ANALYTIC,
    ENGINE_COUPLED,
    ENGINE_STATIC_SIR,
    ENGINE_ARRIVAL_VARIANCE,
    ENGINE_DELAY_ORACLE,
)

_SWEEP_VARS = (
    "lambda_u",
    "theta",
    "theta_db",
    "xi0",
    "n_users",
    "alpha",
    "q",
    "k",
    "cell_area",
)

OUTPUT_DIR_ENV = "SPATQ_OUTPUT_DIR"
CSV_COLUMNS = ("sweep_var", "value", "metric", "estimate", "stderr", "source")
UNSTABLE_TOKEN = "unstable"

ANALYTIC_METRICS = (
    "busy_prob",
    "success_prob",
    "achievable_rate",
    "service_rate",
    "delay",
    "unstable_prob",
    "arrival_mean",
    "arrival_variance",
    "static_sir_success",
    "pmf_ppp",
    "pmf_pcp",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep scenario: model parameters, grid, and simulation controls."""

    name: str
    engine: str
    model: str
    metrics: tuple[str, ...]
    sweep_var: str
    grid: tuple[float, ...]
    seed: int
    lambda_b: float = 1.0
    lambda_u: float = 1.0
    theta: float = 10.0
    alpha: float = 4.0
    n_users: float = 1.0
    xi0: float | None = None
    cell_area: float = 1.0
    beta: float | None = None
    p_b: float = 1.0  # transmit power; cancels in SIR but stays configurable
    pcp_r_c: float | None = None
    pcp_lambda_p: float | None = None
    pcp_lambda_p_factor: float | None = None
    pcp_lambda_c: float | None = None
    pcp_lambda_c_factor: float | None = None
    dist: ArrivalRateDistribution = ArrivalRateDistribution.deterministic(0.0)
    horizon: int = 20_000
    warmup: int = 4_000
    replications: int = 1
    samples: int = 1_000_000
    q: float | None = None
    mean_bss: float = 100.0
    workers: int = 1
    output_dir: str = "."

    def __post_init__(self):
        if self.engine not in _ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.model not in (PPP, PCP):
            raise ValueError(f"unknown population model {self.model!r}")
        if self.sweep_var not in _SWEEP_VARS:
            raise ValueError(
                f"unknown sweep variable {self.sweep_var!r}; expected one of {_SWEEP_VARS}"
            )
        if not self.grid:
            raise ValueError("sweep grid must not be empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        if self.engine == ENGINE_ANALYTIC and not self.metrics:
            raise ValueError("analytic sweeps must list at least one metric")
        unknown = set(self.metrics) - set(ANALYTIC_METRICS)
        if self.engine == ENGINE_ANALYTIC and unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    """One CSV record; estimate None encodes an unstable delay."""

    sweep_var: str
    value: float
    metric: str
    estimate: float | None
    stderr: float
    source: str


@dataclass(frozen=True)
class CompareRow:
    sweep_var: str
    value: float
    metric: str
    analytic: float | None
    simulated: float | None
    stderr: float
    rel_gap: float
    tolerance: float | None
    informational: bool
    ok: bool


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[CompareRow, ...]
    passed: bool

    def summary(self) -> str:
        lines = []
        for row in self.rows:
            status = "PASS" if row.ok else ("INFO" if row.informational else "FAIL")
            tol = "-" if row.tolerance is None else f"{row.tolerance:g}"
            lines.append(
                f"{status} {row.metric}@{row.sweep_var}={row.value:g}: "
                f"analytic={_fmt_estimate(row.analytic)} simulated={_fmt_estimate(row.simulated)} "
                f"rel_gap={row.rel_gap:.4g} tol={tol}"
            )
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"overall: {verdict} ({len(self.rows)} rows)")
        return "\n".join(lines) + "\n"


def _fmt_estimate(value: float | None) -> str:
    return UNSTABLE_TOKEN if value is None else f"{value:.17g}"


def write_rows(path, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(
                f"{row.sweep_var},{row.value:.17g},{row.metric},"
                f"{_fmt_estimate(row.estimate)},{row.stderr:.17g},{row.source}\n"
            )
    return path


def read_rows(path) -> list[SweepRow]:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != ",".join(CSV_COLUMNS):
            raise ValueError(f"unexpected CSV header {header!r} in {path}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            sweep_var, value, metric, estimate, stderr, source = line.split(",")
            rows.append(
                SweepRow(
                    sweep_var=sweep_var,
                    value=float(value),
                    metric=metric,
                    estimate=None if estimate == UNSTABLE_TOKEN else float(estimate),
                    stderr=float(stderr),
                    source=source,
                )
            )
    return rows


@dataclass(frozen=True)
class _Point:
    """Config values resolved at one grid point."""

    lambda_u: float
    theta: float
    alpha: float
    n_users: float
    xi0: float | None
    cell_area: float
    q: float | None
    k: int | None
    pcp: PcpParams | None
    dist: ArrivalRateDistribution


def _resolve_point(config: ExperimentConfig, value: float) -> _Point:
    fields = {
        "lambda_u": config.lambda_u,
        "theta": config.theta,
        "alpha": config.alpha,
        "n_users": config.n_users,
        "xi0": config.xi0,
        "cell_area": config.cell_area,
        "q": config.q,
    }
    k = None
    if config.sweep_var == "theta_db":
        fields["theta"] = 10.0 ** (value / 10.0)
    elif config.sweep_var == "k":
        if value < 0 or value != int(value):
            raise ValueError("k sweep values must be nonnegative integers")
        k = int(value)
    else:
        fields[config.sweep_var] = value

    dist = config.dist
    if config.sweep_var == "xi0" and dist.kind == DETERMINISTIC:
        dist = ArrivalRateDistribution.deterministic(fields["xi0"])
    if fields["xi0"] is None and dist.kind == DETERMINISTIC:
        fields["xi0"] = dist.param

    pcp = None
    if config.model == PCP:
        if config.pcp_r_c is None:
            raise ValueError("pcp model requires pcp_r_c")
        lam_c = config.pcp_lambda_c
        if lam_c is None:
            if config.pcp_lambda_c_factor is None:
                raise ValueError("pcp model needs pcp_lambda_c or pcp_lambda_c_factor")
            lam_c = config.pcp_lambda_c_factor * fields["lambda_u"]
        lam_p = config.pcp_lambda_p
        if lam_p is None:
            if config.pcp_lambda_p_factor is None:
                # close the product so the implied user intensity matches
                lam_p = fields["lambda_u"] / (math.pi * config.pcp_r_c**2 * lam_c)
            else:
                lam_p = config.pcp_lambda_p_factor * fields["lambda_u"]
        pcp = PcpParams(lambda_p=lam_p, lambda_c=lam_c, r_c=config.pcp_r_c)

    return _Point(
        lambda_u=fields["lambda_u"],
        theta=fields["theta"],
        alpha=fields["alpha"],
        n_users=fields["n_users"],
        xi0=fields["xi0"],
        cell_area=fields["cell_area"],
        q=fields["q"],
        k=k,
        pcp=pcp,
        dist=dist,
    )


def _network_params(config: ExperimentConfig, point: _Point) -> NetworkParameters:
    return NetworkParameters(
        lambda_b=config.lambda_b,
        lambda_u=point.lambda_u,
        theta=point.theta,
        alpha=point.alpha,
        p_b=config.p_b,
        beta=config.beta,
        pcp=point.pcp if config.model == PCP else None,
    )


def _require(value, what: str):
    if value is None:
        raise ValueError(f"metric requires {what}, which the config does not define")
    return value


def _analytic_value(metric: str, config: ExperimentConfig, point: _Point) -> float | None:
    n = point.n_users
    if metric == "busy_prob":
        return analytics.solve_busy_probability(
            n, _require(point.xi0, "xi0"), point.theta, point.alpha
        )
    if metric == "success_prob":
        return analytics.approx_success_probability(
            n, _require(point.xi0, "xi0"), point.theta, point.alpha
        )
    if metric == "achievable_rate":
        return analytics.achievable_rate(
            n, _require(point.xi0, "xi0"), point.theta, point.alpha
        )
    if metric == "service_rate":
        return analytics.service_rate(
            n, _require(point.xi0, "xi0"), point.theta, point.alpha
        )
    if metric == "delay":
        result = analytics.mean_delay(
            n, _require(point.xi0, "xi0"), point.theta, point.alpha
        )
        return result.value
    if metric == "unstable_prob":
        return analytics.unstable_probability(
            point.dist, config.model, _network_params(config, point), point.cell_area
        )
    if metric == "arrival_mean":
        return analytics.total_arrival_moments(
            point.dist, _network_params(config, point), config.model
        )[0]
    if metric == "arrival_variance":
        return analytics.total_arrival_moments(
            point.dist, _network_params(config, point), config.model
        )[1]
    if metric == "static_sir_success":
        return analytics.success_probability(
            _require(point.q, "q"), point.theta, point.alpha
        )
    if metric == "pmf_ppp":
        return analytics.pmf_users_ppp(
            _require(point.k, "a k sweep"), point.lambda_u, point.cell_area
        )
    if metric == "pmf_pcp":
        return analytics.pmf_users_pcp(
            _require(point.k, "a k sweep"), _require(point.pcp, "pcp parameters"),
            point.cell_area,
        )
    raise ValueError(f"unknown analytic metric {metric!r}")


def run_analytic_sweep(config: ExperimentConfig, output_dir=None) -> Path:
    """Evaluate the configured closed-form metrics over the grid; write CSV."""
    rows = []
    for value in config.grid:
        point = _resolve_point(config, value)
        for metric in config.metrics:
            estimate = _analytic_value(metric, config, point)
            rows.append(
                SweepRow(config.sweep_var, value, metric, estimate, 0.0, "analytic")
            )
    out = _output_path(config, output_dir, "analytic")
    return write_rows(out, rows)


def _simulate_point(config: ExperimentConfig, value: float) -> list[SweepRow]:
    point = _resolve_point(config, value)
    rows: list[SweepRow] = []

    def add(metric: str, estimate: float | None, stderr: float):
        rows.append(
            SweepRow(config.sweep_var, value, metric, estimate, stderr, "simulation")
        )

    if config.engine == ENGINE_COUPLED:
        reports = [
            simulator.run_coupled(
                _network_params(config, point),
                point.dist,
                config.horizon,
                config.warmup,
                seed=config.seed + i,
                mean_bss=config.mean_bss,
            )
            for i in range(config.replications)
        ]
        for metric, attr in (
            ("busy_prob", "empirical_busy_prob"),
            ("success_prob", "empirical_success_prob"),
            ("delay", "per_user_mean_delay"),
            ("unstable_fraction", "unstable_fraction"),
        ):
            vals = np.array([getattr(r, attr) for r in reports], dtype=float)
            add(metric, float(np.mean(vals)), _stderr(vals))
    elif config.engine == ENGINE_STATIC_SIR:
        estimates = []
        stderrs = []
        for i in range(config.replications):
            est, se = simulator.run_sir_static(
                _network_params(config, point),
                _require(point.q, "q"),
                config.samples,
                seed=config.seed + i,
                mean_bss=config.mean_bss,
            )
            estimates.append(est)
            stderrs.append(se)
        est = np.array(estimates)
        se = _stderr(est) if len(est) > 1 else stderrs[0]
        add("static_sir_success", float(est.mean()), se)
    elif config.engine == ENGINE_ARRIVAL_VARIANCE:
        mean, variance, samples = simulator.estimate_total_arrival_variance(
            _network_params(config, point),
            point.dist,
            config.replications,
            seed=config.seed,
            mean_bss=config.mean_bss,
            return_samples=True,
        )
        n = len(samples)
        add("arrival_mean", mean, float(samples.std(ddof=1) / math.sqrt(n)))
        centered = samples - samples.mean()
        m4 = float(np.mean(centered**4))
        var_of_var = max(m4 - (n - 3) / (n - 1) * variance**2, 0.0) / n
        add("arrival_variance", variance, math.sqrt(var_of_var))
    elif config.engine == ENGINE_DELAY_ORACLE:
        xi0 = _require(point.xi0, "xi0")
        mu = analytics.service_rate(point.n_users, xi0, point.theta, point.alpha)
        values = [
            simulator.run_delay_oracle(
                point.n_users, xi0, mu, config.horizon, seed=config.seed + i
            )
            for i in range(config.replications)
        ]
        if any(v.unstable for v in values):
            add("delay", None, 0.0)
        else:
            vals = np.array([v.value for v in values])
            add("delay", float(vals.mean()), _stderr(vals))
    else:
        raise ValueError(f"engine {config.engine!r} is not a simulation engine")
    return rows


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(len(values)))


def run_simulation_sweep(config: ExperimentConfig, output_dir=None) -> Path:
    """Run the configured Monte Carlo engine over the grid; write CSV.

    Replication i uses seed_i = seed + i, so output is deterministic and grid
    points may be dispatched to worker processes without changing results.
    """
    if config.workers > 1 and len(config.grid) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_simulate_point, [config] * len(config.grid), config.grid))
    else:
        chunks = [_simulate_point(config, value) for value in config.grid]
    rows = [row for chunk in chunks for row in chunk]
    out = _output_path(config, output_dir, "simulated")
    return write_rows(out, rows)


def _output_path(config: ExperimentConfig, output_dir, kind: str) -> Path:
    base = output_dir if output_dir is not None else config.output_dir
    return Path(base) / f"{config.name}_{kind}.csv"


def parse_tolerances(spec: str) -> dict[str, tuple[float, bool]]:
    """Parse `metric:tol[:informational],...` into {metric: (tol, informational)}."""
    out: dict[str, tuple[float, bool]] = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) == 2:
            out[parts[0]] = (float(parts[1]), False)
        elif len(parts) == 3 and parts[2] == "informational":
            out[parts[0]] = (float(parts[1]), True)
        else:
            raise ValueError(f"bad tolerance entry {item!r}")
    return out


def compare(
    analytic_csv,
    simulated_csv,
    tolerances: dict[str, tuple[float, bool]],
    output_path=None,
) -> ComparisonReport:
    """Join two sweep CSVs row-by-row and check relative gaps against tolerances.

    Metrics without a tolerance entry are reported informationally.  Grids
    must match exactly; mismatches raise with the offending rows listed.
    """
    analytic = {(r.value, r.metric): r for r in read_rows(analytic_csv)}
    simulated = {(r.value, r.metric): r for r in read_rows(simulated_csv)}
    shared = sorted(set(analytic) & set(simulated))
    compared_metrics = {m for _, m in shared}
    missing = [
        key
        for key in sorted(set(analytic) ^ set(simulated))
        if key[1] in compared_metrics
    ]
    if missing:
        raise ValueError(f"sweep grids do not match; unpaired rows: {missing}")
    if not shared:
        raise ValueError("no common (value, metric) rows to compare")

    rows = []
    passed = True
    for value, metric in shared:
        a = analytic[(value, metric)]
        s = simulated[(value, metric)]
        if (a.estimate is None) or (s.estimate is None):
            gap = 0.0 if a.estimate == s.estimate else math.inf
        else:
            gap = abs(a.estimate - s.estimate) / max(abs(a.estimate), 1e-300)
        tol_entry = tolerances.get(metric)
        tol, informational = tol_entry if tol_entry else (None, True)
        ok = gap <= tol if tol is not None else True
        if not ok and not informational:
            passed = False
        rows.append(
            CompareRow(
                sweep_var=a.sweep_var,
                value=value,
                metric=metric,
                analytic=a.estimate,
                simulated=s.estimate,
                stderr=s.stderr,
                rel_gap=gap,
                tolerance=tol,
                informational=informational,
                ok=ok or informational,
            )
        )
    report = ComparisonReport(rows=tuple(rows), passed=passed)
    if output_path is not None:
        _write_comparison(report, output_path)
    return report


def _write_comparison(report: ComparisonReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            "sweep_var,value,metric,analytic,simulated,stderr,rel_gap,tolerance,"
            "informational,ok\n"
        )
        for r in report.rows:
            tol = "" if r.tolerance is None else f"{r.tolerance:.17g}"
            fh.write(
                f"{r.sweep_var},{r.value:.17g},{r.metric},{_fmt_estimate(r.analytic)},"
                f"{_fmt_estimate(r.simulated)},{r.stderr:.17g},{r.rel_gap:.17g},{tol},"
                f"{int(r.informational)},{int(r.ok)}\n"
            )
    return path


# --- config file handling ---------------------------------------------------

_INT_KEYS = {"horizon", "warmup", "replications", "samples", "seed", "workers"}
_STR_KEYS = {"name", "engine", "model", "metrics", "distribution", "variable", "directory"}


def load_config(path=None, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Load an ExperimentConfig from an INI-style file plus key overrides.

    Overrides use `section.key` form and take precedence over file values.
    The SIR threshold may be given as `theta` (linear) or `theta_db`.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if path is not None:
        read = cp.read(path)
        if not read:
            raise ValueError(f"config file {path!r} not found or unreadable")
    overrides = overrides or {}
    for dotted, value in overrides.items():
        if "." not in dotted:
            raise ValueError(f"override {dotted!r} must look like section.key")
        section, key = dotted.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)
    # an explicit threshold override displaces the file's other spelling
    if "network.theta_db" in overrides and "network.theta" not in overrides:
        cp.remove_option("network", "theta")
    if "network.theta" in overrides and "network.theta_db" not in overrides:
        cp.remove_option("network", "theta_db")
    # blank values (e.g. --set sweep.start=) drop the option entirely
    for section in cp.sections():
        for key, value in list(cp.items(section)):
            if value.strip() == "":
                cp.remove_option(section, key)

    def get(section: str, key: str, default=None):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key).strip()
        try:
            if key in _STR_KEYS:
                return raw
            if key in _INT_KEYS:
                return int(raw)
            return float(raw)
        except ValueError as exc:
            raise ValueError(f"config [{section}] {key} = {raw!r}: {exc}") from None

    name = get("scenario", "name")
    if not name:
        raise ValueError("config must set [scenario] name")
    seed = get("simulation", "seed")
    if seed is None:
        raise ValueError("config must set [simulation] seed")

    theta = get("network", "theta")
    theta_db = get("network", "theta_db")
    if theta is not None and theta_db is not None:
        raise ValueError("set either [network] theta or theta_db, not both")
    if theta_db is not None:
        theta = 10.0 ** (theta_db / 10.0)
    if theta is None:
        theta = 10.0

    grid = _parse_grid(cp)
    metrics_raw = get("scenario", "metrics", "")
    metrics = tuple(m.strip() for m in metrics_raw.split(",") if m.strip())
    dist_spec = get("traffic", "distribution")
    dist = (
        ArrivalRateDistribution.parse(dist_spec)
        if dist_spec
        else ArrivalRateDistribution.deterministic(0.0)
    )
    out_dir = get("output", "directory") or os.environ.get(OUTPUT_DIR_ENV, ".")

    try:
        return ExperimentConfig(
            name=name,
            engine=get("scenario", "engine", ENGINE_ANALYTIC),
            model=get("scenario", "model", PPP),
            metrics=metrics,
            sweep_var=get("sweep", "variable", ""),
            grid=grid,
            seed=seed,
            lambda_b=get("network", "lambda_b", 1.0),
            lambda_u=get("network", "lambda_u", 1.0),
            theta=theta,
            alpha=get("network", "alpha", 4.0),
            n_users=get("network", "n_users", 1.0),
            xi0=get("network", "xi0"),
            cell_area=get("network", "cell_area", 1.0),
            beta=get("network", "beta"),
            p_b=get("network", "p_b", 1.0),
            pcp_r_c=get("network", "pcp_r_c"),
            pcp_lambda_p=get("network", "pcp_lambda_p"),
            pcp_lambda_p_factor=get("network", "pcp_lambda_p_factor"),
            pcp_lambda_c=get("network", "pcp_lambda_c"),
            pcp_lambda_c_factor=get("network", "pcp_lambda_c_factor"),
            dist=dist,
            horizon=get("simulation", "horizon", 20_000),
            warmup=get("simulation", "warmup", 4_000),
            replications=get("simulation", "replications", 1),
            samples=get("simulation", "samples", 1_000_000),
            q=get("simulation", "q"),
            mean_bss=get("simulation", "mean_bss", 100.0),
            workers=get("simulation", "workers", 1),
            output_dir=out_dir,
        )
    except ValueError as exc:
        raise ValueError(f"invalid config {path!r}: {exc}") from None


def _parse_grid(cp: configparser.ConfigParser) -> tuple[float, ...]:
    if cp.has_option("sweep", "grid"):
        raw = cp.get("sweep", "grid")
        try:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError:
            raise ValueError(f"config [sweep] grid = {raw!r} is not a number list") from None
    if cp.has_option("sweep", "start"):
        start = cp.getfloat("sweep", "start")
        stop = cp.getfloat("sweep", "stop")
        num = cp.getint("sweep", "num")
        scale = cp.get("sweep", "scale", fallback="linear")
        if scale == "linear":
            return tuple(np.linspace(start, stop, num))
        if scale == "log":
            return tuple(np.geomspace(start, stop, num))
        raise ValueError(f"config [sweep] scale = {scale!r} must be linear or log")
    raise ValueError("config must define [sweep] grid or start/stop/num")


# --- canned figure scenarios -------------------------------------------------

FIGURES = {
    "fig3": ("fig3_pmf_ppp", "fig3_pmf_pcp"),
    "fig6": ("fig6_variance_ppp", "fig6_variance_pcp"),
    "fig7": ("fig7_rate_a3", "fig7_rate_a4"),
    "fig8": ("fig8_pus_exp_ppp_a25", "fig8_pus_exp_ppp_a4",
             "fig8_pus_exp_pcp_a25", "fig8_pus_exp_pcp_a4"),
    "fig9": ("fig9_pus_unif_ppp_a25", "fig9_pus_unif_ppp_a4",
             "fig9_pus_unif_pcp_a25", "fig9_pus_unif_pcp_a4"),
    "fig10": ("fig10_pus_pcp1_exp", "fig10_pus_pcp2_exp",
              "fig10_pus_pcp1_unif", "fig10_pus_pcp2_unif"),
    "fig11": ("fig11_delay_a25", "fig11_delay_a3", "fig11_delay_a4"),
}


def load_canned_config(scenario: str, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    ref = resources.files("spatq.configs").joinpath(f"{scenario}.cfg")
    with resources.as_file(ref) as path:
        return load_config(path, overrides)


def reproduce(figure: str, output_dir=None, simulate: bool = False) -> list[Path]:
    """Write the canned sweep CSVs for one figure; returns the paths.

    Analytic curves are always produced; `simulate` adds the Monte Carlo
    counterpart for scenarios that define a simulation engine.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    paths = []
    for scenario in FIGURES[figure]:
        config = load_canned_config(scenario)
        paths.append(run_analytic_sweep(config, output_dir))
        if simulate and config.engine != ENGINE_ANALYTIC:
            paths.append(run_simulation_sweep(config, output_dir))
    return paths
