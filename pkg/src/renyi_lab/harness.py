"""Randomized verification campaigns.

Each runner samples seeded random instances, evaluates one structural claim
about the divergence machinery on every instance, and folds the outcomes
into a :class:`CampaignReport`.  Inequality checks use an extended-real
margin convention:

* both sides infinite: the comparison is vacuous and counted as skipped;
* only the dominating side infinite: satisfied with infinite margin;
* only the dominated side infinite: an infinite violation (instant fail);
* both finite: the margin must not drop below ``-tolerance``.

Reports are plain data and serialize to JSON with sorted keys, so a rerun
with the same config is byte-identical apart from the wall-time field.
Set ``RENYI_LAB_THREADS`` to parallelize trial evaluation; the reduction is
order-preserving, so the thread count never changes results.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import QuantumChannel, _haar_from_rng, _random_channel_from_rng, apply_channel
from .divergence import DivergencePair, d_alpha, d_prime_alpha, q_alpha
from .linalg import clamped_psd, matrix_power, mix
from .rng import ginibre, stream
from .variational import (
    EQUALITY_RTOL,
    YOUNG_SLACK,
    TracePowerInstance,
    VariationalInstance,
    inf_representation_check,
    positive_definite,
    random_psd_operator,
    trace_power_functional,
    two_variable_form,
    verify_variational,
    young_trace_check,
)

DEFAULT_TOL = 1e-9
SIGMA_MIX_WEIGHTS = (0.0, 1e-3)
MIX_WEIGHTS = (0.25, 0.5, 0.75)
PQ_GRID = ((0.5, 1.0), (-1.0, 1.0), (1.0, 1.0), (-0.5, 1.0), (0.3, 0.5), (-0.3, 0.5), (-0.7, 0.8))
EQ3_P_GRID = (-1.0, -0.5)
YOUNG_P_GRID = (1.5, 2.0, 3.0)


def thread_count() -> int:
    """Worker threads for campaign trial evaluation (RENYI_LAB_THREADS, default 1)."""
    raw = os.environ.get("RENYI_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"RENYI_LAB_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _map_trials(worker, tasks):
    n = thread_count()
    if n <= 1:
        return [worker(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(worker, tasks))


def order_label(order: float) -> str:
    a = float(order)
    return "inf" if math.isinf(a) else f"{a:g}"


@dataclass(frozen=True)
class CampaignConfig:
    """Shared knobs for every campaign runner."""

    dims: tuple[int, ...] = (2, 3, 4)
    alphas: tuple[float, ...] = (0.5, 0.75, 2.0, math.inf)
    trials: int = 100
    seed: int = 2024
    tolerance: float = DEFAULT_TOL
    normalize_sigma: bool = False
    output_path: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.dims or any(d < 2 for d in self.dims):
            raise ValueError(f"dims must all be at least 2, got {self.dims}")
        if not self.alphas or any(math.isnan(a) or a <= 0.0 for a in self.alphas):
            raise ValueError(f"orders must be positive, got {self.alphas}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")

    def echo(self) -> dict:
        return {
            "dims": list(self.dims),
            "alphas": [order_label(a) for a in self.alphas],
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "normalize_sigma": self.normalize_sigma,
        }


class _MarginStats:
    """Accumulates extended-real margins for one group of checks."""

    __slots__ = ("checks", "finite", "min_margin", "satisfied_infinite",
                 "skipped_infinite", "infinite_violations")

    def __init__(self) -> None:
        self.checks = 0
        self.finite = 0
        self.min_margin = math.inf
        self.satisfied_infinite = 0
        self.skipped_infinite = 0
        self.infinite_violations = 0

    def add(self, dominating: float, dominated: float) -> None:
        """Record one check of ``dominating >= dominated``."""
        self.checks += 1
        if math.isinf(dominating) and math.isinf(dominated):
            self.skipped_infinite += 1
        elif math.isinf(dominating):
            self.satisfied_infinite += 1
        elif math.isinf(dominated):
            self.infinite_violations += 1
        else:
            self.finite += 1
            self.min_margin = min(self.min_margin, dominating - dominated)

    @property
    def max_violation(self) -> float:
        if self.finite == 0:
            return 0.0
        return max(0.0, -self.min_margin)

    def to_dict(self) -> dict:
        return {
            "checks": self.checks,
            "finite": self.finite,
            "min_margin": self.min_margin if self.finite else None,
            "max_violation": self.max_violation,
            "satisfied_infinite": self.satisfied_infinite,
            "skipped_infinite": self.skipped_infinite,
            "infinite_violations": self.infinite_violations,
        }

    def passed(self, tolerance: float) -> bool:
        return self.infinite_violations == 0 and self.max_violation <= tolerance


def _json_safe(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


@dataclass
class CampaignReport:
    """Aggregated result of one verification campaign."""

    claim: str
    config: dict
    groups: dict = field(default_factory=dict)
    instances: int = 0
    max_violation: float = 0.0
    infinite_violations: int = 0
    passed: bool = True
    wall_time_s: float = 0.0

    def to_json_dict(self, include_wall_time: bool = True) -> dict:
        out = {
            "claim": self.claim,
            "config": _json_safe(self.config),
            "groups": _json_safe(self.groups),
            "instances": self.instances,
            "max_violation": _json_safe(self.max_violation),
            "infinite_violations": self.infinite_violations,
            "pass": self.passed,
        }
        if include_wall_time:
            out["wall_time_s"] = self.wall_time_s
        return out

    def json_str(self, include_wall_time: bool = True) -> str:
        return json.dumps(
            self.to_json_dict(include_wall_time), sort_keys=True, indent=2
        ) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.json_str())


def _finalize(report: CampaignReport, stats: dict[str, _MarginStats], tolerance: float,
              started: float) -> CampaignReport:
    report.groups = {label: s.to_dict() for label, s in stats.items()}
    report.instances = report.config["trials"] * len(report.config["dims"])
    report.max_violation = max((s.max_violation for s in stats.values()), default=0.0)
    report.infinite_violations = sum(s.infinite_violations for s in stats.values())
    report.passed = all(s.passed(tolerance) for s in stats.values())
    report.wall_time_s = time.monotonic() - started
    return report


def _sample_pair(rng: np.random.Generator, dim: int, normalize_sigma: bool) -> DivergencePair:
    w = ginibre(rng, dim)
    rho = w @ w.conj().T
    rho = rho / np.trace(rho).real
    v = ginibre(rng, dim)
    sigma = v @ v.conj().T
    eps = float(rng.choice(SIGMA_MIX_WEIGHTS))
    if normalize_sigma:
        sigma = sigma / np.trace(sigma).real
    if eps > 0.0:
        sigma = (1.0 - eps) * sigma + eps * (np.trace(sigma).real / dim) * np.eye(dim)
    return DivergencePair(clamped_psd(rho), clamped_psd(sigma))


def run_monotonicity(config: CampaignConfig) -> CampaignReport:
    """Data-processing check: D_a never increases under a random CPTP map.

    Valid for orders in [1/2, inf]; each trial draws a pair and a random
    channel (possibly with a different output dimension) and compares the
    divergence before and after.
    """
    for a in config.alphas:
        if a < 0.5:
            raise ValueError(
                f"monotonicity is only claimed for orders >= 1/2, got {order_label(a)}"
            )
    started = time.monotonic()
    stats = {order_label(a): _MarginStats() for a in config.alphas}

    def worker(task):
        dim, trial = task
        rng = stream(config.seed, dim, trial)
        pair = _sample_pair(rng, dim, config.normalize_sigma)
        dim_out = int(rng.integers(2, dim + 2))
        lo = max(1, -(-dim // dim_out))  # ceil(dim / dim_out)
        kraus_count = int(rng.integers(lo, dim * dim_out + 1))
        channel = _random_channel_from_rng(rng, dim, dim_out, kraus_count)
        image = DivergencePair(
            apply_channel(channel, pair.rho), apply_channel(channel, pair.sigma)
        )
        return [
            (order_label(a), d_alpha(pair, a), d_alpha(image, a))
            for a in config.alphas
        ]

    tasks = [(dim, t) for dim in config.dims for t in range(config.trials)]
    for outcomes in _map_trials(worker, tasks):
        for label, before, after in outcomes:
            stats[label].add(before, after)
    report = CampaignReport(claim="thm1", config=config.echo())
    return _finalize(report, stats, config.tolerance, started)


def run_joint_convexity(config: CampaignConfig) -> CampaignReport:
    """Midpoint convexity of (rho, sigma) -> D_a at fixed tr(rho), a in [1/2, 1].

    Draws two normalized pairs, mixes them at several weights, and requires
    the mixed divergence to stay below the mixed value (up to tolerance).
    """
    for a in config.alphas:
        if math.isinf(a) or not 0.5 <= a <= 1.0:
            raise ValueError(
                f"joint convexity is only claimed for orders in [1/2, 1], got {order_label(a)}"
            )
    started = time.monotonic()
    stats = {order_label(a): _MarginStats() for a in config.alphas}

    def worker(task):
        dim, trial = task
        rng = stream(config.seed, dim, trial)
        first = _sample_pair(rng, dim, config.normalize_sigma)
        second = _sample_pair(rng, dim, config.normalize_sigma)
        base = {
            order_label(a): (d_alpha(first, a), d_alpha(second, a))
            for a in config.alphas
        }
        outcomes = []
        for weight in MIX_WEIGHTS:
            mixed = DivergencePair(
                mix(first.rho, second.rho, weight),
                mix(first.sigma, second.sigma, weight),
            )
            for a in config.alphas:
                label = order_label(a)
                d_first, d_second = base[label]
                average = weight * d_first + (1.0 - weight) * d_second
                outcomes.append((label, average, d_alpha(mixed, a)))
        return outcomes

    tasks = [(dim, t) for dim in config.dims for t in range(config.trials)]
    for outcomes in _map_trials(worker, tasks):
        for label, average, mixed_value in outcomes:
            stats[label].add(average, mixed_value)
    report = CampaignReport(claim="thm2", config=config.echo())
    return _finalize(report, stats, config.tolerance, started)


def run_q_convexity(config: CampaignConfig) -> CampaignReport:
    """Midpoint curvature of (rho, sigma) -> Q_a on unnormalized PSD pairs.

    Jointly concave for orders in [1/2, 1), jointly convex above 1; no trace
    constraint.  The margin is oriented by the claimed curvature direction.
    """
    for a in config.alphas:
        if math.isinf(a) or a == 1.0 or a < 0.5:
            raise ValueError(
                "curvature of the trace functional is claimed for finite orders "
                f"in [1/2, 1) and (1, inf), got {order_label(a)}"
            )
    started = time.monotonic()
    stats = {order_label(a): _MarginStats() for a in config.alphas}

    def worker(task):
        dim, trial = task
        rng = stream(config.seed, dim, trial)
        rho_a = random_psd_operator(rng, dim, spread=0.5)
        sigma_a = random_psd_operator(rng, dim, spread=0.5)
        rho_b = random_psd_operator(rng, dim, spread=0.5)
        sigma_b = random_psd_operator(rng, dim, spread=0.5)
        pair_a = DivergencePair(rho_a, sigma_a)
        pair_b = DivergencePair(rho_b, sigma_b)
        base = {
            order_label(a): (q_alpha(pair_a, a), q_alpha(pair_b, a))
            for a in config.alphas
        }
        outcomes = []
        for weight in MIX_WEIGHTS:
            mixed = DivergencePair(
                mix(rho_a, rho_b, weight), mix(sigma_a, sigma_b, weight)
            )
            for a in config.alphas:
                label = order_label(a)
                q_first, q_second = base[label]
                average = weight * q_first + (1.0 - weight) * q_second
                mixed_value = q_alpha(mixed, a)
                if a < 1.0:
                    outcomes.append((label, mixed_value, average))
                else:
                    outcomes.append((label, average, mixed_value))
        return outcomes

    tasks = [(dim, t) for dim in config.dims for t in range(config.trials)]
    for outcomes in _map_trials(worker, tasks):
        for label, dominating, dominated in outcomes:
            stats[label].add(dominating, dominated)
    report = CampaignReport(claim="prop1", config=config.echo())
    return _finalize(report, stats, config.tolerance, started)


def run_variational_campaign(config: CampaignConfig, h_trials: int = 5) -> CampaignReport:
    """Legendre-type representation on strictly positive instances.

    For each instance the closed-form optimizer must reproduce Q_a within
    EQUALITY_RTOL, and ``h_trials`` random test operators per instance must
    stay on the correct side of the sup/inf.
    """
    for a in config.alphas:
        if math.isinf(a) or a == 1.0:
            raise ValueError(
                f"the variational representation needs finite orders != 1, got {order_label(a)}"
            )
    started = time.monotonic()
    stats = {order_label(a): _MarginStats() for a in config.alphas}
    gaps = {order_label(a): 0.0 for a in config.alphas}

    def worker(task):
        dim, trial = task
        rng = stream(config.seed, dim, trial)
        rho = positive_definite(rng, dim)
        sigma = positive_definite(rng, dim)
        child_seed = int(rng.integers(0, 2**63))
        out = []
        for a in config.alphas:
            instance = VariationalInstance(rho=rho, sigma=sigma, alpha=a)
            rep = verify_variational(instance, trials=h_trials, seed=child_seed)
            out.append((order_label(a), rep.optimizer_gap, rep.max_violation))
        return out

    tasks = [(dim, t) for dim in config.dims for t in range(config.trials)]
    for outcomes in _map_trials(worker, tasks):
        for label, gap, violation in outcomes:
            gaps[label] = max(gaps[label], gap)
            stats[label].add(0.0, violation)  # margin -violation must be >= -tol
    report = CampaignReport(claim="lemma1", config=config.echo())
    report = _finalize(report, stats, config.tolerance, started)
    for label, gap in gaps.items():
        report.groups[label]["optimizer_gap_max"] = gap
        report.groups[label]["h_trials"] = h_trials
    report.passed = report.passed and all(g <= EQUALITY_RTOL for g in gaps.values())
    return report


def _conditioned_contraction(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random matrix with singular values in [10^-0.5, 1].

    Negative matrix powers of B^dag A^p B amplify round-off by the square of
    B's condition number, so the negative-p campaigns draw B from this
    bounded-conditioning ensemble to keep functional values at O(1), where
    the absolute margin tolerance is meaningful.
    """
    left = _haar_from_rng(rng, dim)
    right = _haar_from_rng(rng, dim)
    singulars = 10.0 ** rng.uniform(-0.5, 0.0, size=dim)
    return (left * singulars) @ right.conj().T


def _unit_trace(operator):
    return clamped_psd(operator.mat / operator.trace())


def run_trace_power_campaign(
    config: CampaignConfig, pq_grid: tuple[tuple[float, float], ...] = PQ_GRID,
    inf_rep_trials: int = 3,
) -> CampaignReport:
    """Midpoint concavity of ``A -> tr (B^dag A^p B)^(q/p)`` over a (p, q) grid.

    Negative p additionally gets the inf-representation probed: equality at
    the closed-form minimizer plus random X draws on the correct side.
    Negative-p draws normalize tr A = 1 and bound B's conditioning; the
    functional is homogeneous in both, so this only fixes the round-off
    scale, not the shape of the claim.
    """
    started = time.monotonic()
    labels = [f"p={p:g},q={q:g}" for p, q in pq_grid]
    stats = {label: _MarginStats() for label in labels}
    gaps = {label: 0.0 for label in labels}

    def worker(task):
        dim, trial = task
        rng = stream(config.seed, dim, trial)
        b = ginibre(rng, dim)
        b = b / np.linalg.norm(b)
        b_conditioned = _conditioned_contraction(rng, dim)
        out = []
        for (p, q), label in zip(pq_grid, labels):
            if p < 0.0:
                first = _unit_trace(positive_definite(rng, dim))
                second = _unit_trace(positive_definite(rng, dim))
                b_use = b_conditioned
            else:
                first = random_psd_operator(rng, dim, spread=0.5)
                second = random_psd_operator(rng, dim, spread=0.5)
                b_use = b
            vals = (
                trace_power_functional(TracePowerInstance(A=first, B=b_use, p=p, q=q)),
                trace_power_functional(TracePowerInstance(A=second, B=b_use, p=p, q=q)),
            )
            for weight in MIX_WEIGHTS:
                mixed = trace_power_functional(
                    TracePowerInstance(A=mix(first, second, weight), B=b_use, p=p, q=q)
                )
                average = weight * vals[0] + (1.0 - weight) * vals[1]
                out.append((label, mixed, average, None))
            if p < 0.0:
                child_seed = int(rng.integers(0, 2**63))
                rep = inf_representation_check(
                    first, b_use, p, trials=inf_rep_trials, seed=child_seed, q=q
                )
                out.append((label, 0.0, rep.max_violation, rep.optimizer_gap))
        return out

    tasks = [(dim, t) for dim in config.dims for t in range(config.trials)]
    for outcomes in _map_trials(worker, tasks):
        for label, dominating, dominated, gap in outcomes:
            stats[label].add(dominating, dominated)
            if gap is not None:
                gaps[label] = max(gaps[label], gap)
    report = CampaignReport(claim="lemma2", config=config.echo())
    report = _finalize(report, stats, config.tolerance, started)
    for label, gap in gaps.items():
        report.groups[label]["optimizer_gap_max"] = gap
    report.passed = report.passed and all(g <= EQUALITY_RTOL for g in gaps.values())
    return report


def run_two_variable_campaign(
    config: CampaignConfig, p_grid: tuple[float, ...] = EQ3_P_GRID
) -> CampaignReport:
    """Joint midpoint convexity of ``(A, X) -> tr A^(p/2) B X^(1-p) B^dag A^(p/2)``."""
    started = time.monotonic()
    stats = {f"p={p:g}": _MarginStats() for p in p_grid}

    def worker(task):
        dim, trial = task
        rng = stream(config.seed, dim, trial)
        b = ginibre(rng, dim)
        b = b / np.linalg.norm(b)
        out = []
        for p in p_grid:
            label = f"p={p:g}"
            a_first = positive_definite(rng, dim)
            a_second = positive_definite(rng, dim)
            x_first = random_psd_operator(rng, dim, spread=0.5)
            x_second = random_psd_operator(rng, dim, spread=0.5)
            val_first = two_variable_form(a_first, x_first, b, p)
            val_second = two_variable_form(a_second, x_second, b, p)
            for weight in MIX_WEIGHTS:
                mixed = two_variable_form(
                    mix(a_first, a_second, weight),
                    mix(x_first, x_second, weight),
                    b,
                    p,
                )
                average = weight * val_first + (1.0 - weight) * val_second
                out.append((label, average, mixed))
        return out

    tasks = [(dim, t) for dim in config.dims for t in range(config.trials)]
    for outcomes in _map_trials(worker, tasks):
        for label, average, mixed in outcomes:
            stats[label].add(average, mixed)
    report = CampaignReport(claim="eq3", config=config.echo())
    return _finalize(report, stats, config.tolerance, started)


def run_young_campaign(
    config: CampaignConfig, p_grid: tuple[float, ...] = YOUNG_P_GRID
) -> CampaignReport:
    """Trace Young inequality on random pairs plus constructed equality cases."""
    started = time.monotonic()
    stats = {f"p={p:g}": _MarginStats() for p in p_grid}
    equality_gaps = {f"p={p:g}": 0.0 for p in p_grid}

    def sample(rng, dim):
        # Trace-scaled draws keep tr(X^p) at O(1) so absolute slack
        # tolerances are meaningful for every p in the grid.
        w = ginibre(rng, dim)
        m = (w @ w.conj().T) / dim
        return clamped_psd((10.0 ** rng.uniform(-0.5, 0.5)) * m)

    def worker(task):
        dim, trial = task
        rng = stream(config.seed, dim, trial)
        out = []
        for p in p_grid:
            label = f"p={p:g}"
            x_op = sample(rng, dim)
            y_op = sample(rng, dim)
            rep = young_trace_check(x_op, y_op, p)
            out.append((label, rep.slack, 0.0, None))
            matched = matrix_power(x_op, p - 1.0)
            rep_eq = young_trace_check(x_op, matched, p)
            out.append((label, 0.0, 0.0, abs(rep_eq.slack)))
        return out

    tasks = [(dim, t) for dim in config.dims for t in range(config.trials)]
    for outcomes in _map_trials(worker, tasks):
        for label, slack, floor, equality_gap in outcomes:
            if equality_gap is None:
                stats[label].add(slack, floor)
            else:
                equality_gaps[label] = max(equality_gaps[label], equality_gap)
    report = CampaignReport(claim="young", config=config.echo())
    report = _finalize(report, stats, min(config.tolerance, YOUNG_SLACK), started)
    for label, gap in equality_gaps.items():
        report.groups[label]["equality_max_abs_slack"] = gap
    report.passed = report.passed and all(g <= 1e-9 for g in equality_gaps.values())
    return report


CLAIM_RUNNERS = {
    "thm1": run_monotonicity,
    "thm2": run_joint_convexity,
    "prop1": run_q_convexity,
    "lemma1": run_variational_campaign,
    "lemma2": run_trace_power_campaign,
    "eq3": run_two_variable_campaign,
    "young": run_young_campaign,
}


def run_claim(claim: str, config: CampaignConfig) -> CampaignReport:
    """Dispatch one claim token to its campaign runner."""
    try:
        runner = CLAIM_RUNNERS[claim]
    except KeyError:
        known = ", ".join(sorted(CLAIM_RUNNERS))
        raise ValueError(f"unknown claim {claim!r}; expected one of: {known}") from None
    return runner(config)


# ---------------------------------------------------------------------------
# Order scans


SCAN_CONTINUITY_EPS = (1e-2, 1e-3, 1e-4)
SCAN_TAIL_ORDER = 1e4
SCAN_CONTINUITY_TOL = 1e-3


def csv_num(value) -> str:
    """CSV cell: 17 significant digits, '.' decimal point, locale-free."""
    if value is None:
        return ""
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def default_scan_grid() -> tuple[float, ...]:
    """Log-spaced orders from 0.1 to 1e4 plus points closing in on 1.

    Orders within the refusal band around 1 are dropped; the scan adds its
    own exact order-1 row.
    """
    base = list(np.geomspace(0.1, SCAN_TAIL_ORDER, 41))
    for eps in SCAN_CONTINUITY_EPS:
        base.extend([1.0 - eps, 1.0 + eps])
    grid = sorted(set(float(a) for a in base))
    return tuple(a for a in grid if abs(a - 1.0) >= 9.9e-5)


@dataclass(frozen=True)
class ScanResult:
    """Divergence values over a grid of orders, plus limit diagnostics.

    ``orders`` holds the numeric orders with ``1.0`` and ``math.inf`` rows
    included in sorted position; ``d_prime_values`` is None on the inf row.
    ``continuity`` is None unless both operators were strictly positive.
    """

    labels: tuple[str, ...]
    orders: tuple[float, ...]
    d_values: tuple[float, ...]
    d_prime_values: tuple
    continuity: dict | None


def run_alpha_scan(pair: DivergencePair, grid=None) -> ScanResult:
    """Tabulate both divergences over a grid of orders.

    When the pair is strictly positive the scan also reports how the finite
    orders approach the order-1 and order-inf rows: absolute gaps at
    1 +/- eps for shrinking eps must decrease and end below
    SCAN_CONTINUITY_TOL, and the largest grid order must land near the
    inf row value.
    """
    if grid is None:
        orders = default_scan_grid()
    else:
        orders = tuple(sorted(float(a) for a in grid))
        for a in orders:
            if math.isnan(a) or a <= 0.0 or math.isinf(a):
                raise ValueError(f"scan grid orders must be finite and positive, got {a!r}")
            if abs(a - 1.0) < 1e-6:
                raise ValueError(
                    f"scan grid order {a!r} falls in the refusal band around 1"
                )

    value_one = d_alpha(pair, 1.0)
    value_inf = d_alpha(pair, math.inf)

    rows = [(a, d_alpha(pair, a), d_prime_alpha(pair, a)) for a in orders]
    rows.append((1.0, value_one, value_one))  # both families share the order-1 limit
    rows.sort(key=lambda row: row[0])
    rows.append((math.inf, value_inf, None))

    continuity = None
    strictly_positive = (
        pair.rho.support_rank == pair.dim and pair.sigma.support_rank == pair.dim
    )
    if strictly_positive:
        above = [abs(d_alpha(pair, 1.0 + eps) - value_one) for eps in SCAN_CONTINUITY_EPS]
        below = [abs(d_alpha(pair, 1.0 - eps) - value_one) for eps in SCAN_CONTINUITY_EPS]
        tail = abs(d_alpha(pair, SCAN_TAIL_ORDER) - value_inf)
        continuity = {
            "above_gaps": above,
            "below_gaps": below,
            "tail_gap": tail,
            "above_ok": above[0] >= above[1] >= above[2] and above[-1] <= SCAN_CONTINUITY_TOL,
            "below_ok": below[0] >= below[1] >= below[2] and below[-1] <= SCAN_CONTINUITY_TOL,
            "tail_ok": tail <= SCAN_CONTINUITY_TOL,
        }

    return ScanResult(
        labels=tuple(csv_num(a) for a, _, _ in rows),
        orders=tuple(a for a, _, _ in rows),
        d_values=tuple(d for _, d, _ in rows),
        d_prime_values=tuple(dp for _, _, dp in rows),
        continuity=continuity,
    )


def write_scan_csv(result: ScanResult, path: str) -> None:
    """Write the scan table: header then one ``alpha,d_alpha,d_prime_alpha`` row each."""
    lines = ["alpha,d_alpha,d_prime_alpha"]
    for label, d_value, dp_value in zip(result.labels, result.d_values, result.d_prime_values):
        lines.append(f"{label},{csv_num(d_value)},{csv_num(dp_value)}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Violation search below the monotone range


@dataclass
class SearchReport:
    """Best monotonicity-margin instances found below order 1/2.

    No pass/fail verdict: the point is to hand back the most adversarial
    candidate found, whether or not its margin went negative.
    """

    config: dict
    climb_steps: int
    results: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def to_json_dict(self, include_wall_time: bool = True) -> dict:
        out = {
            "config": _json_safe(self.config),
            "climb_steps": self.climb_steps,
            "results": _json_safe(self.results),
        }
        if include_wall_time:
            out["wall_time_s"] = self.wall_time_s
        return out

    def json_str(self, include_wall_time: bool = True) -> str:
        return json.dumps(
            self.to_json_dict(include_wall_time), sort_keys=True, indent=2
        ) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.json_str())


def _isometry_to_kraus(isometry: np.ndarray, dim_out: int, count: int):
    return [isometry[i * dim_out : (i + 1) * dim_out, :] for i in range(count)]


def _reorthonormalize(columns: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(columns)
    diag = np.diagonal(r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))


def _margin(pair: DivergencePair, kraus, alpha: float) -> float:
    channel = QuantumChannel(kraus)
    image = DivergencePair(
        apply_channel(channel, pair.rho), apply_channel(channel, pair.sigma)
    )
    before = d_alpha(pair, alpha)
    after = d_alpha(image, alpha)
    if math.isinf(before):
        return math.inf
    if math.isinf(after):
        return -math.inf
    return before - after


def search_violation(config: CampaignConfig, climb_steps: int = 200) -> SearchReport:
    """Hunt for monotonicity failures at orders below 1/2.

    Phase one scores random (pair, channel) candidates; phase two greedily
    perturbs the best candidate per order (state mixing plus isometry
    nudges), shrinking the step on rejection.  Deterministic per seed.
    """
    for a in config.alphas:
        if math.isinf(a) or not 0.0 < a < 0.5:
            raise ValueError(
                f"the search explores orders in (0, 1/2), got {order_label(a)}"
            )
    from .matio import matrix_to_dict

    started = time.monotonic()
    report = SearchReport(config=config.echo(), climb_steps=climb_steps)

    for alpha in config.alphas:
        label = order_label(alpha)
        best = None  # (margin, dim, pair, kraus)
        counter = 0
        for dim in config.dims:
            for trial in range(config.trials):
                rng = stream(config.seed, counter)
                counter += 1
                pair = _sample_pair(rng, dim, config.normalize_sigma)
                kraus_count = int(rng.integers(1, dim * dim + 1))
                channel = _random_channel_from_rng(rng, dim, dim, kraus_count)
                margin = _margin(pair, channel.kraus, alpha)
                if best is None or margin < best[0]:
                    best = (margin, dim, pair, list(channel.kraus))

        margin, dim, pair, kraus = best
        random_best = margin
        step = 0.1
        for it in range(climb_steps):
            rng = stream(config.seed, 10_000_000, it)
            w = ginibre(rng, dim)
            rho_cand = clamped_psd(
                (1.0 - step) * pair.rho.mat
                + step * (w @ w.conj().T) / np.trace(w @ w.conj().T).real
            )
            v = ginibre(rng, dim)
            bump = v @ v.conj().T
            bump = bump * (pair.sigma.trace() / np.trace(bump).real)
            sigma_cand = clamped_psd((1.0 - step) * pair.sigma.mat + step * bump)
            iso = np.vstack(kraus)
            noise = ginibre(rng, iso.shape[0], iso.shape[1])
            iso_cand = _reorthonormalize(iso + step * noise)
            kraus_cand = _isometry_to_kraus(iso_cand, dim, len(kraus))
            pair_cand = DivergencePair(rho_cand, sigma_cand)
            margin_cand = _margin(pair_cand, kraus_cand, alpha)
            if margin_cand < margin:
                margin, pair, kraus = margin_cand, pair_cand, kraus_cand
                step = min(0.5, step * 1.5)
            else:
                step = max(1e-4, step * 0.7)

        report.results[label] = {
            "best_margin": margin,
            "random_phase_margin": random_best,
            "found_violation": bool(margin < -config.tolerance),
            "instance": {
                "dim": dim,
                "rho": matrix_to_dict(pair.rho),
                "sigma": matrix_to_dict(pair.sigma),
                "channel": {
                    "dim_in": dim,
                    "dim_out": dim,
                    "kraus": [
                        {"re": k.real.tolist(), "im": k.imag.tolist()} for k in kraus
                    ],
                },
            },
        }
    report.wall_time_s = time.monotonic() - started
    return report

