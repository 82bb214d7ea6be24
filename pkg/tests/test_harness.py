"""Campaign runners: margin algebra, determinism, scans, and the search probe."""
import json
import math

import numpy as np
import pytest

from renyi_lab.channels import QuantumChannel, apply_channel
from renyi_lab.divergence import DivergencePair, classical_renyi, d_alpha
from renyi_lab.harness import (
    CLAIM_RUNNERS,
    CampaignConfig,
    _MarginStats,
    csv_num,
    default_scan_grid,
    run_alpha_scan,
    run_claim,
    run_joint_convexity,
    run_monotonicity,
    run_q_convexity,
    run_trace_power_campaign,
    run_variational_campaign,
    run_young_campaign,
    search_violation,
    write_scan_csv,
)
from renyi_lab.linalg import as_psd, kron
from renyi_lab.rng import random_density, stream

SMALL = dict(dims=(2, 3), trials=5, seed=7, tolerance=1e-9)


def test_config_validation():
    good = CampaignConfig(dims=(2,), alphas=(0.5,), **{k: v for k, v in SMALL.items() if k != "dims"})
    assert good.echo()["dims"] == [2]
    with pytest.raises(ValueError):
        CampaignConfig(dims=(1,), alphas=(0.5,), trials=5, seed=0, tolerance=1e-9)
    with pytest.raises(ValueError):
        CampaignConfig(dims=(2,), alphas=(0.5,), trials=0, seed=0, tolerance=1e-9)
    with pytest.raises(ValueError):
        CampaignConfig(dims=(2,), alphas=(0.5,), trials=5, seed=0, tolerance=0.0)
    with pytest.raises(ValueError):
        CampaignConfig(dims=(2,), alphas=(-0.5,), trials=5, seed=0, tolerance=1e-9)


def test_margin_algebra():
    """Infinite values split into satisfied / skipped / violation buckets."""
    stats = _MarginStats()
    stats.add(math.inf, math.inf)   # vacuous: excluded from margins
    stats.add(math.inf, 1.0)        # dominating side infinite: satisfied
    stats.add(2.0, 1.0)             # plain finite margin
    assert stats.skipped_infinite == 1
    assert stats.satisfied_infinite == 1
    assert stats.finite == 1
    assert stats.min_margin == pytest.approx(1.0)
    assert stats.max_violation == 0.0
    assert stats.passed(1e-9)

    stats.add(1.0, math.inf)        # finite never dominates infinity
    assert stats.infinite_violations == 1
    assert not stats.passed(1e-9)


def test_margin_algebra_empty_group():
    stats = _MarginStats()
    assert stats.max_violation == 0.0
    assert stats.to_dict()["min_margin"] is None
    assert stats.passed(1e-9)


def test_identity_channel_gives_zero_margin():
    rng = stream(443)
    pair = DivergencePair(random_density(rng, 3), random_density(rng, 3))
    identity = QuantumChannel([np.eye(3)])
    for a in (0.5, 1.0, 2.0, math.inf):
        before = d_alpha(pair, a)
        after_pair = DivergencePair(
            apply_channel(identity, pair.rho), apply_channel(identity, pair.sigma)
        )
        assert before - d_alpha(after_pair, a) == pytest.approx(0.0, abs=1e-10)


def test_discard_factor_keeps_margin_zero():
    # discarding an uncorrelated factor must not move the divergence
    rng = stream(449)
    rho = as_psd(random_density(rng, 2))
    sigma = as_psd(random_density(rng, 2))
    tau = as_psd(random_density(rng, 3))
    kraus = [np.kron(np.eye(2), np.eye(3)[j].reshape(1, 3)) for j in range(3)]
    discard = QuantumChannel(kraus)
    joint = DivergencePair(kron(rho, tau), kron(sigma, tau))
    reduced = DivergencePair(
        apply_channel(discard, joint.rho), apply_channel(discard, joint.sigma)
    )
    base = DivergencePair(rho, sigma)
    for a in (0.5, 1.0, 2.0, math.inf):
        assert d_alpha(joint, a) == pytest.approx(d_alpha(base, a), abs=1e-9)
        assert d_alpha(reduced, a) == pytest.approx(d_alpha(base, a), abs=1e-9)


def test_monotonicity_small_run():
    config = CampaignConfig(alphas=(0.5, 1.0, 2.0, math.inf), **SMALL)
    report = run_monotonicity(config)
    assert report.passed
    assert report.claim == "thm1"
    assert report.instances == 10
    assert set(report.groups) == {"0.5", "1", "2", "inf"}
    assert report.max_violation <= 1e-9


def test_monotonicity_rejects_low_orders():
    with pytest.raises(ValueError):
        run_monotonicity(CampaignConfig(alphas=(0.4,), **SMALL))


def test_joint_convexity_small_run_and_range():
    report = run_joint_convexity(CampaignConfig(alphas=(0.5, 0.75, 1.0), **SMALL))
    assert report.passed
    with pytest.raises(ValueError):
        run_joint_convexity(CampaignConfig(alphas=(2.0,), **SMALL))


def test_q_convexity_small_run_and_range():
    report = run_q_convexity(CampaignConfig(alphas=(0.5, 2.0), **SMALL))
    assert report.passed
    for bad in ((0.4,), (1.0,), (math.inf,)):
        with pytest.raises(ValueError):
            run_q_convexity(CampaignConfig(alphas=bad, **SMALL))


def test_classical_joint_convexity_on_diagonals():
    # the quantum midpoint margin reproduces the classical one on diagonals
    rng = stream(457)
    a = 0.75
    for _ in range(20):
        p0, p1 = rng.random(3), rng.random(3)
        p0, p1 = p0 / p0.sum(), p1 / p1.sum()
        q0, q1 = rng.random(3) + 0.1, rng.random(3) + 0.1
        mid_p, mid_q = (p0 + p1) / 2, (q0 + q1) / 2
        avg = 0.5 * (classical_renyi(p0, q0, a) + classical_renyi(p1, q1, a))
        mixed = classical_renyi(mid_p, mid_q, a)
        pair_mixed = DivergencePair(np.diag(mid_p), np.diag(mid_q))
        assert d_alpha(pair_mixed, a) == pytest.approx(mixed, abs=1e-10)
        assert avg - mixed >= -1e-9


def test_variational_campaign_group_fields():
    config = CampaignConfig(alphas=(0.5, 2.0), **SMALL)
    report = run_variational_campaign(config, h_trials=3)
    assert report.passed
    for group in report.groups.values():
        assert group["h_trials"] == 3
        assert group["optimizer_gap_max"] <= 1e-8
    with pytest.raises(ValueError):
        run_variational_campaign(CampaignConfig(alphas=(1.0,), **SMALL))


def test_trace_power_campaign_small():
    config = CampaignConfig(alphas=(0.5,), **SMALL)
    report = run_trace_power_campaign(config, inf_rep_trials=2)
    assert report.passed
    assert "p=-1,q=1" in report.groups
    assert report.groups["p=-1,q=1"]["optimizer_gap_max"] <= 1e-8


def test_young_campaign_small():
    config = CampaignConfig(alphas=(0.5,), **SMALL)
    report = run_young_campaign(config)
    assert report.passed
    for group in report.groups.values():
        assert group["equality_max_abs_slack"] <= 1e-9


def test_run_claim_tokens():
    assert set(CLAIM_RUNNERS) == {"thm1", "thm2", "prop1", "lemma1", "lemma2", "eq3", "young"}
    config = CampaignConfig(alphas=(0.5,), **SMALL)
    report = run_claim("young", config)
    assert report.claim == "young"
    with pytest.raises(ValueError):
        run_claim("thm9", config)


def test_report_json_shape():
    config = CampaignConfig(alphas=(0.5,), **SMALL)
    report = run_claim("eq3", config)
    payload = report.to_json_dict()
    assert set(payload) == {
        "claim", "config", "groups", "instances",
        "max_violation", "infinite_violations", "pass", "wall_time_s",
    }
    assert payload["pass"] is True
    assert payload["config"]["seed"] == SMALL["seed"]
    # json_str parses back and carries sorted keys
    parsed = json.loads(report.json_str())
    assert list(parsed) == sorted(parsed)


def test_report_write_and_infinity_encoding(tmp_path):
    config = CampaignConfig(alphas=(0.5,), **SMALL)
    report = run_claim("thm2", config)
    report.groups["0.5"]["min_margin"] = math.inf  # exercise the encoder
    path = tmp_path / "report.json"
    report.write(path)
    parsed = json.loads(path.read_text())
    assert parsed["groups"]["0.5"]["min_margin"] == "inf"


def test_campaign_determinism_across_thread_counts(monkeypatch):
    """Same seed, different worker counts: byte-identical report text."""
    config = CampaignConfig(alphas=(0.5, 1.0), **SMALL)
    monkeypatch.setenv("RENYI_LAB_THREADS", "1")
    first = run_joint_convexity(config).json_str(include_wall_time=False)
    monkeypatch.setenv("RENYI_LAB_THREADS", "4")
    second = run_joint_convexity(config).json_str(include_wall_time=False)
    monkeypatch.delenv("RENYI_LAB_THREADS")
    third = run_joint_convexity(config).json_str(include_wall_time=False)
    assert first == second == third


def test_campaign_seed_sensitivity():
    base = CampaignConfig(alphas=(0.5,), **SMALL)
    other = CampaignConfig(dims=(2, 3), alphas=(0.5,), trials=5, seed=8, tolerance=1e-9)
    a = run_joint_convexity(base).json_str(include_wall_time=False)
    b = run_joint_convexity(other).json_str(include_wall_time=False)
    assert a != b


def test_csv_num_format():
    assert csv_num(None) == ""
    assert csv_num(math.inf) == "inf"
    assert csv_num(-math.inf) == "-inf"
    assert csv_num(0.1) == "0.10000000000000001"
    value = 1.0 / 3.0
    assert float(csv_num(value)) == value  # 17 significant digits round-trip


def test_default_scan_grid_brackets_one():
    grid = default_scan_grid()
    for eps in (1e-2, 1e-3, 1e-4):
        assert any(abs(a - (1.0 + eps)) < 1e-12 for a in grid)
        assert any(abs(a - (1.0 - eps)) < 1e-12 for a in grid)
    assert all(abs(a - 1.0) >= 9.9e-5 for a in grid)
    assert grid[0] == pytest.approx(0.1)
    assert grid[-1] == pytest.approx(1e4)


def test_scan_equal_pair_is_zero():
    state = random_density(stream(461), 3)
    result = run_alpha_scan(DivergencePair(state, state))
    assert all(abs(v) <= 1e-9 for v in result.d_values)


def test_scan_matches_classical_on_diagonals():
    rng = stream(463)
    p, q = rng.random(3) + 0.05, rng.random(3) + 0.05
    pair = DivergencePair(np.diag(p), np.diag(q))
    result = run_alpha_scan(pair)
    for order, value in zip(result.orders, result.d_values):
        assert value == pytest.approx(classical_renyi(p, q, order), abs=1e-9)


def test_scan_rows_and_continuity():
    rng = stream(467)
    pair = DivergencePair(random_density(rng, 3), random_density(rng, 3))
    result = run_alpha_scan(pair)
    assert result.orders[-1] == math.inf
    assert result.d_prime_values[-1] is None
    assert 1.0 in result.orders
    one_row = result.orders.index(1.0)
    assert result.d_values[one_row] == result.d_prime_values[one_row]
    assert result.continuity is not None
    assert result.continuity["above_ok"]
    assert result.continuity["below_ok"]
    assert result.continuity["tail_ok"]
    assert abs(d_alpha(pair, 1.0 + 1e-4) - d_alpha(pair, 1.0)) <= 1e-3


def test_scan_skips_continuity_for_singular_pairs():
    pair = DivergencePair(np.diag([1.0, 0.0]), np.diag([0.5, 0.5]))
    assert run_alpha_scan(pair).continuity is None


def test_scan_custom_grid_validation():
    pair = DivergencePair(np.diag([0.6, 0.4]), np.diag([0.5, 0.5]))
    run_alpha_scan(pair, grid=(0.5, 2.0))  # fine
    for bad in ((0.0,), (-1.0,), (math.inf,), (1.0 + 1e-8,)):
        with pytest.raises(ValueError):
            run_alpha_scan(pair, grid=bad)


def test_write_scan_csv(tmp_path):
    rng = stream(479)
    pair = DivergencePair(random_density(rng, 2), random_density(rng, 2))
    result = run_alpha_scan(pair, grid=(0.5, 2.0, 4.0))
    path = tmp_path / "scan.csv"
    write_scan_csv(result, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "alpha,d_alpha,d_prime_alpha"
    assert len(lines) == 1 + 3 + 2  # grid rows plus the order-1 and inf rows
    assert lines[-1].startswith("inf,")
    assert lines[-1].endswith(",")  # no traditional value on the inf row
    for line in lines[1:-1]:
        cells = line.split(",")
        float(cells[1]), float(cells[2])  # numeric cells parse


def test_search_validates_order():
    for bad in ("0.5", "0.7", "0"):
        with pytest.raises(ValueError):
            search_violation(
                CampaignConfig(dims=(2,), alphas=(float(bad),), trials=2, seed=3,
                               tolerance=1e-9),
                climb_steps=2,
            )


def test_search_small_run_shape_and_determinism():
    config = CampaignConfig(dims=(2,), alphas=(0.3,), trials=10, seed=11, tolerance=1e-9)
    report = search_violation(config, climb_steps=15)
    entry = report.results["0.3"]
    assert entry["best_margin"] <= entry["random_phase_margin"]
    assert isinstance(entry["found_violation"], bool)
    instance = entry["instance"]
    assert set(instance) == {"dim", "rho", "sigma", "channel"}
    assert set(instance["channel"]) == {"dim_in", "dim_out", "kraus"}
    again = search_violation(config, climb_steps=15)
    assert report.json_str(include_wall_time=False) == again.json_str(include_wall_time=False)


def test_classical_dpi_holds_below_half():
    """Diagonal instances cannot violate monotonicity at any positive order."""
    rng = stream(487)
    transition = np.array([[0.8, 0.3], [0.2, 0.7]])  # column-stochastic
    kraus = [
        np.sqrt(transition[i, j]) * np.outer(np.eye(2)[i], np.eye(2)[j])
        for i in range(2)
        for j in range(2)
    ]
    channel = QuantumChannel(kraus)
    for _ in range(20):
        p, q = rng.random(2) + 0.05, rng.random(2) + 0.05
        p, q = p / p.sum(), q / q.sum()
        pair = DivergencePair(np.diag(p), np.diag(q))
        out = DivergencePair(
            apply_channel(channel, pair.rho), apply_channel(channel, pair.sigma)
        )
        for a in (0.2, 0.3, 0.45):
            assert d_alpha(pair, a) - d_alpha(out, a) >= -1e-9
            assert d_alpha(out, a) == pytest.approx(
                classical_renyi(transition @ p, transition @ q, a), abs=1e-10
            )
