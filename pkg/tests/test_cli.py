"""End-to-end checks of the command line front end.

Every test drives ``main(argv)`` in process and asserts on exit codes,
stdout, and the files the commands leave behind.  Exit code contract:
0 success or pass, 1 a verified violation, 2 usage errors (including an
infinite divergence value, which has no printable numeric form).
"""

import json
import math

import numpy as np
import pytest

from renyi_lab import (
    DivergencePair,
    apply_channel,
    as_psd,
    d_alpha,
    d_prime_alpha,
    load_channel,
    load_matrix,
    random_channel,
    save_channel,
    save_matrix,
    validate_cptp,
)
from renyi_lab.cli import main
from renyi_lab.rng import random_density, stream

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _write_pair(tmp_path, seed=11, dim=3):
    rng = stream(seed)
    rho = as_psd(random_density(rng, dim))
    sigma = as_psd(random_density(rng, dim))
    rho_path = str(tmp_path / "rho.json")
    sigma_path = str(tmp_path / "sigma.json")
    save_matrix(rho_path, rho)
    save_matrix(sigma_path, sigma)
    return rho_path, sigma_path, DivergencePair(rho, sigma)


def _data_lines(out: str) -> list[str]:
    lines = out.strip().splitlines()
    assert lines[0] == "alpha,d_alpha,d_prime_alpha"
    return [line for line in lines[1:] if not line.startswith("#")]


# ---------------------------------------------------------------------------
# divergence


def test_divergence_value_matches_library(tmp_path, capsys):
    rho_path, sigma_path, pair = _write_pair(tmp_path)
    code = main(["divergence", "--rho", rho_path, "--sigma", sigma_path, "--alpha", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert abs(float(out) - d_alpha(pair, 2.0)) <= 1e-12


def test_divergence_base_two(tmp_path, capsys):
    rho_path, sigma_path, pair = _write_pair(tmp_path)
    code = main(
        ["divergence", "--rho", rho_path, "--sigma", sigma_path, "--alpha", "2", "--base", "2"]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert abs(float(out) - d_alpha(pair, 2.0) / math.log(2.0)) <= 1e-12


@pytest.mark.parametrize("token,order", [("1", 1.0), ("inf", math.inf)])
def test_divergence_limit_orders(tmp_path, capsys, token, order):
    rho_path, sigma_path, pair = _write_pair(tmp_path)
    code = main(["divergence", "--rho", rho_path, "--sigma", sigma_path, "--alpha", token])
    out = capsys.readouterr().out
    assert code == 0
    assert abs(float(out) - d_alpha(pair, order)) <= 1e-12


def test_divergence_traditional_flag(tmp_path, capsys):
    rho_path, sigma_path, pair = _write_pair(tmp_path)
    code = main(
        ["divergence", "--rho", rho_path, "--sigma", sigma_path, "--alpha", "0.75", "--traditional"]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert abs(float(out) - d_prime_alpha(pair, 0.75)) <= 1e-12


def test_divergence_traditional_rejects_order_inf(tmp_path, capsys):
    rho_path, sigma_path, _ = _write_pair(tmp_path)
    code = main(
        ["divergence", "--rho", rho_path, "--sigma", sigma_path, "--alpha", "inf", "--traditional"]
    )
    err = capsys.readouterr().err
    assert code == 2
    assert "error:" in err


def test_divergence_infinite_value_exits_two(tmp_path, capsys):
    # supp(rho) escapes supp(sigma), so every order >= 1 is +inf.
    rho_path = str(tmp_path / "rho.json")
    sigma_path = str(tmp_path / "sigma.json")
    save_matrix(rho_path, np.eye(2) / 2)
    save_matrix(sigma_path, np.diag([1.0, 0.0]))
    code = main(["divergence", "--rho", rho_path, "--sigma", sigma_path, "--alpha", "2"])
    out = capsys.readouterr().out
    assert code == 2
    assert out.strip() == "inf"


def test_divergence_refusal_band_exits_two(tmp_path, capsys):
    rho_path, sigma_path, _ = _write_pair(tmp_path)
    code = main(["divergence", "--rho", rho_path, "--sigma", sigma_path, "--alpha", "1.0000001"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_divergence_missing_file_exits_two(tmp_path, capsys):
    rho_path, _, _ = _write_pair(tmp_path)
    code = main(
        ["divergence", "--rho", rho_path, "--sigma", str(tmp_path / "nope.json"), "--alpha", "2"]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_divergence_bad_json_exits_two(tmp_path, capsys):
    rho_path, _, _ = _write_pair(tmp_path)
    bad = tmp_path / "bad.json"
    bad.write_text("not json at all")
    code = main(["divergence", "--rho", rho_path, "--sigma", str(bad), "--alpha", "2"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_divergence_indefinite_input_exits_two(tmp_path, capsys):
    rho_path, _, _ = _write_pair(tmp_path)
    indefinite = str(tmp_path / "indef.json")
    save_matrix(indefinite, np.diag([1.0, -1.0]))
    code = main(["divergence", "--rho", rho_path, "--sigma", indefinite, "--alpha", "2"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["no-such-command"],
        ["divergence", "--rho", "a.json"],
        ["channel"],
        ["verify", "no-such-claim"],
    ],
)
def test_parse_errors_exit_two(argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 2


# ---------------------------------------------------------------------------
# channel


def test_channel_random_writes_cptp_channel(tmp_path, capsys):
    out_path = str(tmp_path / "channel.json")
    code = main(
        ["channel", "random", "--din", "2", "--dout", "3", "--kraus", "2", "--seed", "5",
         "--out", out_path]
    )
    assert code == 0
    assert "wrote" in capsys.readouterr().out
    channel = load_channel(out_path)
    assert (channel.dim_in, channel.dim_out) == (2, 3)
    assert validate_cptp(channel)


def test_channel_random_rejects_impossible_shape(tmp_path, capsys):
    out_path = str(tmp_path / "channel.json")
    code = main(
        ["channel", "random", "--din", "4", "--dout", "2", "--kraus", "1", "--out", out_path]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_channel_apply_matches_library(tmp_path, capsys):
    channel = random_channel(2, 3, 2, seed=8)
    channel_path = str(tmp_path / "channel.json")
    state_path = str(tmp_path / "state.json")
    out_path = str(tmp_path / "image.json")
    save_channel(channel_path, channel)
    save_matrix(state_path, as_psd(random_density(stream(21), 2)))
    code = main(
        ["channel", "apply", "--channel", channel_path, "--state", state_path, "--out", out_path]
    )
    assert code == 0
    image = load_matrix(out_path)
    expected = apply_channel(channel, as_psd(random_density(stream(21), 2)))
    assert np.allclose(image.mat, expected.mat, atol=1e-12)


def test_channel_apply_dim_mismatch_exits_two(tmp_path, capsys):
    channel_path = str(tmp_path / "channel.json")
    state_path = str(tmp_path / "state.json")
    save_channel(channel_path, random_channel(2, 2, 2, seed=8))
    save_matrix(state_path, as_psd(random_density(stream(22), 3)))
    code = main(
        ["channel", "apply", "--channel", channel_path, "--state", state_path,
         "--out", str(tmp_path / "image.json")]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_channel_dilate_writes_dilation(tmp_path, capsys):
    channel_path = str(tmp_path / "channel.json")
    out_path = str(tmp_path / "dilation.json")
    save_channel(channel_path, random_channel(3, 3, 2, seed=12))
    code = main(["channel", "dilate", "--channel", channel_path, "--out", out_path])
    assert code == 0
    with open(out_path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    assert sorted(payload) == ["dim_env", "dim_sys", "env_state", "unitary"]


def test_channel_dilate_rejects_rectangular(tmp_path, capsys):
    channel_path = str(tmp_path / "channel.json")
    save_channel(channel_path, random_channel(2, 3, 2, seed=12))
    code = main(
        ["channel", "dilate", "--channel", channel_path, "--out", str(tmp_path / "d.json")]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# verify


def test_verify_pass_writes_all_outputs(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    csv_path = tmp_path / "groups.csv"
    plot_path = tmp_path / "margins.png"
    code = main(
        ["verify", "thm1", "--dims", "2", "--trials", "3", "--seed", "9",
         "--report", str(report_path), "--csv", str(csv_path), "--plot", str(plot_path)]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "thm1: PASS" in out

    payload = json.loads(report_path.read_text())
    assert payload["claim"] == "thm1"
    assert payload["pass"] is True
    assert set(payload["groups"]) == {"0.5", "0.75", "1", "2", "inf"}

    csv_lines = csv_path.read_text().strip().splitlines()
    assert csv_lines[0] == "group,checks,finite,min_margin,max_violation,infinite_violations"
    assert len(csv_lines) == 1 + len(payload["groups"])

    assert plot_path.read_bytes()[:8] == PNG_MAGIC


def test_verify_order_outside_claim_range_exits_two(capsys):
    code = main(["verify", "thm2", "--dims", "2", "--trials", "2", "--alphas", "2"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# scan


def test_scan_stdout_and_files(tmp_path, capsys):
    rho_path, sigma_path, pair = _write_pair(tmp_path, seed=31, dim=2)
    csv_path = tmp_path / "scan.csv"
    report_path = tmp_path / "scan.json"
    plot_path = tmp_path / "scan.png"
    code = main(
        ["scan", "--rho", rho_path, "--sigma", sigma_path, "--alphas", "0.5,2",
         "--csv", str(csv_path), "--report", str(report_path), "--plot", str(plot_path)]
    )
    out = capsys.readouterr().out
    assert code == 0
    rows = _data_lines(out)
    assert len(rows) == 4  # grid orders plus the order-1 and order-inf rows
    assert "# limit diagnostics: consistent" in out
    half = rows[0].split(",")
    assert half[0] == "0.5"
    assert abs(float(half[1]) - d_alpha(pair, 0.5)) <= 1e-12
    assert abs(float(half[2]) - d_prime_alpha(pair, 0.5)) <= 1e-12
    assert rows[-1].split(",")[2] == ""  # no traditional value at order inf

    csv_lines = csv_path.read_text().strip().splitlines()
    assert csv_lines[0] == "alpha,d_alpha,d_prime_alpha"
    assert len(csv_lines) == 1 + len(rows)

    payload = json.loads(report_path.read_text())
    assert len(payload["rows"]) == 4
    assert payload["continuity"]["tail_ok"] is True

    assert plot_path.read_bytes()[:8] == PNG_MAGIC


def test_scan_identical_pair_zero_column(tmp_path, capsys):
    state_path = str(tmp_path / "state.json")
    save_matrix(state_path, as_psd(random_density(stream(461), 3)))
    code = main(["scan", "--rho", state_path, "--sigma", state_path, "--alphas", "0.1,0.5,2,100"])
    out = capsys.readouterr().out
    assert code == 0
    for row in _data_lines(out):
        assert abs(float(row.split(",")[1])) <= 1e-9


def test_scan_grid_in_refusal_band_exits_two(tmp_path, capsys):
    rho_path, sigma_path, _ = _write_pair(tmp_path)
    code = main(["scan", "--rho", rho_path, "--sigma", sigma_path, "--alphas", "0.9999999"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# search


def test_search_exit_matches_verdict(tmp_path, capsys):
    report_path = tmp_path / "search.json"
    code = main(
        ["search", "--alpha", "0.3", "--dims", "2", "--trials", "2", "--steps", "3",
         "--seed", "3", "--report", str(report_path)]
    )
    out = capsys.readouterr().out
    assert code in (0, 1)
    verdict = out.strip().splitlines()[-1]
    assert verdict == ("violation found" if code == 1 else "no violation found")
    payload = json.loads(report_path.read_text())
    assert "0.3" in payload["results"]


def test_search_rejects_order_above_half(capsys):
    code = main(["search", "--alpha", "0.6", "--dims", "2", "--trials", "2"])
    assert code == 2
    assert "error:" in capsys.readouterr().err
