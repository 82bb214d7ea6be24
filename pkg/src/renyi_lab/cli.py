"""Command line front end.

Subcommands: ``divergence`` (one value for one pair), ``channel`` (random /
apply / dilate, JSON files in and out), ``verify`` (randomized campaign for
one claim token), ``scan`` (order sweep for one pair, CSV/JSON/PNG out), and
``search`` (adversarial probing below order 1/2).

Exit codes: 0 success / pass, 1 verified-claim violation (or a search that
found one), 2 usage errors, including the divergence subcommand reporting an
infinite value under the kernel convention.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .channels import apply_channel, random_channel, stinespring
from .divergence import DivergencePair, d_alpha, d_prime_alpha
from .harness import (
    CampaignConfig,
    CLAIM_RUNNERS,
    _json_safe,
    csv_num,
    run_alpha_scan,
    run_claim,
    search_violation,
    write_scan_csv,
)
from .matio import (
    load_channel,
    load_psd,
    save_channel,
    save_dilation,
    save_matrix,
)

LN2 = math.log(2.0)

CLAIM_DEFAULT_ALPHAS = {
    "thm1": "0.5,0.75,1,2,inf",
    "thm2": "0.5,0.75,1",
    "prop1": "0.5,0.75,2,3",
    "lemma1": "0.5,0.75,1.5,2,3",
    "lemma2": "0.5",
    "eq3": "0.5",
    "young": "0.5",
}


def _parse_dims(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_alpha(token: str) -> float:
    token = token.strip().lower()
    if token in ("inf", "infinity", "oo"):
        return math.inf
    return float(token)


def _parse_alphas(text: str) -> tuple[float, ...]:
    return tuple(_parse_alpha(tok) for tok in text.split(",") if tok.strip())


def _add_campaign_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--dims", default="2,3,4", help="comma list (2,3,4) or range (2..5)")
    sub.add_argument("--alphas", default=None, help="comma list of orders; inf allowed")
    sub.add_argument("--trials", type=int, default=100, help="trials per dimension")
    sub.add_argument("--seed", type=int, default=2024)
    sub.add_argument("--tol", type=float, default=1e-9, help="margin tolerance")
    sub.add_argument("--report", metavar="FILE.json", help="write the JSON report here")
    sub.add_argument("--csv", metavar="FILE.csv", help="write delimited output here")
    sub.add_argument("--plot", metavar="FILE.png", help="render a figure here")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renyi-lab",
        description="Order-alpha Renyi divergences and randomized structure checks.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    div = commands.add_parser("divergence", help="one divergence value for one pair")
    div.add_argument("--rho", required=True, metavar="FILE")
    div.add_argument("--sigma", required=True, metavar="FILE")
    div.add_argument("--alpha", required=True, help="positive order, 1, or inf")
    div.add_argument("--base", choices=("e", "2"), default="e")
    div.add_argument(
        "--traditional", action="store_true",
        help="use the non-sandwiched trace form instead",
    )
    div.set_defaults(func=_cmd_divergence)

    chan = commands.add_parser("channel", help="Kraus channel utilities")
    chan_sub = chan.add_subparsers(dest="channel_command", required=True)

    rand = chan_sub.add_parser("random", help="sample a Haar-isometry channel")
    rand.add_argument("--din", type=int, required=True)
    rand.add_argument("--dout", type=int, required=True)
    rand.add_argument("--kraus", type=int, required=True)
    rand.add_argument("--seed", type=int, default=0)
    rand.add_argument("--out", required=True, metavar="FILE")
    rand.set_defaults(func=_cmd_channel_random)

    app = chan_sub.add_parser("apply", help="push a PSD operator through a channel")
    app.add_argument("--channel", required=True, metavar="FILE")
    app.add_argument("--state", required=True, metavar="FILE")
    app.add_argument("--out", required=True, metavar="FILE")
    app.set_defaults(func=_cmd_channel_apply)

    dil = chan_sub.add_parser("dilate", help="unitary dilation of a square channel")
    dil.add_argument("--channel", required=True, metavar="FILE")
    dil.add_argument("--out", required=True, metavar="FILE")
    dil.set_defaults(func=_cmd_channel_dilate)

    ver = commands.add_parser("verify", help="randomized campaign for one claim")
    ver.add_argument("claim", choices=sorted(CLAIM_RUNNERS))
    _add_campaign_flags(ver)
    ver.set_defaults(func=_cmd_verify)

    scan = commands.add_parser("scan", help="sweep the order for one pair")
    scan.add_argument("--rho", required=True, metavar="FILE")
    scan.add_argument("--sigma", required=True, metavar="FILE")
    scan.add_argument("--alphas", default=None, help="custom grid (default: log-spaced)")
    scan.add_argument("--report", metavar="FILE.json")
    scan.add_argument("--csv", metavar="FILE.csv")
    scan.add_argument("--plot", metavar="FILE.png")
    scan.set_defaults(func=_cmd_scan)

    search = commands.add_parser("search", help="hunt for violations below order 1/2")
    search.add_argument("--alpha", required=True, help="order in (0, 1/2)")
    search.add_argument("--dims", default="2,3,4")
    search.add_argument("--trials", type=int, default=100)
    search.add_argument("--seed", type=int, default=2024)
    search.add_argument("--tol", type=float, default=1e-9)
    search.add_argument("--steps", type=int, default=200, help="hill-climb iterations")
    search.add_argument("--report", metavar="FILE.json")
    search.set_defaults(func=_cmd_search)

    return parser


def _cmd_divergence(args) -> int:
    pair = DivergencePair(load_psd(args.rho), load_psd(args.sigma))
    alpha = _parse_alpha(args.alpha)
    if args.traditional:
        if math.isinf(alpha):
            raise ValueError("the traditional form has no order-inf branch")
        value = d_alpha(pair, 1.0) if alpha == 1.0 else d_prime_alpha(pair, alpha)
    else:
        value = d_alpha(pair, alpha)
    if args.base == "2" and not math.isinf(value):
        value = value / LN2
    if math.isinf(value):
        print("inf")
        return 2
    print(csv_num(value))
    return 0


def _cmd_channel_random(args) -> int:
    channel = random_channel(args.din, args.dout, args.kraus, args.seed)
    save_channel(args.out, channel)
    print(f"wrote {args.out}")
    return 0


def _cmd_channel_apply(args) -> int:
    channel = load_channel(args.channel)
    state = load_psd(args.state)
    save_matrix(args.out, apply_channel(channel, state))
    print(f"wrote {args.out}")
    return 0


def _cmd_channel_dilate(args) -> int:
    channel = load_channel(args.channel)
    save_dilation(args.out, stinespring(channel))
    print(f"wrote {args.out}")
    return 0


def _campaign_config(args, claim: str | None = None) -> CampaignConfig:
    if args.alphas is not None:
        alphas = _parse_alphas(args.alphas)
    elif claim is not None:
        alphas = _parse_alphas(CLAIM_DEFAULT_ALPHAS[claim])
    else:
        alphas = (0.5,)
    return CampaignConfig(
        dims=_parse_dims(args.dims),
        alphas=alphas,
        trials=args.trials,
        seed=args.seed,
        tolerance=args.tol,
    )


def _write_groups_csv(report, path: str) -> None:
    lines = ["group,checks,finite,min_margin,max_violation,infinite_violations"]
    for label, stats in report.groups.items():
        lines.append(
            ",".join(
                [
                    label.replace(",", ";"),
                    str(stats.get("checks", "")),
                    str(stats.get("finite", "")),
                    csv_num(stats.get("min_margin")),
                    csv_num(stats.get("max_violation")),
                    str(stats.get("infinite_violations", "")),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_verify(args) -> int:
    config = _campaign_config(args, args.claim)
    report = run_claim(args.claim, config)
    for label, stats in report.groups.items():
        margin = stats.get("min_margin")
        margin_text = "n/a" if margin is None else f"{margin:.3e}"
        print(
            f"  {label}: {stats['checks']} checks, worst margin {margin_text}, "
            f"infinite violations {stats['infinite_violations']}"
        )
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{args.claim}: {verdict} (max violation {report.max_violation:.3e})")
    if args.report:
        report.write(args.report)
    if args.csv:
        _write_groups_csv(report, args.csv)
    if args.plot:
        from .plots import plot_campaign_margins

        plot_campaign_margins(report, args.plot)
    return 0 if report.passed else 1


def _cmd_scan(args) -> int:
    pair = DivergencePair(load_psd(args.rho), load_psd(args.sigma))
    grid = _parse_alphas(args.alphas) if args.alphas else None
    result = run_alpha_scan(pair, grid)
    print("alpha,d_alpha,d_prime_alpha")
    for label, d_value, dp_value in zip(result.labels, result.d_values, result.d_prime_values):
        print(f"{label},{csv_num(d_value)},{csv_num(dp_value)}")
    if result.continuity is not None:
        flags = result.continuity
        ok = flags["above_ok"] and flags["below_ok"] and flags["tail_ok"]
        print(f"# limit diagnostics: {'consistent' if ok else 'INCONSISTENT'}")
    if args.csv:
        write_scan_csv(result, args.csv)
    if args.report:
        rows = [
            {"alpha": label, "d_alpha": d, "d_prime_alpha": dp}
            for label, d, dp in zip(result.labels, result.d_values, result.d_prime_values)
        ]
        payload = {"rows": rows, "continuity": result.continuity}
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(_json_safe(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.plot:
        from .plots import plot_alpha_scan

        plot_alpha_scan(result, args.plot)
    return 0


def _cmd_search(args) -> int:
    alpha = _parse_alpha(args.alpha)
    config = CampaignConfig(
        dims=_parse_dims(args.dims),
        alphas=(alpha,),
        trials=args.trials,
        seed=args.seed,
        tolerance=args.tol,
    )
    report = search_violation(config, climb_steps=args.steps)
    found = False
    for label, entry in report.results.items():
        found = found or entry["found_violation"]
        print(
            f"  order {label}: best margin {entry['best_margin']:.6e} "
            f"(random phase {entry['random_phase_margin']:.6e}, dim {entry['instance']['dim']})"
        )
    if args.report:
        report.write(args.report)
    print("violation found" if found else "no violation found")
    return 1 if found else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
