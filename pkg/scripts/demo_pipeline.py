#!/usr/bin/env python3
"""End-to-end demo: synthesize a small market, then detect / stats / sweep /
backtest / trade-eval through the CLI into ./demo_out.

Everything is seeded, so repeated runs produce identical reports.
"""
import sys
from pathlib import Path

from trendlab import synth_gbm, synth_trend_series, write_candle_file
from trendlab.cli import main as cli

OUT = Path("demo_out")


def run(*args: str) -> None:
    print(f"$ trendlab {' '.join(args)}")
    rc = cli(list(args))
    if rc != 0:
        sys.exit(rc)


def main() -> int:
    market = OUT / "market"
    market.mkdir(parents=True, exist_ok=True)
    for seed in range(4):
        write_candle_file(synth_gbm(100.0, 0.0003, 0.02, 3000, seed=seed, symbol=f"gbm{seed}"), market / f"gbm{seed}.csv")
    series, _ = synth_trend_series(swings=80, seed=99, symbol="planted")
    write_candle_file(series, market / "planted.csv")

    run("detect", "--input", str(market), "--scaling", "1", "--output", str(OUT / "detect"))
    run("stats", "--input", str(market), "--scaling", "1", "--scaling", "1.5", "--output", str(OUT / "stats"))
    run("sweep", "--input", str(market / "planted.csv"), "--scalings", "0.5:3:0.5", "--output", str(OUT / "sweep"))
    run(
        "backtest",
        "--input", str(market / "planted.csv"),
        "--scaling", "1",
        "--direction", "up",
        "--entry", "0.382",
        "--target", "1.0",
        "--output", str(OUT / "backtest"),
    )
    run(
        "trade-eval",
        "--mu-x", "-0.6", "--sigma-x", "0.3",
        "--mu-d", "-0.7", "--sigma-d", "0.15",
        "--rho", "0.6",
        "--entry", "0.382", "--target", "1.0",
        "--mc-samples", "500000",
        "--output", str(OUT / "trade_eval"),
    )
    print(f"\nreports in {OUT.resolve()}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
