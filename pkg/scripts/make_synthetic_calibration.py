#!/usr/bin/env python3
"""Generate the bundled synthetic solvency calibration (run once, committed).

The real net-risk sensitivities of the solvency standard formula are company
data and are not public, so the repository ships a synthetic stand-in that
keeps the composed ratio in a plausible 0.9-2.3 band across the simplex:

* risk loadings L[k, j] are seeded uniform draws scaled by each asset's
  volatility over an exposure pattern (bond-ish assets load on interest and
  spread risk, equities on the equity types, and so on);
* A = -L and b is a positive buffer, so the net-risk vector b - L w shrinks
  as the allocation gets riskier;
* c2 and c5 are anchored so that the all-cash portfolio maps to 2.24 and the
  all-Private-Equity portfolio to 0.953.

Usage: python scripts/make_synthetic_calibration.py  (rewrites the YAML in
src/allocfront/data/). Not executed at build or test time.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SEED = 20240613
DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "allocfront" / "data"

RISK_TYPES = (
    "interest_up",
    "interest_down",
    "equity_1",
    "equity_2",
    "property",
    "spread",
    "currency_up",
    "currency_down",
)

# Which asset classes each risk type loads on (by asset-table row index).
EXPOSURE = {
    "interest_up": [7, 8, 9, 10, 11],
    "interest_down": [7, 8, 9, 10, 11, 12],  # cash drags slightly in the down scenario
    "equity_1": [2, 3, 4],
    "equity_2": [5, 6],
    "property": [0, 1],
    "spread": [8, 9, 11],
    "currency_up": [1, 2, 4, 5],
    "currency_down": [1, 2, 4, 5],
}

ANCHOR_HIGH = 2.24  # all cash
ANCHOR_LOW = 1.10  # 100% Private Equity; keeps random mixes above ~0.9

P_MARKET = {
    rho: np.array(
        [
            [1.0, rho, rho, rho, 0.25],
            [rho, 1.0, 0.75, 0.75, 0.25],
            [rho, 0.75, 1.0, 0.5, 0.25],
            [rho, 0.75, 0.5, 1.0, 0.25],
            [0.25, 0.25, 0.25, 0.25, 1.0],
        ]
    )
    for rho in (0.0, 0.5)
}


def market_risk(x8: np.ndarray, c1: float) -> float:
    agg = np.array(
        [
            max(x8[0], x8[1]),
            np.sqrt(max(x8[2] ** 2 + 1.5 * x8[2] * x8[3] + x8[3] ** 2, 0.0)),
            x8[4],
            x8[5],
            max(x8[6], x8[7]),
        ]
    )
    q = max(agg @ P_MARKET[0.0] @ agg, agg @ P_MARKET[0.5] @ agg)
    return float(np.sqrt(max(q, 0.0) + c1 * c1))


def main() -> None:
    rows = list(csv.DictReader((DATA_DIR / "example_assets.csv").open()))
    names = [r["name"] for r in rows]
    sigma = np.array([float(r["volatility"]) for r in rows]) / 100.0
    n = len(names)

    rng = np.random.default_rng(SEED)
    loadings = np.zeros((len(RISK_TYPES), n))
    for k, risk in enumerate(RISK_TYPES):
        exposed = EXPOSURE[risk]
        for j in range(n):
            base = sigma[j] if sigma[j] > 0 else 0.01
            if j in exposed:
                loadings[k, j] = base * rng.uniform(0.6, 1.4)
            else:
                loadings[k, j] = base * rng.uniform(0.0, 0.12)

    A = -loadings
    b = rng.uniform(0.28, 0.42, size=len(RISK_TYPES))
    c1, c3, c4 = 0.02, 0.05, 0.01

    w_cash = np.zeros(n)
    w_cash[names.index("Cash")] = 1.0
    w_pe = np.zeros(n)
    w_pe[names.index("Private Equity")] = 1.0

    def g(w: np.ndarray) -> float:
        m = market_risk(A @ w + b, c1)
        return float(np.sqrt(m * m + c3 * m + c4))

    g_hi, g_lo = g(w_cash), g(w_pe)
    c2 = (ANCHOR_HIGH - ANCHOR_LOW) / (g_hi - g_lo)
    c5 = ANCHOR_LOW - c2 * g_lo

    lines = [
        "# Synthetic solvency calibration (seeded stand-in, NOT the proprietary",
        "# company data). Generated once by scripts/make_synthetic_calibration.py",
        f"# with seed {SEED}; committed so the full pipeline runs end-to-end.",
        "provenance: synthetic-calibration",
        f"seed: {SEED}",
        "A:",
    ]
    for k, risk in enumerate(RISK_TYPES):
        row = ", ".join(repr(float(v)) for v in A[k])
        lines.append(f"  - [{row}]  # {risk}")
    lines.append("b: [" + ", ".join(repr(float(v)) for v in b) + "]")
    for key, val in (("c1", c1), ("c2", c2), ("c3", c3), ("c4", c4), ("c5", c5)):
        lines.append(f"{key}: {float(val)!r}")
    out = DATA_DIR / "synthetic_calibration.yaml"
    out.write_text("\n".join(lines) + "\n")

    ratios = []
    for _ in range(2000):
        w = rng.dirichlet(np.ones(n))
        ratios.append(c2 * g(w) + c5)
    print(f"wrote {out}")
    print(f"ratio(all cash) = {c2 * g_hi + c5:.4f}, ratio(100% PE) = {c2 * g_lo + c5:.4f}")
    print(f"random-portfolio ratio band: [{min(ratios):.4f}, {max(ratios):.4f}]")


if __name__ == "__main__":
    main()
