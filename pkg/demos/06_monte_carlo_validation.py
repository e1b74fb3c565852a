#!/usr/bin/env python3
"""The exact-transition Monte Carlo oracle validating the analytics.

Both samplers draw from the exact conditional law (non-central chi-square
transitions for the square-root driver, decayed compound Poisson jumps
for gamma-OU), so any statistically significant disagreement with the
transform-based numbers would flag a real defect.  The checks:

* every martingale M^{u_k} has constant expectation and stays >= 1 on
  every path;
* forward-measure Radon-Nikodym weights M^{u_k}_t / M^{u_k}_0 average
  to one;
* simulated rates are non-negative pathwise.
"""

from pathlib import Path

import numpy as np

from affine_libor import (CirParams, GammaOuParams, RngStream,
                          fit_term_structure, forward_exponents,
                          forward_measure_weights, martingale_check,
                          simulate_process)
from affine_libor.cli import load_tenor_csv

N_PATHS = 200_000
tenor = load_tenor_csv(str(Path(__file__).resolve().parents[1]
                           / "data" / "zcb_euro_2002-02-19.csv"))

for name, proc in (
        ("square-root", CirParams(0.001, 0.50, 0.59, 1.25)),
        ("gamma-OU", GammaOuParams(0.01, 2.0, 1.0, 1.25))):
    model = fit_term_structure(tenor, proc, x0=np.array([1.25]))
    horizon = model.horizon
    print(f"\n{name}: martingale checks at {N_PATHS} paths")
    print(f"  {'k':>3}{'t':>6}{'expected':>12}{'mean':>12}{'z':>8}"
          f"{'min':>10}")
    for k in (1, 5, 10):
        for t in (tenor.date(1), 0.5 * horizon, horizon):
            rep = martingale_check(model, k, t, N_PATHS,
                                   RngStream(2024, k * 7 + int(t * 2)))
            print(f"  {k:>3}{t:>6.2f}{rep.expected:>12.6f}"
                  f"{rep.sample_mean:>12.6f}{rep.z_score:>8.2f}"
                  f"{rep.min_value:>10.6f}")

    t1 = tenor.date(1)
    batch = simulate_process(model.process, [t1], N_PATHS, RngStream(5))
    x = batch.at(t1)
    zs = []
    for k in range(1, tenor.n_periods + 1):
        w = forward_measure_weights(model, k, t1, x)
        se = w.std(ddof=1) / np.sqrt(N_PATHS)
        zs.append(0.0 if se == 0.0 else abs(w.mean() - 1.0) / se)
    print(f"  weight means: worst |z| over k = {max(zs):.2f}")

    min_rate = min(
        float(((np.exp(fe.A + x @ fe.B) - 1.0) / model.delta).min())
        for fe in (forward_exponents(model, k, k + 1, t1)
                   for k in range(1, tenor.n_periods)))
    print(f"  minimum simulated rate across periods: {min_rate:.3e}")
