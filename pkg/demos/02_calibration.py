#!/usr/bin/env python3
"""Fitting the u-sequence to an observed discount curve.

Bond-price quotients are modelled as B(t,T_k)/B(t,T_N) = M_t^{u_k} with
M^u the exponential martingale of the driver; fitting the initial curve
means solving M_0^{u_k} = B(0,T_k)/B(0,T_N) for a decreasing sequence
u_1 >= ... >= u_N = 0.  The map xi -> M_0^{xi u_+} is continuous and
strictly increasing, so each u_k comes from a bracketed bisection; for a
one-dimensional driver the sequence is unique.

Uses the Euro zone zero-coupon curve of 2002-02-19 (data/).
"""

from pathlib import Path

import numpy as np

from affine_libor import (CirParams, GammaOuParams, estimate_gamma_x,
                          fit_term_structure, libor_rate, martingale_value)
from affine_libor.cli import load_tenor_csv

tenor = load_tenor_csv(str(Path(__file__).resolve().parents[1]
                           / "data" / "zcb_euro_2002-02-19.csv"))
print(f"curve: {tenor.n_periods} semi-annual discounts out to "
      f"{tenor.date(tenor.n_periods)}y")

for name, proc in (
        ("square-root", CirParams(0.001, 0.50, 0.59, 1.25)),
        ("gamma-OU", GammaOuParams(0.01, 2.0, 1.0, 1.25))):
    gamma = estimate_gamma_x(proc, tenor.date(tenor.n_periods))
    model = fit_term_structure(tenor, proc, x0=np.array([1.25]))
    resid = max(abs(martingale_value(model, 0.0, model.x0, model.u(k))
                    - tenor.ratios()[k - 1])
                for k in range(1, tenor.n_periods + 1))
    print(f"\n{name}: moment bound gamma_X = {gamma}, "
          f"max fit residual {resid:.2e}")
    print(f"  {'k':>3}{'T_k':>6}{'u_k':>12}{'L(0,T_k)':>10}")
    for k in range(1, tenor.n_periods + 1):
        rate = libor_rate(model, k, 0.0, model.x0) \
            if k < tenor.n_periods else float("nan")
        print(f"  {k:>3}{tenor.date(k):>6.2f}{model.u(k)[0]:>12.8f}"
              f"{rate:>10.4%}")
