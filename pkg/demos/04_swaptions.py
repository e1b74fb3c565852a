#!/usr/bin/env python3
"""Swaption pricing: exercise root, Fourier integral, chi-square closed form.

A payer swaption is a put on a coupon bond with unit exercise price.  For
a one-dimensional driver the exercise function

    f(x) = 1 - sum_k c_k exp(A_{k,i} + B_{k,i} x)

is strictly increasing with a unique zero Y; the payoff transform then
has a closed form and one dampened Fourier integral prices the option.
For the square-root driver the same decomposition over {X >= Y} gives a
sum of non-central chi-square tails.
"""

from pathlib import Path

import numpy as np

from affine_libor import (CirParams, RngStream, SwaptionSpec,
                          fit_term_structure, mc_swaption,
                          swaption_cir_closed, swaption_fourier,
                          swaption_root)
from affine_libor.cli import load_tenor_csv

tenor = load_tenor_csv(str(Path(__file__).resolve().parents[1]
                           / "data" / "zcb_euro_2002-02-19.csv"))
model = fit_term_structure(tenor, CirParams(0.001, 0.50, 0.59, 1.25),
                           x0=np.array([1.25]))

print("payer swaption on the 1y-3y swap (T_2 to T_6), strike 3%")
spec = SwaptionSpec(2, 6, 0.03)
root = swaption_root(model, spec)
fourier = swaption_fourier(model, spec)
closed = swaption_cir_closed(model, spec)
mc, se = mc_swaption(model, 2, 6, 0.03, 1_000_000, RngStream(3))
print(f"  exercise root Y = {root:.10f}")
print(f"  fourier     {fourier.price:.10f}  (quad err "
      f"{fourier.error_estimate:.1e})")
print(f"  closed form {closed.price:.10f}")
print(f"  monte carlo {mc:.10f}  (+- {se:.1e})")

print("\nstrike sweep, start T_1, maturity T_10")
print(f"  {'K':>6}{'fourier':>14}{'closed':>14}{'rel gap':>10}")
for strike in (0.01, 0.02, 0.03, 0.04, 0.05, 0.06):
    s = SwaptionSpec(1, 10, strike)
    f = swaption_fourier(model, s).price
    c = swaption_cir_closed(model, s).price
    print(f"  {strike:>6.3f}{f:>14.8f}{c:>14.8f}{abs(f / c - 1):>10.1e}")

print("\nsingle-period payer swaption == caplet on the same period")
from affine_libor import CapletSpec, caplet_cir_closed
one = swaption_fourier(model, SwaptionSpec(3, 4, 0.03)).price
cap = caplet_cir_closed(model, CapletSpec(3, 0.03)).price
print(f"  swaption(3,4) {one:.10f} vs caplet(3) {cap:.10f}")
