"""Caplet, floorlet and swaption valuation plus implied-vol surfaces.

Fourier route (any supported driver): a caplet is a call on the forward
bond-price quotient exp(A_k + <B_k, X_{T_k}>), priced as

    C = (B(0,T_{k+1}) K' / 2 pi)
        * int_R K'^{-(R-iv)} E[(e^Z)^{R-iv}] / ((R-iv)(R-1-iv)) dv,

with K' = 1 + delta K, damping R > 1 inside the strip where the
forward-price moment generating function is finite.  The same integrand
with R < 0 prices the floorlet.  A payer swaption on [T_i, T_m] is a put
on a coupon bond; its payoff transform has a closed form in terms of the
unique zero of the exercise function (:func:`swaption_root`).

Chi-square route (square-root drivers only): log-forward prices follow a
location-scale non-central chi-square law under each forward measure, so
caplets and swaptions reduce to weighted complements of the non-central
chi-square CDF; with two independent square-root factors the caplet needs
the CDF of a positive linear combination of non-central chi-squares.

Implied volatilities invert Black's futures formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .distributions import ChiSqMixSpec, chisq_mix_sf, ncchi2_sf
from .errors import (AffineLiborError, ConvergenceFailure, DampingOutOfStrip,
                     InvalidParameter, ModelMismatch, NoSignChange,
                     OutOfBounds, QuadratureFailure)
from .model import (CalibratedModel, forward_exponents, phi_psi_batch,
                    transform)
from .processes import CirParams, ProductProcess
from .quadrature import semi_infinite_oscillatory

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CapletSpec:
    """Call (or, for floorlets, put) on the period-k simple rate.

    ``bold_strike`` is 1 + delta * strike; it is filled in from the model
    tenor when left unset.
    """

    period_index: int
    strike: float
    bold_strike: float | None = None

    def __post_init__(self):
        if self.strike < 0.0:
            raise InvalidParameter("strike rate must be non-negative")
        if self.bold_strike is not None and self.bold_strike < 1.0:
            raise InvalidParameter("bold strike must be at least one")

    def with_model(self, m: CalibratedModel) -> "CapletSpec":
        if not 1 <= self.period_index <= m.n_periods - 1:
            raise IndexError(f"caplet index {self.period_index} outside "
                             f"1..{m.n_periods - 1}")
        bold = 1.0 + m.delta * self.strike
        if self.bold_strike is not None and \
                abs(self.bold_strike - bold) > 1e-12:
            raise InvalidParameter("bold strike inconsistent with tenor")
        return replace(self, bold_strike=bold)


@dataclass(frozen=True)
class SwaptionSpec:
    """Payer swaption: option at T_i on a swap running to T_m."""

    start_index: int
    end_index: int
    strike: float

    def __post_init__(self):
        if self.start_index >= self.end_index:
            raise InvalidParameter("need start_index < end_index")
        if self.strike < 0.0:
            raise InvalidParameter("strike rate must be non-negative")

    def coupons(self, delta: float) -> np.ndarray:
        """c_k = delta K for k < m, plus the unit redemption at k = m."""
        c = np.full(self.end_index - self.start_index, delta * self.strike)
        c[-1] += 1.0
        return c


@dataclass(frozen=True)
class QuadratureSettings:
    """Contour and accuracy knobs for the Fourier pricers.

    damping = None picks the documented default inside the admissible
    strip; truncation widens (or shrinks) the first integration panel.
    """

    damping: float | None = None
    truncation: float | None = None
    rel_tol: float = 1e-9


DEFAULT_QUADRATURE = QuadratureSettings()


@dataclass(frozen=True)
class PriceResult:
    """Price with quadrature diagnostics (and the exercise root for swaptions)."""

    price: float
    error_estimate: float
    damping: float | None
    root: float | None = None


def _damping_strip(psi_low: np.ndarray, psi_diff: np.ndarray,
                   sup: np.ndarray):
    """Admissible real interval for v in psi_low + v * psi_diff < sup."""
    lo, hi = -math.inf, math.inf
    for j in range(psi_low.size):
        room = sup[j] - psi_low[j]
        d = psi_diff[j]
        if d > 0.0:
            hi = min(hi, room / d)
        elif d < 0.0:
            lo = max(lo, room / d)
        elif room <= 0.0:
            raise DampingOutOfStrip("transform argument pinned outside domain")
    return lo, hi


def _least_magnitude_damping(magnitude, candidates):
    """Candidate with the smallest finite |integrand(0)|.

    A contour whose dampened integrand is large at the origin only
    recovers a small price through massive cancellation, so the damping
    is picked to minimise that magnitude (the strip midpoint is always
    among the candidates).
    """
    best, best_mag = None, math.inf
    for r in candidates:
        with np.errstate(over="ignore", invalid="ignore"):
            mag = float(np.abs(magnitude(r)))
        if math.isfinite(mag) and mag < best_mag:
            best, best_mag = r, mag
    if best is None:
        raise DampingOutOfStrip("no usable damping candidate in the strip")
    return best


def _call_damping_candidates(hi: float):
    if not math.isfinite(hi):
        return [2.0, 5.0, 25.0, 125.0]
    span = hi - 1.0
    grid = [1.0 + span * g for g in
            (0.5, 0.25, 0.1, 0.04, 0.015, 0.006, 0.0025, 0.001)]
    return [r for r in grid if 1.0 < r < hi]


def _put_damping_candidates(lo: float):
    if not math.isfinite(lo):
        return [-0.5, -1.0, -2.0, -8.0, -32.0]
    return [g * lo for g in (0.5, 0.25, 0.1, 0.04, 0.015, 0.006)]


def _caplet_context(m: CalibratedModel, c: CapletSpec):
    c = c.with_model(m)
    k = c.period_index
    t_fix = m.tenor.date(k)
    hrz = m.horizon - t_fix
    pk = transform(m.process, hrz, m.u(k), horizon=m.horizon)
    pk1 = transform(m.process, hrz, m.u(k + 1), horizon=m.horizon)
    return c, k, t_fix, np.real(pk.phi - pk1.phi), np.real(pk.psi), \
        np.real(pk1.psi), float(np.real(pk1.phi))


def _fourier_caplet_integral(m, c, q, want_call: bool):
    c, k, t_fix, a_k, psi_k, psi_k1, phi_k1 = _caplet_context(m, c)
    sup = np.atleast_1d(m.process.domain_sup(t_fix)) if t_fix > 0.0 else \
        np.full(m.process.dim, np.inf)
    lo, hi = _damping_strip(psi_k1, psi_k - psi_k1, sup)
    process, x0 = m.process, m.x0
    phi_k = a_k + phi_k1
    log_bold = math.log(c.bold_strike)

    # Re(z) is constant along the contour, so the strip bounds above decide
    # admissibility once and for all nodes.
    def make_integrand(damping):
        def integrand(v):
            z = damping - 1j * np.asarray(v, dtype=float)
            blend = z[:, None] * psi_k[None, :] \
                + (1.0 - z[:, None]) * psi_k1[None, :]
            phi_in, psi_in = phi_psi_batch(process, t_fix, blend)
            log_mgf = (z * phi_k + (1.0 - z) * phi_k1 + phi_in
                       + psi_in @ x0.astype(complex))
            return np.exp(log_mgf - z * log_bold) / (z * (z - 1.0))

        return integrand

    def magnitude_at_origin(r):
        return make_integrand(r)(np.zeros(1))[0]

    if want_call:
        if hi <= 1.0:
            raise DampingOutOfStrip(
                f"strip upper end {hi} leaves no damping above 1")
        if q.damping is not None:
            damping = q.damping
            if not 1.0 < damping < hi:
                raise DampingOutOfStrip(
                    f"damping {damping} outside ({1.0}, {hi})")
        else:
            candidates = _call_damping_candidates(hi)
            if math.isfinite(hi):
                candidates.append(0.5 * (1.0 + hi))
            damping = _least_magnitude_damping(magnitude_at_origin,
                                               candidates)
    else:
        if lo >= 0.0:
            raise DampingOutOfStrip("strip does not extend below 0")
        if q.damping is not None:
            damping = q.damping
            if not lo < damping < 0.0:
                raise DampingOutOfStrip(
                    f"damping {damping} outside ({lo}, {0.0})")
        else:
            candidates = _put_damping_candidates(lo)
            damping = _least_magnitude_damping(magnitude_at_origin,
                                               candidates)
    integrand = make_integrand(damping)

    width = q.truncation if q.truncation is not None else 64.0
    integral, err = semi_infinite_oscillatory(
        integrand, initial_width=width, rel_tol=q.rel_tol)
    pref = m.bond0(m.n_periods) * c.bold_strike / (2.0 * math.pi)
    price = pref * 2.0 * float(np.real(integral))
    err_abs = pref * 2.0 * float(abs(err))
    if err_abs > 1e-3 * max(abs(price), 1e-6):
        raise QuadratureFailure(
            f"caplet quadrature error {err_abs:.2e} out of control")
    return PriceResult(max(price, 0.0), err_abs, damping)


def caplet_fourier(m: CalibratedModel, c: CapletSpec,
                   q: QuadratureSettings = DEFAULT_QUADRATURE) -> PriceResult:
    """Caplet price by Fourier inversion of the forward-price MGF."""
    return _fourier_caplet_integral(m, c, q, want_call=True)


def floorlet_fourier(m: CalibratedModel, c: CapletSpec,
                     q: QuadratureSettings = DEFAULT_QUADRATURE
                     ) -> PriceResult:
    """Floorlet price: same transform kernel, damping below zero."""
    return _fourier_caplet_integral(m, c, q, want_call=False)


def _require_cir(m: CalibratedModel) -> CirParams:
    if not isinstance(m.process, CirParams):
        raise ModelMismatch("closed form requires a one-factor square-root "
                            f"driver, got {type(m.process).__name__}")
    p = m.process
    if p.eta <= 0.0 or p.lam * p.theta <= 0.0:
        raise ModelMismatch("closed form needs eta > 0 and lam * theta > 0 "
                            "(positive degrees of freedom)")
    return p


def caplet_cir_closed(m: CalibratedModel, c: CapletSpec) -> PriceResult:
    """Closed-form caplet for the one-factor square-root driver.

    The log-forward price is location-scale non-central chi-square under
    both adjacent forward measures, with scale and non-centrality divided
    by zeta_1 (measure T_k) respectively zeta_2 (measure T_{k+1}), where
    zeta_m = 1 - 2 eta^2 b(T_k) psi_{T_N - T_k}(u_m).
    """
    p = _require_cir(m)
    c = c.with_model(m)
    k = c.period_index
    t_fix = m.tenor.date(k)
    fe = forward_exponents(m, k, k + 1, t_fix)
    b_k = float(fe.B[0])
    if b_k == 0.0:  # flat period: deterministic forward price
        intrinsic = m.bond0(k + 1) * max(math.exp(fe.A) - c.bold_strike, 0.0)
        return PriceResult(intrinsic, 0.0, None)
    nu = p.lam * p.theta / p.eta ** 2
    eb = p.eta ** 2 * p.b(t_fix)
    x = float(m.x0[0])
    hrz = m.horizon - t_fix
    y = math.log(c.bold_strike) - fe.A
    tails = []
    for idx in (k, k + 1):
        psi_u = float(np.real(
            transform(p, hrz, m.u(idx), horizon=m.horizon).psi[0]))
        zeta = 1.0 - 2.0 * eb * psi_u
        sigma = b_k * eb / zeta
        alpha = x * p.a(t_fix) / (eb * zeta)
        tails.append(ncchi2_sf(y / sigma, nu, alpha))
    price = m.bond0(k) * tails[0] \
        - c.bold_strike * m.bond0(k + 1) * tails[1]
    return PriceResult(max(price, 0.0), 0.0, None)


def floorlet_cir_closed(m: CalibratedModel, c: CapletSpec) -> PriceResult:
    """Closed-form floorlet via cap-floor parity on the closed-form caplet."""
    cap = caplet_cir_closed(m, c)
    c = c.with_model(m)
    k = c.period_index
    parity = m.bond0(k) - c.bold_strike * m.bond0(k + 1)
    return PriceResult(max(cap.price - parity, 0.0), cap.error_estimate, None)


def caplet_cir2f_closed(m: CalibratedModel, c: CapletSpec) -> PriceResult:
    """Closed-form caplet for independent square-root factors.

    The log-forward price is a shifted positive linear combination of
    independent non-central chi-squares; each factor contributes scale,
    degrees of freedom and non-centrality exactly as in the one-factor
    formula, with its own zeta per forward measure.
    """
    if not (isinstance(m.process, ProductProcess)
            and all(isinstance(f, CirParams) for f in m.process.factors)):
        raise ModelMismatch("2-factor closed form requires independent "
                            "square-root factors")
    c = c.with_model(m)
    k = c.period_index
    t_fix = m.tenor.date(k)
    fe = forward_exponents(m, k, k + 1, t_fix)
    y = math.log(c.bold_strike) - fe.A
    hrz = m.horizon - t_fix
    tails = []
    for idx in (k, k + 1):
        sigmas, nus, alphas = [], [], []
        u = m.u(idx)
        for j, f in enumerate(m.process.factors):
            b_j = float(fe.B[j])
            x_j = float(m.x0[j])
            if b_j == 0.0 or (f.lam * f.theta == 0.0 and x_j == 0.0):
                continue  # flat or degenerate factor: point mass at zero
            if f.eta <= 0.0 or f.lam * f.theta <= 0.0:
                raise ModelMismatch(
                    f"factor {j} needs eta > 0 and lam * theta > 0")
            eb = f.eta ** 2 * f.b(t_fix)
            psi_u = float(np.real(
                transform(f, hrz, u[j:j + 1], horizon=m.horizon).psi[0]))
            zeta = 1.0 - 2.0 * eb * psi_u
            sigmas.append(b_j * eb / zeta)
            nus.append(f.lam * f.theta / f.eta ** 2)
            alphas.append(x_j * f.a(t_fix) / (eb * zeta))
        if not sigmas:
            tails.append(1.0 if y < 0.0 else 0.0)
        else:
            mix = ChiSqMixSpec(np.array(sigmas), np.array(nus),
                               np.array(alphas))
            tails.append(chisq_mix_sf(y, mix))
    price = m.bond0(k) * tails[0] \
        - c.bold_strike * m.bond0(k + 1) * tails[1]
    return PriceResult(max(price, 0.0), 0.0, None)


def _swaption_pairs(m: CalibratedModel, s: SwaptionSpec):
    if not 1 <= s.start_index < s.end_index <= m.n_periods:
        raise IndexError("swaption indices outside the tenor")
    t_ex = m.tenor.date(s.start_index)
    pairs = [forward_exponents(m, k, s.start_index, t_ex)
             for k in range(s.start_index + 1, s.end_index + 1)]
    A = np.array([fe.A for fe in pairs])
    B = np.array([float(fe.B[0]) for fe in pairs])
    return t_ex, A, B


def swaption_root(m: CalibratedModel, s: SwaptionSpec) -> float:
    """Unique zero of the exercise function f(x) = 1 - sum c_k e^{A_k + B_k x}.

    The coefficients B_k are non-positive (one strictly, whenever some
    initial rate is positive), so f is strictly increasing; the root is
    bracketed by doubling and polished by bisection plus Newton steps to
    |f| <= 1e-13.
    """
    if m.process.dim != 1:
        raise ModelMismatch("swaption exercise root needs a one-dimensional "
                            "driver")
    t_ex, A, B = _swaption_pairs(m, s)
    coup = s.coupons(m.delta)
    if np.all(B == 0.0):
        raise NoSignChange("degenerate swaption: exercise function is "
                           "constant in the state")

    def f(x):
        return 1.0 - float(coup @ np.exp(A + B * x))

    def fprime(x):
        return -float(coup @ (B * np.exp(A + B * x)))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if f(lo) < 0.0:
            break
        lo *= 2.0
    else:
        raise NoSignChange("no sign change: f stays positive")
    for _ in range(200):
        if f(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise NoSignChange("no sign change: f stays negative")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    for _ in range(8):
        fx = f(root)
        if abs(fx) <= 1e-15:
            break
        root -= fx / fprime(root)
    if abs(f(root)) > 1e-13:
        raise ConvergenceFailure(
            f"swaption root residual {abs(f(root)):.2e} above 1e-13")
    return float(root)


def swaption_fourier(m: CalibratedModel, s: SwaptionSpec,
                     q: QuadratureSettings = DEFAULT_QUADRATURE
                     ) -> PriceResult:
    """Payer swaption by Fourier inversion under the T_i-forward measure.

    Uses the payoff transform

        fhat(z) = e^{iz Y} sum_k c_k e^{A_k + B_k Y} (-B_k) / (iz (B_k + iz)),

    an algebraically equivalent form of the textbook expression in which
    the two O(1/z) terms have been cancelled explicitly (the sum of
    exercise-boundary coupon values is one by definition of the root Y),
    so the integrand decays like 1/z^2 without catastrophic cancellation.
    """
    if m.process.dim != 1:
        raise ModelMismatch("Fourier swaption pricing needs a "
                            "one-dimensional driver")
    root = swaption_root(m, s)
    t_ex, A, B = _swaption_pairs(m, s)
    coup = s.coupons(m.delta)
    i = s.start_index
    hrz = m.horizon - t_ex
    w = float(np.real(transform(m.process, hrz, m.u(i), horizon=m.horizon)
                      .psi[0]))
    sup = float(m.process.domain_sup(t_ex)[0]) if t_ex > 0.0 else math.inf
    strip_hi = sup - w
    if strip_hi <= 0.0:
        raise DampingOutOfStrip("tilted domain is empty")
    damping = q.damping if q.damping is not None else \
        0.5 * min(1.0, strip_hi)
    if not 0.0 < damping < strip_hi:
        raise DampingOutOfStrip(f"damping {damping} outside (0, {strip_hi})")

    process, x0 = m.process, m.x0
    boundary = coup * np.exp(A + B * root)
    phi0, psi0 = phi_psi_batch(process, t_ex, np.full((1, 1), w + 0j))
    base = phi0[0] + psi0[0] @ x0.astype(complex)

    def integrand(v):
        z_mgf = (damping - 1j * v)[:, None]  # argument of the tilted MGF
        phi1, psi1 = phi_psi_batch(process, t_ex, w + z_mgf)
        log_mgf = phi1 + psi1 @ x0.astype(complex) - base
        iz = 1j * v - damping  # iz for z = v + i*damping
        fhat = np.exp(iz * root) * (
            (boundary[None, :] * (-B)[None, :])
            / (iz[:, None] * (B[None, :] + iz[:, None]))).sum(axis=1)
        return np.exp(log_mgf) * fhat

    width = q.truncation if q.truncation is not None else 64.0
    integral, err = semi_infinite_oscillatory(
        integrand, initial_width=width, rel_tol=q.rel_tol)
    pref = m.bond0(i) / (2.0 * math.pi)
    price = pref * 2.0 * float(np.real(integral))
    err_abs = pref * 2.0 * float(abs(err))
    if err_abs > 1e-3 * max(abs(price), 1e-6):
        raise QuadratureFailure(
            f"swaption quadrature error {err_abs:.2e} out of control")
    return PriceResult(max(price, 0.0), err_abs, damping, root=root)


def swaption_cir_closed(m: CalibratedModel, s: SwaptionSpec) -> PriceResult:
    """Closed-form payer swaption for the one-factor square-root driver.

    Decomposes the payoff over the exercise region {X_{T_i} >= Y} and
    evaluates each forward-measure probability through the non-central
    chi-square survival function with per-maturity zeta
     zeta_k = 1 - 2 eta^2 b(T_i) psi_{T_N - T_i}(u_k).
    """
    p = _require_cir(m)
    root = swaption_root(m, s)
    t_ex = m.tenor.date(s.start_index)
    coup = s.coupons(m.delta)
    nu = p.lam * p.theta / p.eta ** 2
    eb = p.eta ** 2 * p.b(t_ex)
    x = float(m.x0[0])
    hrz = m.horizon - t_ex

    def tail(idx):
        psi_u = float(np.real(
            transform(p, hrz, m.u(idx), horizon=m.horizon).psi[0]))
        zeta = 1.0 - 2.0 * eb * psi_u
        sigma = eb / zeta
        alpha = x * p.a(t_ex) / (eb * zeta)
        return ncchi2_sf(root / sigma, nu, alpha)

    price = m.bond0(s.start_index) * tail(s.start_index)
    for pos, k in enumerate(range(s.start_index + 1, s.end_index + 1)):
        price -= coup[pos] * m.bond0(k) * tail(k)
    return PriceResult(max(price, 0.0), 0.0, None, root=root)


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


def black76_price(forward: float, strike: float, expiry: float, vol: float,
                  annuity: float, call: bool = True) -> float:
    """Black's futures formula for a caplet-style payoff, undiscounted
    forward measure expectation times ``annuity``."""
    intrinsic = max(forward - strike, 0.0) if call \
        else max(strike - forward, 0.0)
    if vol <= 0.0 or expiry <= 0.0 or strike <= 0.0 or forward <= 0.0:
        return annuity * intrinsic
    total = vol * math.sqrt(expiry)
    d1 = (math.log(forward / strike) + 0.5 * total * total) / total
    d2 = d1 - total
    if call:
        return annuity * (forward * _norm_cdf(d1) - strike * _norm_cdf(d2))
    return annuity * (strike * _norm_cdf(-d2) - forward * _norm_cdf(-d1))


def black76_implied_vol(price: float, forward_rate: float, strike: float,
                        expiry: float, annuity: float,
                        tol: float = 1e-10) -> float:
    """Volatility reproducing ``price`` in Black's formula within ``tol``.

    Newton iteration safeguarded by a maintained bracket; prices outside
    the static bounds [intrinsic, annuity * forward] raise OutOfBounds.
    """
    if annuity <= 0.0 or forward_rate <= 0.0 or strike <= 0.0:
        raise OutOfBounds("need positive annuity, forward and strike")
    intrinsic = annuity * max(forward_rate - strike, 0.0)
    upper = annuity * forward_rate
    if price < intrinsic - tol or price > upper + tol:
        raise OutOfBounds(
            f"price {price} outside [{intrinsic}, {upper}]")
    if price <= intrinsic + tol * 1e-2 or expiry <= 0.0:
        if expiry <= 0.0 and price > intrinsic + tol:
            raise OutOfBounds("positive time value at zero expiry")
        return 0.0

    def value(v):
        return black76_price(forward_rate, strike, expiry, v, annuity)

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if value(hi) >= price:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceFailure("implied vol bracket expansion failed")
    vol = 0.5 * (lo + hi)
    sqrt_t = math.sqrt(expiry)
    for _ in range(100):
        diff = value(vol) - price
        if abs(diff) <= tol:
            return vol
        if diff > 0.0:
            hi = vol
        else:
            lo = vol
        total = vol * sqrt_t
        d1 = (math.log(forward_rate / strike) + 0.5 * total * total) / total
        vega = annuity * forward_rate * sqrt_t * \
            math.exp(-0.5 * d1 * d1) / math.sqrt(2.0 * math.pi)
        step = vol - diff / vega if vega > 1e-300 else math.nan
        vol = step if lo < step < hi else 0.5 * (lo + hi)
    raise ConvergenceFailure(f"implied vol did not reach |diff| <= {tol}")


@dataclass(frozen=True)
class SurfaceCell:
    """One (expiry, strike) entry of a caplet vol surface."""

    expiry: float
    strike: float
    price: float
    implied_vol: float
    error: str | None = None


def _closed_form_pricer(m: CalibratedModel):
    if isinstance(m.process, CirParams):
        return caplet_cir_closed
    if isinstance(m.process, ProductProcess) and \
            all(isinstance(f, CirParams) for f in m.process.factors):
        return caplet_cir2f_closed
    raise ModelMismatch("no closed-form caplet for "
                        f"{type(m.process).__name__}")


def vol_surface(m: CalibratedModel, strikes, method: str = "fourier",
                q: QuadratureSettings = DEFAULT_QUADRATURE):
    """Caplet prices and Black-76 implied vols over expiries x strikes.

    One row per caplet expiry T_k (k = 1 .. N-1, expiry-major) and strike
    (ascending).  Cells where pricing or inversion fails are emitted with
    NaN entries and the error category, never silently clamped; the cells
    are mutually independent, so the loop is trivially parallel and its
    output does not depend on evaluation order.
    """
    strikes = sorted(float(s) for s in np.atleast_1d(strikes))
    if method == "fourier":
        def pricer(mm, spec):
            return caplet_fourier(mm, spec, q)
    elif method == "closed":
        closed = _closed_form_pricer(m)

        def pricer(mm, spec):
            return closed(mm, spec)
    else:
        raise InvalidParameter(f"unknown method {method!r}")
    cells = []
    for k in range(1, m.n_periods):
        expiry = m.tenor.date(k)
        fwd = m.tenor.initial_libor(k)
        annuity = m.delta * m.bond0(k + 1)
        for strike in strikes:
            try:
                res = pricer(m, CapletSpec(k, strike))
                intrinsic = annuity * max(fwd - strike, 0.0)
                # Time value below the quadrature resolution is genuinely
                # zero (drivers with rare jumps floor the rate, making low
                # strikes intrinsic); inverting the noise would fabricate a
                # vol, so such cells are snapped to zero instead.
                if res.price <= intrinsic + max(3.0 * res.error_estimate,
                                                1e-12):
                    vol = 0.0
                else:
                    vol = black76_implied_vol(res.price, fwd, strike, expiry,
                                              annuity)
                cells.append(SurfaceCell(expiry, strike, res.price, vol))
            except AffineLiborError as exc:
                cells.append(SurfaceCell(expiry, strike, math.nan, math.nan,
                                         error=type(exc).__name__))
    return cells
