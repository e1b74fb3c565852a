"""Bond-ratio term-structure model driven by an affine factor process.

Quotients of zero-coupon bonds are modelled by the exponential
martingales

    M_t^u = exp(phi_{T_N - t}(u) + <psi_{T_N - t}(u), X_t>),

one parameter vector u_k per tenor date, decreasing in k with u_N = 0:

    B(t, T_k) / B(t, T_N) = M_t^{u_k}.

Because psi is order-preserving this produces non-negative simple forward
rates, and under the terminal measure the driving process stays
time-homogeneous.  Calibration reduces to a sequence of scalar
root-finding problems along one direction in the transform domain
(:func:`fit_term_structure`); the change to the T_k-forward measure is an
exponential tilt, so the model stays affine under every forward measure
(:func:`forward_measure_exponents`, :func:`forward_price_mgf`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .affine_core import TransformPair, transform
from .errors import (AffineLiborError, ConvergenceFailure, DomainViolation,
                     HorizonViolation, InfeasibleCurve, InvalidParameter,
                     NonMonotoneCurve)

_RATIO_SLACK = 1e-13


@dataclass(frozen=True)
class TenorStructure:
    """Tenor dates T_0 < ... < T_N with discounts B(0, T_k), k = 1..N.

    ``dates`` has length N + 1 (it includes T_0), ``discounts`` length N.
    Spacing must equal ``delta`` throughout.
    """

    dates: np.ndarray
    delta: float
    discounts: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype=float)
        disc = np.asarray(self.discounts, dtype=float)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "discounts", disc)
        if self.delta <= 0.0:
            raise InvalidParameter("accrual delta must be positive")
        if dates.ndim != 1 or dates.size != disc.size + 1:
            raise InvalidParameter(
                "need len(dates) == len(discounts) + 1 (dates include T_0)")
        gaps = np.diff(dates)
        if np.any(gaps <= 0.0):
            raise InvalidParameter("tenor dates must be strictly increasing")
        if np.any(np.abs(gaps - self.delta) > 1e-9 * max(1.0, self.delta)):
            raise InvalidParameter("tenor dates must be spaced by delta")
        if np.any(disc <= 0.0) or np.any(disc > 1.0):
            raise InvalidParameter("discount factors must lie in (0, 1]")

    @classmethod
    def from_curve(cls, maturities, discounts, delta: float | None = None):
        """Build from dated discounts only; T_0 = first maturity - delta."""
        maturities = np.asarray(maturities, dtype=float)
        if maturities.size < 2:
            raise InvalidParameter("need at least two tenor dates")
        if delta is None:
            delta = float(maturities[1] - maturities[0])
        dates = np.concatenate([[maturities[0] - delta], maturities])
        return cls(dates, delta, np.asarray(discounts, dtype=float))

    @property
    def n_periods(self) -> int:
        return self.discounts.size

    def date(self, k: int) -> float:
        """T_k for k = 0..N."""
        if not 0 <= k <= self.n_periods:
            raise IndexError(f"tenor index {k} outside 0..{self.n_periods}")
        return float(self.dates[k])

    def bond(self, k: int) -> float:
        """B(0, T_k) for k = 1..N."""
        if not 1 <= k <= self.n_periods:
            raise IndexError(f"bond index {k} outside 1..{self.n_periods}")
        return float(self.discounts[k - 1])

    def ratios(self) -> np.ndarray:
        """B(0, T_k) / B(0, T_N) for k = 1..N."""
        return self.discounts / self.discounts[-1]

    def initial_libor(self, k: int) -> float:
        """Simple forward rate fixed at T_k, k = 1..N-1."""
        return (self.bond(k) / self.bond(k + 1) - 1.0) / self.delta


@dataclass(frozen=True)
class ForwardExponents:
    """Log-affine representation exp(A + <B, x>) of a bond-price quotient."""

    A: float
    B: np.ndarray


@dataclass(frozen=True)
class CalibratedModel:
    """Driving process, initial state and the fitted u-sequence."""

    process: object
    x0: np.ndarray
    tenor: TenorStructure
    us: np.ndarray  # shape (N, d), row k-1 holds u_k; last row is zero

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "us", np.asarray(self.us, dtype=float))
        # The canonical choice is strictly positive (it resolves the scaling
        # ambiguity of the martingale parameters); a zero component is only
        # admitted so that degenerate factors can be represented exactly.
        if np.any(x0 < 0.0) or not np.any(x0 > 0.0):
            raise InvalidParameter("initial state must be non-negative and "
                                   "not identically zero")
        if self.us.shape != (self.tenor.n_periods, self.process.dim):
            raise InvalidParameter("u-sequence shape does not match tenor")

    @property
    def horizon(self) -> float:
        return self.tenor.date(self.tenor.n_periods)

    @property
    def n_periods(self) -> int:
        return self.tenor.n_periods

    @property
    def delta(self) -> float:
        return self.tenor.delta

    def u(self, k: int) -> np.ndarray:
        """Fitted parameter u_k, k = 1..N."""
        if not 1 <= k <= self.n_periods:
            raise IndexError(f"index {k} outside 1..{self.n_periods}")
        return self.us[k - 1]

    def bond0(self, k: int) -> float:
        return self.tenor.bond(k)


def phi_psi_batch(process, t: float, u_batch: np.ndarray):
    """(phi, psi) over a batch of arguments, shape (..., d); domain-checked.

    The Fourier pricers drive this with complex batches; processes without
    a closed form fall back to one Riccati solve per point.
    """
    sup = process.domain_sup(t)
    if np.any(np.real(u_batch) >= sup):
        raise DomainViolation(
            f"batch leaves the transform domain at horizon {t}")
    if getattr(process, "has_closed_form", False):
        return process.phi_psi(t, u_batch)
    flat = u_batch.reshape(-1, process.dim)
    phi = np.empty(flat.shape[0], dtype=complex)
    psi = np.empty(flat.shape, dtype=complex)
    for i, u in enumerate(flat):
        pair = transform(process, t, u)
        phi[i], psi[i] = pair.phi, pair.psi
    return (phi.reshape(u_batch.shape[:-1]),
            psi.reshape(u_batch.shape))


def martingale_value(m: CalibratedModel, t: float, x, u) -> float:
    """M_t^u = exp(phi_{T_N - t}(u) + <psi_{T_N - t}(u), x>).

    At least one for u >= 0 and x >= 0, and a martingale in t under the
    terminal measure whenever u lies in the terminal-horizon domain.
    """
    if t < 0.0 or t > m.horizon + 1e-12:
        raise HorizonViolation(f"t={t} outside [0, {m.horizon}]")
    u = np.atleast_1d(np.asarray(u))
    if np.any(np.real(u) >= m.process.domain_sup(m.horizon)):
        raise DomainViolation("u outside the terminal-horizon domain")
    pair = transform(m.process, m.horizon - t, u, horizon=m.horizon)
    return float(np.exp(pair.exponent(x)))


def estimate_gamma_x(process, horizon: float, x0=None) -> float:
    """Supremum of E[exp(<u, X_T>)] over the positive part of the domain.

    Probes the martingale exponent along a geometric approach to the
    domain boundary (doubling when the domain is unbounded); returns
    ``inf`` when the exponent keeps growing, else the boundary limit.
    The canonical initial state is all-ones.
    """
    x0 = np.full(process.dim, 1.0) if x0 is None else np.atleast_1d(
        np.asarray(x0, dtype=float))
    sup = np.atleast_1d(process.domain_sup(horizon))
    last = None
    for i in range(1, 51):
        u = np.where(np.isfinite(sup), sup * (1.0 - 2.0 ** -i),
                     float(2 ** min(i, 40)))
        try:
            g = float(np.real(
                transform(process, horizon, u, horizon=horizon).exponent(x0)))
        except AffineLiborError:
            break
        if g > math.log(1e12):
            return math.inf
        if last is not None and abs(g - last) <= 1e-10 * max(1.0, abs(g)):
            return math.exp(g)
        last = g
    return math.inf if last is None else math.exp(last)


def _exponent_at_scale(process, horizon, x0, direction, c: float) -> float:
    pair = transform(process, horizon, c * direction, horizon=horizon)
    return float(np.real(pair.exponent(x0)))


def _find_direction_scale(process, horizon, x0, direction,
                          log_target: float) -> float:
    """Scale c with martingale exponent at c*direction above log_target.

    Approaches a finite domain boundary by halving the gap, doubles
    outward when the domain is unbounded.
    """
    sup = np.atleast_1d(process.domain_sup(horizon))
    cap = float(np.min(sup / direction))
    for i in range(1, 61):
        c = cap * (1.0 - 2.0 ** -i) if math.isfinite(cap) else float(2 ** i)
        try:
            if _exponent_at_scale(process, horizon, x0, direction, c) \
                    > log_target + 1e-9:
                return c
        except AffineLiborError:
            break
        if i >= 40 and not math.isfinite(cap):
            break
    raise InfeasibleCurve(
        "driver cannot reach the largest discount ratio: "
        "sup E[exp(<u, X_T>)] too small for this curve")


def fit_term_structure(tenor: TenorStructure, process, x0=None,
                       tol: float = 1e-12, direction=None) -> CalibratedModel:
    """Fit the u-sequence to the initial discount curve.

    Picks one direction u_+ > 0 whose martingale value exceeds the largest
    ratio B(0,T_1)/B(0,T_N), then solves the strictly increasing scalar
    equation M_0^{xi u_+} = B(0,T_k)/B(0,T_N) for each k by bisection.
    u_N = 0 always; for a one-dimensional driver the result is the unique
    fitting sequence.

    Parameters
    ----------
    direction : optional positive weight vector
        Multi-factor tie-break; defaults to the diagonal (all ones).
    """
    x0 = process.initial_state() if x0 is None else np.atleast_1d(
        np.asarray(x0, dtype=float))
    ratios = tenor.ratios()
    if np.any(np.diff(ratios) > _RATIO_SLACK) or ratios[0] < 1.0 - _RATIO_SLACK:
        raise NonMonotoneCurve(
            "discount ratios must be non-increasing and >= 1 "
            "(non-negative initial forward rates)")
    n, d = tenor.n_periods, process.dim
    us = np.zeros((n, d))
    if np.all(np.abs(ratios - 1.0) <= _RATIO_SLACK):
        return CalibratedModel(process, x0, tenor, us)

    direction = np.full(d, 1.0) if direction is None else np.atleast_1d(
        np.asarray(direction, dtype=float))
    if direction.shape != (d,) or np.any(direction <= 0.0):
        raise InvalidParameter("direction must be strictly positive, length d")
    horizon = tenor.date(n)
    c_plus = _find_direction_scale(process, horizon, x0, direction,
                                   math.log(ratios[0]))

    for k in range(1, n):
        target = ratios[k - 1]
        if abs(target - 1.0) <= _RATIO_SLACK:
            continue
        lo, hi = 0.0, 1.0
        xi, value = 1.0, math.inf
        for _ in range(200):
            xi = 0.5 * (lo + hi)
            value = math.exp(_exponent_at_scale(process, horizon, x0,
                                                direction, xi * c_plus))
            if abs(value - target) <= 0.5 * tol:
                break
            if value < target:
                lo = xi
            else:
                hi = xi
        if abs(value - target) > tol:
            raise ConvergenceFailure(
                f"calibration residual {abs(value - target):.3e} above "
                f"tolerance at index {k}")
        us[k - 1] = xi * c_plus * direction
    return CalibratedModel(process, x0, tenor, us)


def forward_exponents(m: CalibratedModel, k: int, i: int,
                      t: float) -> ForwardExponents:
    """Exponents of B-ratio quotients: M_t^{u_k} / M_t^{u_i} = exp(A + <B, x>).

    With i = k + 1 this is the forward-price pair for period k; with
    i < k it is the swaption-payoff pair.
    """
    u_k, u_i = m.u(k), m.u(i)  # validates the indices
    if t < 0.0 or t > min(m.tenor.date(k), m.tenor.date(i)) + 1e-12:
        raise HorizonViolation(
            f"t={t} beyond the quotient's horizon T_{min(i, k)}")
    hrz = m.horizon - t
    pk = transform(m.process, hrz, u_k, horizon=m.horizon)
    pi = transform(m.process, hrz, u_i, horizon=m.horizon)
    return ForwardExponents(float(np.real(pk.phi - pi.phi)),
                            np.real(pk.psi - pi.psi))


def libor_rate(m: CalibratedModel, k: int, t: float, x) -> float:
    """Simple forward rate for period k at time t in state x; >= 0 always."""
    if not 1 <= k <= m.n_periods - 1:
        raise IndexError(f"LIBOR index {k} outside 1..{m.n_periods - 1}")
    fe = forward_exponents(m, k, k + 1, t)
    return (math.exp(fe.A + float(np.dot(fe.B, np.atleast_1d(x)))) - 1.0) \
        / m.delta


def libor_lower_bound(m: CalibratedModel, k: int, t: float) -> float:
    """State-independent floor (exp(A_k) - 1)/delta of the period-k rate.

    Diagnostic only: one-factor models cannot produce rates below it.
    """
    fe = forward_exponents(m, k, k + 1, t)
    return (math.exp(fe.A) - 1.0) / m.delta


def forward_measure_exponents(m: CalibratedModel, k: int, t: float,
                              v) -> TransformPair:
    """Transform pair of X_t under the T_k-forward measure.

    The measure change from the terminal measure is an exponential tilt
    by psi_{T_N - t}(u_k):

        phi^k_t(v) = phi_t(psi_{T_N - t}(u_k) + v) - phi_t(psi_{T_N - t}(u_k))

    and the same difference for psi.  A DomainViolation here means v lies
    outside the tilted domain.
    """
    u_k = m.u(k)
    if t < 0.0 or t > m.tenor.date(k) + 1e-12:
        raise HorizonViolation(f"t={t} outside [0, T_{k}]")
    v = np.atleast_1d(np.asarray(v))
    w = transform(m.process, m.horizon - t, u_k, horizon=m.horizon).psi
    shifted = transform(m.process, t, w + v, horizon=m.horizon)
    base = transform(m.process, t, w, horizon=m.horizon)
    return TransformPair(shifted.phi - base.phi, shifted.psi - base.psi)


def forward_price_mgf(m: CalibratedModel, k: int, t: float, v):
    """E under P_{T_{k+1}} of exp(v * (A_k + <B_k, X_t>)).

    Exponentially affine in the initial state:

        (B(0,T_N)/B(0,T_{k+1})) * exp( v phi_{T_N-t}(u_k)
            + (1-v) phi_{T_N-t}(u_{k+1}) + phi_t(w(v)) + <psi_t(w(v)), x0> ),

    with w(v) = v psi_{T_N-t}(u_k) + (1-v) psi_{T_N-t}(u_{k+1}).  Accepts
    scalar or 1-d array v, real or complex; a DomainViolation signals that
    Re(v) lies outside the admissible strip.
    """
    if not 1 <= k <= m.n_periods - 1:
        raise IndexError(f"period index {k} outside 1..{m.n_periods - 1}")
    if t < 0.0 or t > m.tenor.date(k) + 1e-12:
        raise HorizonViolation(f"t={t} outside [0, T_{k}]")
    scalar = np.isscalar(v)
    v = np.atleast_1d(np.asarray(v))
    hrz = m.horizon - t
    pk = transform(m.process, hrz, m.u(k), horizon=m.horizon)
    pk1 = transform(m.process, hrz, m.u(k + 1), horizon=m.horizon)
    blend = v[:, None] * pk.psi[None, :] + (1.0 - v[:, None]) * pk1.psi[None, :]
    phi_in, psi_in = phi_psi_batch(m.process, t, blend)
    expo = (v * pk.phi + (1.0 - v) * pk1.phi + phi_in
            + psi_in @ m.x0.astype(psi_in.dtype))
    out = (m.bond0(m.n_periods) / m.bond0(k + 1)) * np.exp(expo)
    if scalar:
        out = out[0]
        return float(np.real(out)) if not np.iscomplexobj(v) else complex(out)
    return out
