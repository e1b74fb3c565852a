"""Batch command-line front-end.

    affine-libor <command> --config <path> [--out <path>] [--seed N]
                 [--method fourier|closed]

Commands: ``calibrate`` (write the fitted u-sequence), ``caplet`` /
``swaption`` (print price and diagnostics), ``surface`` (write the
implied-vol CSV), ``validate`` (martingale and oracle-agreement report).

The config file is flat ``section.key = value`` text; ``#`` starts a
comment.  All numeric output uses 12 significant digits, and a fixed seed
makes every command's output byte-identical across runs.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import (AffineLiborError, InvalidParameter, MonotonicityError,
                     ParseError)
from .model import (CalibratedModel, TenorStructure, fit_term_structure,
                    martingale_value)
from .montecarlo import (RngStream, forward_measure_weights, martingale_check,
                         mc_caplet, simulate_process)
from .pricing import (CapletSpec, QuadratureSettings, SwaptionSpec,
                      caplet_cir2f_closed, caplet_cir_closed, caplet_fourier,
                      swaption_cir_closed, swaption_fourier, vol_surface)
from .processes import CirParams, GammaOuParams, ProductProcess

_FMT = "{:.12g}"


def _fmt(x) -> str:
    return _FMT.format(float(x))


def parse_config_text(text: str) -> dict:
    """Flat key = value pairs with section-prefixed keys."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_tenor_csv(path: str) -> TenorStructure:
    """Parse a ``maturity,discount[,delta]`` CSV into a tenor structure.

    The accrual is inferred from the (uniform) maturity spacing; an
    optional per-row delta column must agree with that spacing.  Raises
    ParseError with the offending row number, or MonotonicityError when
    the discounts imply a negative initial forward rate.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        raise ParseError(f"cannot read tenor file {path}: {exc}") from exc
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not rows:
        raise ParseError(f"{path}: empty tenor file")
    header = [c.strip().lower() for c in rows[0][1].split(",")]
    if header[:2] != ["maturity", "discount"]:
        raise ParseError(f"{path} row 1: header must be maturity,discount")
    has_delta = len(header) > 2 and header[2] == "delta"
    maturities, discounts, deltas = [], [], []
    for rowno, line in rows[1:]:
        cells = [c.strip() for c in line.split(",")]
        try:
            maturities.append(float(cells[0]))
            discounts.append(float(cells[1]))
            if has_delta:
                deltas.append(float(cells[2]))
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{path} row {rowno}: {exc}") from exc
        if len(maturities) > 1 and maturities[-1] <= maturities[-2]:
            raise ParseError(f"{path} row {rowno}: maturities must increase")
    if len(maturities) < 2:
        raise ParseError(f"{path}: need at least two rows")
    gaps = np.diff(maturities)
    if np.any(np.abs(gaps - gaps[0]) > 1e-9):
        raise ParseError(f"{path}: non-uniform maturity spacing")
    if has_delta and np.any(np.abs(np.asarray(deltas) - gaps[0]) > 1e-9):
        raise ParseError(f"{path}: delta column disagrees with spacing")
    if np.any(np.diff(discounts) > 0.0):
        raise MonotonicityError(
            f"{path}: increasing discounts imply negative initial rates")
    return TenorStructure.from_curve(np.asarray(maturities),
                                     np.asarray(discounts), float(gaps[0]))


def build_process(cfg: dict):
    family = cfg.get("process.family", "").lower().replace("_", "-")
    if family == "cir":
        return CirParams(float(cfg["process.lambda"]),
                         float(cfg["process.theta"]),
                         float(cfg["process.eta"]),
                         float(cfg.get("process.x0", "1.0")))
    if family == "gamma-ou":
        return GammaOuParams(float(cfg["process.lambda"]),
                             float(cfg["process.alpha"]),
                             float(cfg["process.beta"]),
                             float(cfg.get("process.x0", "1.0")))
    if family == "cir-2f":
        return ProductProcess([
            CirParams(float(cfg["process.lambda1"]),
                      float(cfg["process.theta1"]),
                      float(cfg["process.eta1"]),
                      float(cfg.get("process.x01", "1.0"))),
            CirParams(float(cfg["process.lambda2"]),
                      float(cfg["process.theta2"]),
                      float(cfg["process.eta2"]),
                      float(cfg.get("process.x02", "1.0"))),
        ])
    raise InvalidParameter(
        f"unknown process.family {cfg.get('process.family')!r} "
        "(use cir, gamma-ou or cir-2f)")


def _strike_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise InvalidParameter(
            f"surface.strikes must be min:max:step, got {spec!r}") from exc
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


@dataclass
class RunConfig:
    """Everything a command needs, resolved from file plus CLI overrides."""

    process: object
    tenor: TenorStructure
    x0: np.ndarray | None
    calibration_tol: float
    quadrature: QuadratureSettings
    strikes: np.ndarray
    method: str
    seed: int
    mc_paths: int
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str, seed: int | None = None,
                  method: str | None = None) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            cfg = parse_config_text(fh.read())
        tenor_path = cfg["tenor.path"]
        if not os.path.isabs(tenor_path):  # resolve next to the config file
            tenor_path = os.path.join(os.path.dirname(os.path.abspath(path)),
                                      tenor_path)
            if not os.path.exists(tenor_path):
                tenor_path = cfg["tenor.path"]
        x0 = None
        if "model.x0" in cfg:
            x0 = np.array([float(v) for v in cfg["model.x0"].split(",")])
        quad = QuadratureSettings(
            damping=(float(cfg["quadrature.damping"])
                     if "quadrature.damping" in cfg else None),
            truncation=(float(cfg["quadrature.truncation"])
                        if "quadrature.truncation" in cfg else None),
            rel_tol=float(cfg.get("quadrature.rel_tol", "1e-9")))
        return cls(
            process=build_process(cfg),
            tenor=load_tenor_csv(tenor_path),
            x0=x0,
            calibration_tol=float(cfg.get("calibration.tol", "1e-12")),
            quadrature=quad,
            strikes=_strike_grid(cfg.get("surface.strikes",
                                         "0.01:0.06:0.005")),
            method=method or cfg.get("surface.method", "fourier"),
            seed=seed if seed is not None else int(cfg.get("mc.seed", "1")),
            mc_paths=int(cfg.get("mc.paths", "100000")),
            raw=cfg)

    def calibrate(self) -> CalibratedModel:
        return fit_term_structure(self.tenor, self.process, x0=self.x0,
                                  tol=self.calibration_tol)


def _closed_caplet(model: CalibratedModel):
    if isinstance(model.process, CirParams):
        return caplet_cir_closed
    return caplet_cir2f_closed


def _cmd_calibrate(cfg: RunConfig, out: str, write) -> int:
    model = cfg.calibrate()
    resid = max(abs(martingale_value(model, 0.0, model.x0, model.u(k))
                    - cfg.tenor.ratios()[k - 1])
                for k in range(1, model.n_periods + 1))
    lines = [",".join(_fmt(v) for v in row) for row in model.us]
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    write(f"calibrated {model.n_periods} parameters to {out}")
    write(f"max residual = {_fmt(resid)}")
    return 0


def _cmd_caplet(cfg: RunConfig, write) -> int:
    model = cfg.calibrate()
    spec = CapletSpec(int(cfg.raw.get("caplet.index", "1")),
                      float(cfg.raw.get("caplet.strike", "0.03")))
    if cfg.method == "closed":
        res = _closed_caplet(model)(model, spec)
    else:
        res = caplet_fourier(model, spec, cfg.quadrature)
    write(f"caplet k={spec.period_index} strike={_fmt(spec.strike)} "
          f"method={cfg.method}")
    write(f"price = {_fmt(res.price)}")
    write(f"quadrature_error = {_fmt(res.error_estimate)}")
    if res.damping is not None:
        write(f"damping = {_fmt(res.damping)}")
    return 0


def _cmd_swaption(cfg: RunConfig, write) -> int:
    model = cfg.calibrate()
    spec = SwaptionSpec(int(cfg.raw.get("swaption.start", "1")),
                        int(cfg.raw.get("swaption.end", "2")),
                        float(cfg.raw.get("swaption.strike", "0.03")))
    if cfg.method == "closed":
        res = swaption_cir_closed(model, spec)
    else:
        res = swaption_fourier(model, spec, cfg.quadrature)
    write(f"swaption start={spec.start_index} end={spec.end_index} "
          f"strike={_fmt(spec.strike)} method={cfg.method}")
    write(f"price = {_fmt(res.price)}")
    write(f"quadrature_error = {_fmt(res.error_estimate)}")
    write(f"exercise_root = {_fmt(res.root)}")
    if res.damping is not None:
        write(f"damping = {_fmt(res.damping)}")
    return 0


def _cmd_surface(cfg: RunConfig, out: str, write) -> int:
    model = cfg.calibrate()
    cells = vol_surface(model, cfg.strikes, method=cfg.method,
                        q=cfg.quadrature)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("expiry,strike,price,implied_vol\n")
        for cell in cells:
            fh.write(f"{_fmt(cell.expiry)},{_fmt(cell.strike)},"
                     f"{_fmt(cell.price)},{_fmt(cell.implied_vol)}\n")
    failed = sum(1 for c in cells if c.error is not None)
    write(f"surface written to {out}: {len(cells)} cells, {failed} failed")
    return 0 if failed == 0 else 1


def _cmd_validate(cfg: RunConfig, write) -> int:
    model = cfg.calibrate()
    n = model.n_periods
    checks = []

    resid = max(abs(martingale_value(model, 0.0, model.x0, model.u(k))
                    - cfg.tenor.ratios()[k - 1]) for k in range(1, n + 1))
    checks.append((resid <= cfg.calibration_tol,
                   f"calibration residual {_fmt(resid)}"))

    horizon = model.horizon
    times = [model.tenor.date(1), 0.5 * horizon, horizon]
    for j, t in enumerate(times):
        for k in range(1, n + 1):
            rep = martingale_check(model, k, t, cfg.mc_paths,
                                   RngStream(cfg.seed, j))
            checks.append((rep.passed(),
                           f"martingale k={k} t={_fmt(t)} "
                           f"z={_fmt(rep.z_score)} min={_fmt(rep.min_value)}"))

    batch = simulate_process(model.process, [times[0]], cfg.mc_paths,
                             RngStream(cfg.seed, 10))
    x = batch.at(times[0])
    for k in range(1, n + 1):
        w = forward_measure_weights(model, k, times[0], x)
        se = w.std(ddof=1) / np.sqrt(cfg.mc_paths)
        z = 0.0 if se == 0.0 else (w.mean() - 1.0) / se
        checks.append((abs(z) <= 3.0,
                       f"weight mean k={k} z={_fmt(z)}"))

    k_test = int(cfg.raw.get("caplet.index", "2"))
    strike = float(cfg.raw.get("caplet.strike", "0.03"))
    spec = CapletSpec(k_test, strike)
    try:
        analytic = _closed_caplet(model)(model, spec).price
        label = "closed"
    except AffineLiborError:
        analytic = caplet_fourier(model, spec, cfg.quadrature).price
        label = "fourier"
    est, se = mc_caplet(model, k_test, strike, cfg.mc_paths,
                        RngStream(cfg.seed, 11))
    z = (analytic - est) / se if se > 0.0 else 0.0
    checks.append((abs(z) <= 3.0,
                   f"caplet oracle k={k_test} {label}={_fmt(analytic)} "
                   f"mc={_fmt(est)} z={_fmt(z)}"))

    failures = 0
    for ok, label in checks:
        write(("PASS " if ok else "FAIL ") + label)
        failures += 0 if ok else 1
    write(f"{len(checks) - failures}/{len(checks)} checks passed")
    return 0 if failures == 0 else 1


def run_command(command: str, cfg: RunConfig, out: str | None = None,
                write=print) -> int:
    """Execute one batch command against a resolved configuration.

    Returns the process exit status (0 on success, 1 on any check or
    module failure); ``out`` overrides the default output file of the
    file-writing commands.
    """
    if command == "calibrate":
        return _cmd_calibrate(cfg, out or "us.txt", write)
    if command == "caplet":
        return _cmd_caplet(cfg, write)
    if command == "swaption":
        return _cmd_swaption(cfg, write)
    if command == "surface":
        return _cmd_surface(cfg, out or "surface.csv", write)
    if command == "validate":
        return _cmd_validate(cfg, write)
    raise InvalidParameter(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="affine-libor",
        description="Calibration, pricing and validation for affine "
                    "bond-ratio LIBOR models.")
    parser.add_argument("command", choices=["calibrate", "caplet", "swaption",
                                            "surface", "validate"])
    parser.add_argument("--config", required=True, help="flat key=value file")
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--method", choices=["fourier", "closed"],
                        default=None)
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config, seed=args.seed,
                                  method=args.method)
        return run_command(args.command, cfg, out=args.out)
    except AffineLiborError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
