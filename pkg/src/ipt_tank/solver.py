"""Component values for an S-SP ladder with CC-ZPA and CV-ZPA operation.

The CC frequency is chosen by the user. C_ss follows in closed form from the
CC-mode ZPA condition; C_p, C_sp and the CV frequency are the roots of the
three remaining conditions, found by damped Newton iteration from a grid of
starting points.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CoupledCoils, as_omega, build_ssp
from .conditions import cc_residual, cv_residual, eval_ssp_reactances, zpa_cc_residual, zpa_cv_residual
from .errors import IptError, ValidationError
from .harness import Tolerances, verify_cc, verify_cv
from .tanks import Mode

log = logging.getLogger(__name__)

DEFAULT_LOADS = (5.0, 10.0, 20.0, 50.0, 100.0)


@dataclass(frozen=True)
class DesignSpec:
    """Inputs for :func:`solve_design`.

    ``c_bounds`` defaults to two decades either side of 1/(omega_cc**2 * L_M)
    and ``omega_cv_bounds`` to 0.3..3 times omega_cc. Both only shape the
    multi-start grid; a converged root is kept if its omega_cv lies inside
    ``omega_cv_bounds``.
    """

    coils: CoupledCoils
    omega_cc: float
    loads: tuple[float, ...] = DEFAULT_LOADS
    c_bounds: tuple[float, float] | None = None
    omega_cv_bounds: tuple[float, float] | None = None
    starts_per_axis: int = 8
    tolerances: Tolerances = Tolerances()

    def __post_init__(self) -> None:
        w = as_omega(self.omega_cc)
        if not (math.isfinite(w) and w > 0):
            raise ValidationError(f"omega_cc must be positive, got {self.omega_cc!r}")
        object.__setattr__(self, "omega_cc", w)
        object.__setattr__(self, "loads", tuple(float(r) for r in self.loads))
        if not self.loads or min(self.loads) <= 0:
            raise ValidationError("load list must be non-empty and positive")
        if self.c_bounds is None:
            c_ref = 1.0 / (w ** 2 * self.coils.l_m)
            object.__setattr__(self, "c_bounds", (c_ref / 100.0, c_ref * 100.0))
        if self.omega_cv_bounds is None:
            object.__setattr__(self, "omega_cv_bounds", (0.3 * w, 3.0 * w))
        for name in ("c_bounds", "omega_cv_bounds"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not (0 < lo < hi):
                raise ValidationError(f"{name} must satisfy 0 < lower < upper, got {(lo, hi)!r}")
            object.__setattr__(self, name, (lo, hi))
        if self.starts_per_axis < 1:
            raise ValidationError("starts_per_axis must be at least 1")


@dataclass(frozen=True)
class DesignSolution:
    coils: CoupledCoils
    c_p: float
    c_ss: float
    c_sp: float
    omega_cc: float
    omega_cv: float
    # cc, zpa_cc at omega_cc and cv, zpa_cv at omega_cv, divided by omega_cc*L_M
    residuals: dict[str, float]
    theta_in_cc_max: float = math.nan
    theta_in_cv_max: float = math.nan
    spread_io_cc: float = math.nan
    spread_vo_cv: float = math.nan
    verified: bool = False

    @property
    def f_cc(self) -> float:
        return self.omega_cc / (2 * math.pi)

    @property
    def f_cv(self) -> float:
        return self.omega_cv / (2 * math.pi)

    def network(self, r_ac: float):
        return build_ssp(self.coils, self.c_p, self.c_ss, self.c_sp, r_ac)

    def to_dict(self) -> dict:
        return {
            "l_lp": self.coils.l_lp, "l_ls": self.coils.l_ls, "l_m": self.coils.l_m,
            "c_p": self.c_p, "c_ss": self.c_ss, "c_sp": self.c_sp,
            "omega_cc": self.omega_cc, "omega_cv": self.omega_cv,
            "f_cc": self.f_cc, "f_cv": self.f_cv,
            "residuals": dict(self.residuals),
            "theta_in_cc_max_deg": self.theta_in_cc_max,
            "theta_in_cv_max_deg": self.theta_in_cv_max,
            "spread_io_cc": self.spread_io_cc,
            "spread_vo_cv": self.spread_vo_cv,
            "verified": self.verified,
        }


@dataclass
class SolveOutcome:
    solutions: list[DesignSolution]
    starts: int = 0
    converged: int = 0
    restarts: int = 0
    best_residual: float = math.inf
    notes: list[str] = field(default_factory=list)


def solve_css(coils: CoupledCoils, omega_cc) -> float:
    """C_ss = 1/(omega_cc**2 (L_M + L_ls)), from X2 + X3 = 0 at the CC frequency."""
    w = as_omega(omega_cc)
    return 1.0 / (w ** 2 * (coils.l_m + coils.l_ls))


def design_residuals(coils: CoupledCoils, c_p: float, c_ss: float, c_sp: float,
                     omega_cc: float, omega_cv: float) -> dict[str, float]:
    """All four condition residuals, normalized by omega_cc * L_M."""
    norm = omega_cc * coils.l_m
    x_cc = eval_ssp_reactances(coils, c_p, c_ss, c_sp, omega_cc, Mode.CC)
    x_cv = eval_ssp_reactances(coils, c_p, c_ss, c_sp, omega_cv, Mode.CV)
    return {
        "cc": cc_residual(x_cc) / norm,
        "zpa_cc": zpa_cc_residual(x_cc) / norm,
        "cv": cv_residual(x_cv) / norm,
        "zpa_cv": zpa_cv_residual(x_cv) / norm,
    }


class _System:
    """The three coupled conditions in log variables (ln C_p, ln C_sp, ln omega_cv)."""

    def __init__(self, coils: CoupledCoils, c_ss: float, omega_cc: float):
        self.coils = coils
        self.c_ss = c_ss
        self.omega_cc = omega_cc
        self.norm = omega_cc * coils.l_m

    def __call__(self, theta: np.ndarray) -> np.ndarray:
        c_p, c_sp, w_cv = np.exp(theta)
        x_cc = eval_ssp_reactances(self.coils, c_p, self.c_ss, c_sp, self.omega_cc, Mode.CC)
        x_cv = eval_ssp_reactances(self.coils, c_p, self.c_ss, c_sp, w_cv, Mode.CV)
        return np.array([cc_residual(x_cc), cv_residual(x_cv), zpa_cv_residual(x_cv)]) / self.norm

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        """Analytic derivatives of the normalized residuals w.r.t. the log variables.

        d/d(ln C) of -1/(w C) is 1/(w C); d/d(ln w) of w L is w L and of
        -1/(w C) is 1/(w C). The parallel term a*b/(a + b) has partials
        b**2/(a + b)**2 and a**2/(a + b)**2.
        """
        c_p, c_sp, w_cv = np.exp(theta)
        co, w0 = self.coils, self.omega_cc
        x1 = w0 * co.l_lp - 1.0 / (w0 * c_p)
        x2 = w0 * co.l_m
        s_cc = (x1 + x2) ** 2
        y1 = w_cv * co.l_lp - 1.0 / (w_cv * c_p)
        y2 = w_cv * co.l_m
        s_cv = (y1 + y2) ** 2
        dy1 = w_cv * co.l_lp + 1.0 / (w_cv * c_p)
        dy3 = w_cv * co.l_ls + 1.0 / (w_cv * self.c_ss)
        dy4 = 1.0 / (w_cv * c_sp)
        jac = np.array([
            # cc at omega_cc: depends on C_p through X1 and on C_sp through X4
            [x2 ** 2 / s_cc / (w0 * c_p), 1.0 / (w0 * c_sp), 0.0],
            # cv at omega_cv: T of X1', X2', X3'
            [y2 ** 2 / s_cv / (w_cv * c_p), 0.0,
             y2 ** 2 / s_cv * dy1 + y1 ** 2 / s_cv * y2 + dy3],
            # zpa_cv at omega_cv: X2' + X3' + X4'
            [0.0, dy4, y2 + dy3 + dy4],
        ])
        return jac / self.norm


def _safe_eval(system: _System, theta: np.ndarray) -> np.ndarray | None:
    try:
        f = system(theta)
    except (IptError, OverflowError, FloatingPointError):
        return None
    return f if np.all(np.isfinite(f)) else None


def damped_newton(system: _System, theta0: np.ndarray, rng: np.random.Generator,
                  tol: float = 1e-12, max_iter: int = 100, max_restarts: int = 5,
                  max_step: float = 2.0) -> tuple[np.ndarray, float, int]:
    """Damped Newton from ``theta0``; returns (theta, max |residual|, restarts used).

    The step is halved while the residual norm does not decrease. A singular
    or non-finite Jacobian restarts the iteration from a perturbed point.
    """
    theta = np.array(theta0, dtype=float)
    f = _safe_eval(system, theta)
    restarts = 0
    if f is None:
        return theta, math.inf, restarts
    for _ in range(max_iter):
        norm_f = float(np.max(np.abs(f)))
        if norm_f < tol:
            break
        jac = system.jacobian(theta)
        try:
            if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e14:
                raise np.linalg.LinAlgError("singular Jacobian")
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            if restarts >= max_restarts:
                break
            restarts += 1
            candidate = theta + rng.normal(0.0, 0.1, size=3)
            f_new = _safe_eval(system, candidate)
            if f_new is not None:
                theta, f = candidate, f_new
            continue
        biggest = float(np.max(np.abs(step)))
        if biggest > max_step:
            step *= max_step / biggest
        alpha = 1.0
        accepted = False
        while alpha >= 2.0 ** -12:
            candidate = theta + alpha * step
            f_new = _safe_eval(system, candidate)
            if f_new is not None and np.linalg.norm(f_new) < np.linalg.norm(f):
                theta, f = candidate, f_new
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
    return theta, float(np.max(np.abs(f))), restarts


def _start_points(spec: DesignSpec) -> list[np.ndarray]:
    n = spec.starts_per_axis
    c_lo, c_hi = spec.c_bounds
    w_lo, w_hi = spec.omega_cv_bounds
    c_grid = np.geomspace(c_lo, c_hi, n)
    w_grid = np.geomspace(w_lo, w_hi, n)
    # keep starts out of the +/-1 % band around omega_cc
    band_lo, band_hi = 0.99 * spec.omega_cc, 1.01 * spec.omega_cc
    w_grid = np.where((w_grid > band_lo) & (w_grid < band_hi),
                      np.where(w_grid < spec.omega_cc, band_lo, band_hi), w_grid)
    return [np.log([c_p, c_sp, w]) for c_p, c_sp, w in itertools.product(c_grid, c_grid, w_grid)]


def _is_duplicate(a: np.ndarray, b: np.ndarray, rtol: float = 1e-6) -> bool:
    return bool(np.all(np.abs(a - b) <= rtol * np.abs(b)))


def solve_design(spec: DesignSpec, seed: int = 0) -> SolveOutcome:
    """Solve C_ss, C_p, C_sp and omega_cv for the S-SP ladder.

    Every returned solution has all four normalized residuals below
    ``spec.tolerances.residual``, positive capacitances and omega_cv inside
    ``spec.omega_cv_bounds`` (distinct from omega_cc). Solutions are sorted
    by omega_cv. The load list is only used for the verification metrics.
    """
    coils, w_cc = spec.coils, spec.omega_cc
    c_ss = solve_css(coils, w_cc)
    system = _System(coils, c_ss, w_cc)
    rng = np.random.default_rng(seed)
    outcome = SolveOutcome(solutions=[])
    roots: list[np.ndarray] = []
    res_tol = spec.tolerances.residual
    w_lo, w_hi = spec.omega_cv_bounds

    for theta0 in _start_points(spec):
        outcome.starts += 1
        theta, res, restarts = damped_newton(system, theta0, rng)
        outcome.restarts += restarts
        outcome.best_residual = min(outcome.best_residual, res)
        if not res < res_tol:
            continue
        outcome.converged += 1
        values = np.exp(theta)
        w_cv = values[2]
        if not (w_lo <= w_cv <= w_hi) or abs(w_cv / w_cc - 1.0) < 1e-6:
            continue
        if any(_is_duplicate(values, r) for r in roots):
            continue
        roots.append(values)

    roots.sort(key=lambda v: v[2])
    for c_p, c_sp, w_cv in roots:
        outcome.solutions.append(_finish(spec, c_p, c_ss, c_sp, w_cv))
    if not outcome.solutions:
        outcome.notes.append(
            f"no start converged below {res_tol:g}; best normalized residual {outcome.best_residual:.3e}"
        )
        log.warning(outcome.notes[-1])
    log.debug("solve_design: %d starts, %d converged, %d distinct roots",
              outcome.starts, outcome.converged, len(roots))
    return outcome


def _finish(spec: DesignSpec, c_p: float, c_ss: float, c_sp: float, w_cv: float) -> DesignSolution:
    coils, w_cc = spec.coils, spec.omega_cc
    residuals = design_residuals(coils, float(c_p), c_ss, float(c_sp), w_cc, float(w_cv))
    network = build_ssp(coils, c_p, c_ss, c_sp, spec.loads[0])
    cc = verify_cc(network, w_cc, spec.loads, spec.tolerances)
    cv = verify_cv(network, w_cv, spec.loads, spec.tolerances)
    return DesignSolution(
        coils=coils, c_p=float(c_p), c_ss=c_ss, c_sp=float(c_sp),
        omega_cc=w_cc, omega_cv=float(w_cv), residuals=residuals,
        theta_in_cc_max=cc.max_abs_theta_in, theta_in_cv_max=cv.max_abs_theta_in,
        spread_io_cc=cc.spread, spread_vo_cv=cv.spread,
        verified=cc.verdict and cv.verdict,
    )
