"""CC, CV and ZPA conditions for the series / series-parallel (S-SP) ladder.

The S-SP ladder is Z1 (series C_p + L_lp), Z2 (shunt L_M), Z3 (series
L_ls + C_ss), Z4 (shunt C_sp) with the load across Z4. Writing Z_k = jX_k at
the CC frequency and Z_k = jX_k' at the CV frequency, every condition is read
off a basic resonant tank:

* CC: the Z1/Z2 divider is a voltage source with Thevenin reactance
  X1*X2/(X1 + X2); that reactance plus X3, followed by the shunt X4, is a
  reversed L that must resonate (V-C conversion).
* ZPA in CC mode: shunt X2 then series X3 is a normal L (C-V conversion).
* CV: X1, X2, X3 form a T (V-V conversion).
* ZPA in CV mode: X2, X3, X4 form a pi (C-C conversion).

The second half of the module rewrites the same conditions with the
transformed reactances of the unified cascaded-L model and checks the two
formulations against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import CompensationNetwork, CoupledCoils, as_omega
from .errors import ContractError, DegenerateConditionError, ValidationError
from .tanks import ConversionKind, Mode, ResonantTank, residual

_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class SspReactances:
    """Arm reactances X1..X4 (ohms) of an S-SP ladder at one frequency."""

    x1: float
    x2: float
    x3: float
    x4: float
    mode: Mode = Mode.CC

    def __post_init__(self) -> None:
        for name in ("x1", "x2", "x3", "x4"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not self.x2 > 0.0:
            raise ValidationError(f"x2 = omega*L_M must be positive, got {self.x2!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4)

    def scale(self) -> float:
        return max(abs(v) for v in self.as_tuple())

    def scaled(self, factor: float) -> SspReactances:
        return SspReactances(self.x1 * factor, self.x2 * factor, self.x3 * factor,
                             self.x4 * factor, self.mode)


@dataclass(frozen=True)
class UnifiedReactances:
    """Transformed reactances of the unified cascaded-L model.

    In CC mode Z2 is split into X2a, X2b and Z3 into X3a, X3b. In CV mode only
    Z2 is split and ``x3a``/``x3b`` stay ``None``.
    """

    x2a: float
    x2b: float
    x3a: float | None = None
    x3b: float | None = None
    mode: Mode = Mode.CC

    def x2_parallel(self) -> float:
        """X2a*X2b/(X2a + X2b), the magnetizing reactance this split implies."""
        return _parallel(self.x2a, self.x2b, "X2a + X2b")

    def invariant_errors(self, x: SspReactances) -> dict[str, float]:
        """Relative mismatch of the split against the physical reactances."""
        errors = {"x2": abs(self.x2_parallel() - x.x2) / abs(x.x2)}
        if self.mode is Mode.CC:
            errors["x3"] = abs(self.x3a + self.x3b - x.x3) / max(abs(x.x3), x.scale() * 1e-300)
        return errors


def _parallel(a: float, b: float, what: str) -> float:
    den = a + b
    if den == 0.0 or abs(den) < _DEGENERATE_RTOL * max(abs(a), abs(b)):
        raise DegenerateConditionError(f"{what} vanishes (parallel combination is infinite)")
    return a * b / den


def _require_mode(x, mode: Mode) -> None:
    if x.mode is not mode:
        raise ContractError(f"expected {mode.value}-mode reactances, got {x.mode.value}")


def eval_ssp_reactances(coils: CoupledCoils, c_p: float, c_ss: float, c_sp: float,
                        omega, mode: Mode = Mode.CC) -> SspReactances:
    w = as_omega(omega)
    if not (w > 0 and c_p > 0 and c_ss > 0 and c_sp > 0):
        raise ValidationError("frequency and capacitances must be positive")
    return SspReactances(
        x1=w * coils.l_lp - 1.0 / (w * c_p),
        x2=w * coils.l_m,
        x3=w * coils.l_ls - 1.0 / (w * c_ss),
        x4=-1.0 / (w * c_sp),
        mode=mode,
    )


def ssp_reactances_of(network: CompensationNetwork, omega, mode: Mode = Mode.CC) -> SspReactances:
    """Read X1..X4 off a four-arm series/shunt/series/shunt ladder."""
    if len(network.stages) != 4:
        raise ContractError(f"an S-SP ladder has 4 arms, got {len(network.stages)}")
    w = as_omega(omega)
    return SspReactances(*(float(s.reactance(w)) for s in network.stages), mode=mode)


def cc_residual(x: SspReactances) -> float:
    """X1*X2/(X1 + X2) + X3 + X4; zero gives a load-independent output current."""
    _require_mode(x, Mode.CC)
    x_thevenin = _parallel(x.x1, x.x2, "X1 + X2")
    return residual(ResonantTank.reversed_l(x_thevenin + x.x3, x.x4), ConversionKind.VC)


def zpa_cc_residual(x: SspReactances) -> float:
    """X2 + X3; zero adds the C-V conversion that cancels the CC-mode input phase."""
    _require_mode(x, Mode.CC)
    return residual(ResonantTank.normal_l(x.x2, x.x3), ConversionKind.CV)


def cv_residual(x: SspReactances) -> float:
    """X1'*X2'/(X1' + X2') + X3'; zero gives a load-independent output voltage."""
    _require_mode(x, Mode.CV)
    _parallel(x.x1, x.x2, "X1' + X2'")
    return residual(ResonantTank.t(x.x1, x.x2, x.x3), ConversionKind.VV)


def zpa_cv_residual(x: SspReactances) -> float:
    """X2' + X3' + X4'; zero adds the C-C conversion that cancels the CV-mode input phase."""
    _require_mode(x, Mode.CV)
    return residual(ResonantTank.pi(x.x2, x.x3, x.x4), ConversionKind.CC)


def mode_residuals(x: SspReactances) -> tuple[float, float]:
    """(output condition, ZPA condition) residuals for the reactances' mode."""
    if x.mode is Mode.CC:
        return cc_residual(x), zpa_cc_residual(x)
    return cv_residual(x), zpa_cv_residual(x)


# -- unified cascaded-L model ----------------------------------------------


def unified_from_cc(x: SspReactances) -> UnifiedReactances:
    _require_mode(x, Mode.CC)
    s = x.x3 + x.x4
    u = UnifiedReactances(x2a=-x.x1, x2b=-s, x3a=s, x3b=-x.x4, mode=Mode.CC)
    _parallel(u.x2a, u.x2b, "X2a + X2b")
    return u


def unified_from_cv(x: SspReactances) -> UnifiedReactances:
    _require_mode(x, Mode.CV)
    u = UnifiedReactances(x2a=-x.x1, x2b=-x.x3, mode=Mode.CV)
    _parallel(u.x2a, u.x2b, "X2a' + X2b'")
    return u


@dataclass(frozen=True)
class UnifiedResiduals:
    parts: tuple[float, ...]
    zpa: float


def unified_cc_residuals(u: UnifiedReactances, x: SspReactances) -> UnifiedResiduals:
    """X1 + X2a, X2b + X3a, X3b + X4 and X2b*X3a + (X2a + X2b)*X3b."""
    _require_mode(u, Mode.CC)
    _require_mode(x, Mode.CC)
    parts = (x.x1 + u.x2a, u.x2b + u.x3a, u.x3b + x.x4)
    zpa = u.x2b * u.x3a + (u.x2a + u.x2b) * u.x3b
    return UnifiedResiduals(parts, zpa)


def unified_cv_residuals(u: UnifiedReactances, x: SspReactances) -> UnifiedResiduals:
    """X1' + X2a', X2b' + X3' and X2b'*X3' + (X2a' + X2b')*X4'."""
    _require_mode(u, Mode.CV)
    _require_mode(x, Mode.CV)
    parts = (x.x1 + u.x2a, u.x2b + x.x3)
    zpa = u.x2b * x.x3 + (u.x2a + u.x2b) * x.x4
    return UnifiedResiduals(parts, zpa)


@dataclass(frozen=True)
class EquivalenceReport:
    """Numerical comparison of the tank conditions with the unified-model ones.

    ``condition_discrepancy`` compares the output-condition residual against
    the unified split mismatch (X2 - X2a||X2b), both brought over the same
    denominator. ``zpa_discrepancy`` compares the unified ZPA residual, after
    adding X2a*(X3a + X2b) and dividing by (X2a + X2b), with the tank ZPA
    residual.

    The condition discrepancy is relative to the squared largest arm
    reactance. The ZPA discrepancy and the premise error are relative to
    ``error_scale``: the largest of the arm reactances, the magnitude the
    chained quotient passes through, and the first-order sensitivity of
    X2a||X2b to rounding in X2b (X2a**2/(X2a + X2b)**2 times the summed
    magnitudes X2b is built from). ``raw_zpa_discrepancy`` keeps the plain
    largest-reactance normalization for reference. The discrepancies only
    vanish together when ``premise_holds``.
    """

    mode: Mode
    degenerate: bool
    reason: str = ""
    premise_error: float = math.nan
    premise_holds: bool = False
    condition_residual: float = math.nan
    condition_discrepancy: float = math.nan
    proposed_zpa: float = math.nan
    unified_zpa: float = math.nan
    zpa_discrepancy: float = math.nan
    raw_zpa_discrepancy: float = math.nan
    error_scale: float = math.nan
    signs_agree: bool = False

    @property
    def max_discrepancy(self) -> float:
        if self.degenerate:
            return math.nan
        return max(self.condition_discrepancy, self.zpa_discrepancy)


def equivalence_check(x: SspReactances, premise_rtol: float = 1e-9) -> EquivalenceReport:
    mode = x.mode
    try:
        if mode is Mode.CC:
            u = unified_from_cc(x)
            cond = cc_residual(x)
            proposed_zpa = zpa_cc_residual(x)
            unified = unified_cc_residuals(u, x)
            # everything right of Z2 seen as one series arm
            x_tail = x.x3 + x.x4
            bridge = u.x3a + u.x2b
            x2b_terms = abs(x.x3) + abs(x.x4)
        else:
            u = unified_from_cv(x)
            cond = cv_residual(x)
            proposed_zpa = zpa_cv_residual(x)
            unified = unified_cv_residuals(u, x)
            x_tail = x.x3
            bridge = x.x3 + u.x2b
            x2b_terms = abs(x.x3)
        x2_split = u.x2_parallel()
    except DegenerateConditionError as exc:
        return EquivalenceReport(mode, degenerate=True, reason=str(exc))

    scale = x.scale()
    split_mismatch = x.x2 - x2_split
    # cond*(X1 + X2) and (X2 - X2a||X2b)*(X1 + X_tail) share the numerator
    # X1*X2 + X_tail*(X1 + X2)
    condition_discrepancy = abs(cond * (x.x1 + x.x2) - split_mismatch * (x.x1 + x_tail)) / scale ** 2
    x2_sum = u.x2a + u.x2b
    chained = (unified.zpa + u.x2a * bridge) / x2_sum
    chain_terms = (abs(u.x2b * (u.x3a if mode is Mode.CC else x.x3))
                   + abs(x2_sum * (u.x3b if mode is Mode.CC else x.x4))
                   + abs(u.x2a * bridge)) / abs(x2_sum)
    error_scale = max(scale, chain_terms, u.x2a ** 2 / x2_sum ** 2 * x2b_terms)
    zpa_discrepancy = abs(chained - proposed_zpa) / error_scale
    premise_error = abs(split_mismatch) / error_scale
    return EquivalenceReport(
        mode=mode,
        degenerate=False,
        premise_error=premise_error,
        premise_holds=premise_error <= premise_rtol,
        condition_residual=cond,
        condition_discrepancy=condition_discrepancy,
        proposed_zpa=proposed_zpa,
        unified_zpa=unified.zpa,
        zpa_discrepancy=zpa_discrepancy,
        raw_zpa_discrepancy=abs(chained - proposed_zpa) / scale,
        error_scale=error_scale,
        # the unified ZPA residual carries the factor (X2a + X2b) the chain divides out
        signs_agree=bool(np.sign(unified.zpa / x2_sum) == np.sign(proposed_zpa)),
    )


# -- random draws that satisfy the unified-model conditions ------------------

INDUCTANCE_RANGE = (1e-6, 1e-3)
CAPACITANCE_RANGE = (1e-9, 1e-6)
FREQUENCY_RANGE_HZ = (1e4, 1e6)


@dataclass(frozen=True)
class RandomDraw:
    coils: CoupledCoils
    c_p: float
    c_ss: float
    c_sp: float
    omega: float
    reactances: SspReactances


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def unified_consistent_draws(n: int, seed: int, mode: Mode = Mode.CC,
                             max_tries: int = 1000) -> list[RandomDraw]:
    """Seeded random S-SP parameter sets lying on the unified-model conditions.

    Inductances are log-uniform over 1 uH..1 mH, capacitances over 1 nF..1 uF
    and the frequency over 10 kHz..1 MHz. One capacitor is then fixed through
    the unified model so its conditions hold: C_sp in CC mode (X2b from the
    X2a||X2b = X2 split, X3a = -X2b, X3b = X3 - X3a, X4 = -X3b) and C_ss in CV
    mode (X2b' from the split, X3' = -X2b'). The returned reactances carry the
    unified-route value of that arm. Draws that would need a negative
    capacitance are rejected and redrawn.
    """
    if n < 1:
        raise ContractError(f"need at least one draw, got {n}")
    rng = np.random.default_rng(seed)
    draws: list[RandomDraw] = []
    tries = 0
    while len(draws) < n:
        tries += 1
        if tries > max_tries * n:
            raise RuntimeError(f"only {len(draws)} of {n} physical draws after {tries - 1} tries")
        coils = CoupledCoils(*(_log_uniform(rng, *INDUCTANCE_RANGE) for _ in range(3)))
        c_p, c_ss, c_sp = (_log_uniform(rng, *CAPACITANCE_RANGE) for _ in range(3))
        w = 2.0 * math.pi * _log_uniform(rng, *FREQUENCY_RANGE_HZ)
        x1 = w * coils.l_lp - 1.0 / (w * c_p)
        x2 = w * coils.l_m
        x2a = -x1
        if abs(x2a - x2) < 1e-6 * max(abs(x2a), x2):
            continue
        x2b = x2 * x2a / (x2a - x2)
        if mode is Mode.CC:
            x3 = w * coils.l_ls - 1.0 / (w * c_ss)
            x3a = -x2b
            x3b = x3 - x3a
            x4 = -x3b
            if not x4 < 0.0:
                continue
            c_sp = -1.0 / (w * x4)
        else:
            x3 = -x2b
            den = w * (w * coils.l_ls - x3)
            if not den > 0.0:
                continue
            c_ss = 1.0 / den
        # keep the unified-route reactance rather than re-deriving it from
        # the capacitor, which would add a rounding step to the premise
        x = SspReactances(x1, x2, x3, x4 if mode is Mode.CC else -1.0 / (w * c_sp), mode)
        draws.append(RandomDraw(coils, c_p, c_ss, c_sp, w, x))
    return draws
