"""Lossless ladder networks built from ideal inductors and capacitors.

A compensation network is an ordered list of series/shunt arms running from
the source port to the load port. The load is a resistor placed across the
output port, i.e. in parallel with a trailing shunt arm. The coupled coil
enters the ladder through its T-model (two leakage inductances in series
arms, the magnetizing inductance in a shunt arm).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "Frequency",
    "ElementKind",
    "ReactiveElement",
    "inductor",
    "capacitor",
    "CoupledCoils",
    "Orientation",
    "LadderStage",
    "CompensationNetwork",
    "reactance",
    "t_model",
    "build_ssp",
    "ac_resistance_from_dc",
    "as_omega",
    "stage_from_reactance",
    "ladder_from_reactances",
]


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Frequency:
    """Angular frequency in rad/s."""

    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _require_positive("angular frequency", self.value))

    @classmethod
    def from_hz(cls, hz: float) -> Frequency:
        return cls(2.0 * math.pi * _require_positive("frequency", hz))

    @property
    def hz(self) -> float:
        return self.value / (2.0 * math.pi)

    def __float__(self) -> float:
        return self.value


def as_omega(omega):
    """Accept a :class:`Frequency`, a float or an array of rad/s values."""
    if isinstance(omega, Frequency):
        return omega.value
    if isinstance(omega, np.ndarray):
        return omega
    return float(omega)


class ElementKind(enum.Enum):
    INDUCTOR = "inductor"
    CAPACITOR = "capacitor"


@dataclass(frozen=True)
class ReactiveElement:
    kind: ElementKind
    value: float
    name: str = ""

    def __post_init__(self) -> None:
        label = self.name or self.kind.value
        object.__setattr__(self, "value", _require_positive(label, self.value))


def inductor(henries: float, name: str = "") -> ReactiveElement:
    return ReactiveElement(ElementKind.INDUCTOR, henries, name)


def capacitor(farads: float, name: str = "") -> ReactiveElement:
    return ReactiveElement(ElementKind.CAPACITOR, farads, name)


def reactance(element: ReactiveElement, omega):
    """Signed reactance X in ohms; the impedance is ``1j * X``.

    Works elementwise when ``omega`` is a numpy array.
    """
    w = as_omega(omega)
    if element.kind is ElementKind.INDUCTOR:
        return w * element.value
    return -1.0 / (w * element.value)


@dataclass(frozen=True)
class CoupledCoils:
    """T-model of a loosely coupled transformer."""

    l_lp: float
    l_ls: float
    l_m: float

    def __post_init__(self) -> None:
        _require_positive("primary leakage inductance L_lp", self.l_lp)
        _require_positive("secondary leakage inductance L_ls", self.l_ls)
        _require_positive("magnetizing inductance L_M", self.l_m)

    @property
    def l1(self) -> float:
        return self.l_lp + self.l_m

    @property
    def l2(self) -> float:
        return self.l_ls + self.l_m

    @property
    def k(self) -> float:
        return self.l_m / math.sqrt(self.l1 * self.l2)

    def scaled(self, factor: float) -> CoupledCoils:
        return CoupledCoils(self.l_lp * factor, self.l_ls * factor, self.l_m * factor)


def t_model(l1: float, l2: float, k: float) -> CoupledCoils:
    """Split self inductances and coupling factor into the T-model.

    L_M = k*sqrt(L1*L2), L_lp = L1 - L_M, L_ls = L2 - L_M. Both leakages must
    stay positive, which needs k < sqrt(min(L1, L2) / max(L1, L2)).
    """
    l1 = _require_positive("L1", l1)
    l2 = _require_positive("L2", l2)
    k = float(k)
    if not (0.0 < k < 1.0):
        raise ValidationError(f"coupling factor k must satisfy 0 < k < 1, got {k!r}")
    l_m = k * math.sqrt(l1 * l2)
    k_max = math.sqrt(min(l1, l2) / max(l1, l2))
    for name, leak in (("primary leakage L_lp = L1 - L_M", l1 - l_m),
                       ("secondary leakage L_ls = L2 - L_M", l2 - l_m)):
        if not leak > 0.0:
            raise ValidationError(
                f"{name} = {leak!r} H is not positive; "
                f"coupling bound requires k < sqrt(min(L1,L2)/max(L1,L2)) = {k_max!r}"
            )
    return CoupledCoils(l_lp=l1 - l_m, l_ls=l2 - l_m, l_m=l_m)


class Orientation(enum.Enum):
    SERIES = "series"
    SHUNT = "shunt"


@dataclass(frozen=True)
class LadderStage:
    """One ladder arm: reactive elements connected in series within the arm.

    The constituent elements are kept (rather than a summed reactance) so the
    condition generators can refer to single components such as L_M.
    """

    orientation: Orientation
    elements: tuple[ReactiveElement, ...]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ValidationError("a ladder arm needs at least one element")
        for el in self.elements:
            if not isinstance(el, ReactiveElement):
                raise ValidationError(f"arm elements must be ReactiveElement, got {el!r}")

    def reactance(self, omega):
        w = as_omega(omega)
        total = reactance(self.elements[0], w)
        for el in self.elements[1:]:
            total = total + reactance(el, w)
        return total

    def reactance_scale(self, omega):
        """Sum of |X| over the arm's elements, used to judge exact cancellation."""
        w = as_omega(omega)
        total = abs(reactance(self.elements[0], w))
        for el in self.elements[1:]:
            total = total + abs(reactance(el, w))
        return total

    def impedance(self, omega):
        return 1j * self.reactance(omega)


@dataclass(frozen=True)
class CompensationNetwork:
    """Ladder from source port to load port, terminated by ``load`` ohms.

    An empty stage tuple is a direct connection of source to load.
    """

    stages: tuple[LadderStage, ...]
    load: float
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        _require_positive("R_ac", self.load)

    def with_load(self, r_ac: float) -> CompensationNetwork:
        return replace(self, load=r_ac)


def build_ssp(coils: CoupledCoils, c_p: float, c_ss: float, c_sp: float,
              r_ac: float) -> CompensationNetwork:
    """Series primary / series-parallel secondary ladder.

    Stages: Z1 = series {C_p, L_lp}, Z2 = shunt {L_M},
    Z3 = series {L_ls, C_ss}, Z4 = shunt {C_sp}; R_ac sits across Z4.
    """
    stages = (
        LadderStage(Orientation.SERIES, (capacitor(c_p, "C_p"), inductor(coils.l_lp, "L_lp")), "Z1"),
        LadderStage(Orientation.SHUNT, (inductor(coils.l_m, "L_M"),), "Z2"),
        LadderStage(Orientation.SERIES, (inductor(coils.l_ls, "L_ls"), capacitor(c_ss, "C_ss")), "Z3"),
        LadderStage(Orientation.SHUNT, (capacitor(c_sp, "C_sp"),), "Z4"),
    )
    return CompensationNetwork(stages, r_ac, name="S-SP")


def ac_resistance_from_dc(r_dc: float) -> float:
    """Equivalent AC resistance of a full-bridge rectifier feeding ``r_dc``.

    Uses the usual first-harmonic approximation R_ac = 8/pi**2 * R_dc for a
    capacitor-filtered output. This is a modelling convention; nothing else in
    the package applies it implicitly.
    """
    return 8.0 / math.pi ** 2 * _require_positive("R_dc", r_dc)


def stage_from_reactance(orientation: Orientation, x: float, omega: float,
                         label: str = "") -> LadderStage:
    """Realize a signed reactance ``x`` at ``omega`` with a single element."""
    w = as_omega(omega)
    if x > 0:
        el = inductor(x / w)
    elif x < 0:
        el = capacitor(-1.0 / (w * x))
    else:
        raise ValidationError("a zero reactance cannot be realized by a single element")
    return LadderStage(orientation, (el,), label)


def ladder_from_reactances(arms: Sequence[tuple[Orientation, float]], omega: float,
                           load: float) -> CompensationNetwork:
    stages = tuple(stage_from_reactance(o, x, omega, f"arm{i}") for i, (o, x) in enumerate(arms))
    return CompensationNetwork(stages, load)
