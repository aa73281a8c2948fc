"""Basic resonant tanks and the port phase relations they enforce.

Four reactive two-ports give load-independent conversions when resonated:

=========== ===================== ========== ==========================
tank        arms (source -> load) conversion resonance condition
=========== ===================== ========== ==========================
reversed L  series Xs, shunt Xp   V -> C     Xs + Xp = 0
normal L    shunt Xp, series Xs   C -> V     Xp + Xs = 0
T           Xs1, Xp, Xs2          V -> V     Xs1*Xp/(Xs1 + Xp) + Xs2 = 0
pi          Xp1, Xs, Xp2          C -> C     Xp1 + Xs + Xp2 = 0
=========== ===================== ========== ==========================

Each L section shifts the converted quantity by +/-90 degrees, so an even
cascade (V-V, C-C) keeps the output in phase or in antiphase with the input
and an odd cascade (V-C, C-V) puts it in quadrature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .circuit import CompensationNetwork, Orientation, ladder_from_reactances
from .errors import ContractError, DegenerateConditionError
from .twoport import PortSolution, phase_deg, wrap_degrees

DEFAULT_ANGLE_TOL_DEG = 0.01


class TankKind(enum.Enum):
    NORMAL_L = "normal_L"
    REVERSED_L = "reversed_L"
    T = "T"
    PI = "pi"


class ConversionKind(enum.Enum):
    VV = "VV"
    VC = "VC"
    CV = "CV"
    CC = "CC"


class Mode(enum.Enum):
    """Charging mode: load-independent output current or output voltage."""

    CC = "CC"
    CV = "CV"


_CONVERSION_OF = {
    TankKind.REVERSED_L: ConversionKind.VC,
    TankKind.NORMAL_L: ConversionKind.CV,
    TankKind.T: ConversionKind.VV,
    TankKind.PI: ConversionKind.CC,
}

_ARM_LAYOUT = {
    TankKind.REVERSED_L: (Orientation.SERIES, Orientation.SHUNT),
    TankKind.NORMAL_L: (Orientation.SHUNT, Orientation.SERIES),
    TankKind.T: (Orientation.SERIES, Orientation.SHUNT, Orientation.SERIES),
    TankKind.PI: (Orientation.SHUNT, Orientation.SERIES, Orientation.SHUNT),
}


@dataclass(frozen=True)
class ResonantTank:
    """A tank with its arm reactances (ohms at one frequency), source side first."""

    kind: TankKind
    arms: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "arms", tuple(float(x) for x in self.arms))
        expected = len(_ARM_LAYOUT[self.kind])
        if len(self.arms) != expected:
            raise ContractError(f"{self.kind.value} tank has {expected} arms, got {len(self.arms)}")

    @classmethod
    def reversed_l(cls, x_s: float, x_p: float) -> ResonantTank:
        return cls(TankKind.REVERSED_L, (x_s, x_p))

    @classmethod
    def normal_l(cls, x_p: float, x_s: float) -> ResonantTank:
        return cls(TankKind.NORMAL_L, (x_p, x_s))

    @classmethod
    def t(cls, x_1s: float, x_p: float, x_2s: float) -> ResonantTank:
        return cls(TankKind.T, (x_1s, x_p, x_2s))

    @classmethod
    def pi(cls, x_1p: float, x_s: float, x_2p: float) -> ResonantTank:
        return cls(TankKind.PI, (x_1p, x_s, x_2p))

    @property
    def conversion(self) -> ConversionKind:
        return _CONVERSION_OF[self.kind]

    def to_network(self, load: float, omega: float = 1.0) -> CompensationNetwork:
        """Realize the arms with single L or C elements at ``omega``, loaded by ``load``."""
        return ladder_from_reactances(list(zip(_ARM_LAYOUT[self.kind], self.arms)), omega, load)


def residual(tank: ResonantTank, target: ConversionKind) -> float:
    """Signed left-hand side of the tank's resonance condition, in ohms."""
    if _CONVERSION_OF[tank.kind] is not target:
        raise ContractError(
            f"a {tank.kind.value} tank realizes {_CONVERSION_OF[tank.kind].value}, not {target.value}"
        )
    if tank.kind is TankKind.T:
        x_1s, x_p, x_2s = tank.arms
        den = x_1s + x_p
        if den == 0.0 or abs(den) < 1e-12 * max(abs(x_1s), abs(x_p)):
            raise DegenerateConditionError("T tank: X_1s + X_p vanishes")
        return x_1s * x_p / den + x_2s
    if tank.kind is TankKind.PI:
        x_1p, x_s, x_2p = tank.arms
        return x_1p + x_s + x_2p
    first, second = tank.arms
    return first + second


@dataclass(frozen=True)
class PhaseRelationReport:
    mode: Mode
    relations: dict[str, float]
    deviations: dict[str, float]
    theta_in: float
    theta_out: float
    tolerance_deg: float
    passed: bool


def _distance_to_quadrature(angle: float) -> float:
    return abs(abs(angle) - 90.0)


def _distance_to_axis(angle: float) -> float:
    a = abs(angle)
    return min(a, 180.0 - a)


def phase_relation_check(p: PortSolution, mode: Mode,
                         tol_deg: float = DEFAULT_ANGLE_TOL_DEG) -> PhaseRelationReport:
    """Check the port phase relations that make the input phase angle vanish.

    CV mode needs V-V and C-C conversion at once: both output/input voltage
    and output/input current angles lie on {0, 180} degrees, so theta_in
    equals theta_out. CC mode needs V-C together with C-V: both cross angles
    are +/-90 degrees, so theta_in equals -theta_out. A resistive load makes
    theta_out zero and hence theta_in zero in both cases.
    """
    a_vin, a_iin = phase_deg(p.v_in), phase_deg(p.i_in)
    a_vo, a_io = phase_deg(p.v_o), phase_deg(p.i_o)
    if mode is Mode.CC:
        relations = {
            "arg_io_minus_arg_vin": wrap_degrees(a_io - a_vin),
            "arg_vo_minus_arg_iin": wrap_degrees(a_vo - a_iin),
        }
        deviations = {k: _distance_to_quadrature(v) for k, v in relations.items()}
    else:
        relations = {
            "arg_vo_minus_arg_vin": wrap_degrees(a_vo - a_vin),
            "arg_io_minus_arg_iin": wrap_degrees(a_io - a_iin),
        }
        deviations = {k: _distance_to_axis(v) for k, v in relations.items()}
    passed = all(d <= tol_deg for d in deviations.values())
    return PhaseRelationReport(mode, relations, deviations, p.theta_in, p.theta_out, tol_deg, passed)
