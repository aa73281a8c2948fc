"""Chain-matrix (ABCD) analysis of ladder networks.

Phasor convention is e^{+j w t}: an inductor has impedance +j w L. All phase
angles are reported in degrees, wrapped to (-180, 180].

Every function here accepts either scalar or numpy-array frequencies. The
scalar entry points raise typed errors at exact resonance singularities;
the ``*_batch``/``port_response`` variants return masks instead so sweeps can
flag and skip those points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .circuit import CompensationNetwork, LadderStage, Orientation, as_omega
from .errors import ContractError, OpenCircuitResonanceError, SingularStageError, ValidationError

Drive = Literal["voltage", "current"]

# A summed arm reactance this close to zero (relative to its element
# reactances) is treated as an exact cancellation.
_ZERO_ARM_RTOL = 4.0 * np.finfo(float).eps
_OPEN_INPUT_ATOL = 1e-15


@dataclass(frozen=True)
class TransferMatrix:
    """Two-port chain matrix [[a, b], [c, d]].

    ``b`` is in ohms, ``c`` in siemens. Fields may be numpy arrays, in which
    case every operation is applied elementwise.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> TransferMatrix:
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def series(cls, z) -> TransferMatrix:
        one = np.ones_like(z) if isinstance(z, np.ndarray) else 1.0
        return cls(one + 0j, z + 0j, 0j * one, one + 0j)

    @classmethod
    def shunt(cls, z) -> TransferMatrix:
        one = np.ones_like(z) if isinstance(z, np.ndarray) else 1.0
        return cls(one + 0j, 0j * one, 1.0 / z + 0j, one + 0j)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: TransferMatrix) -> TransferMatrix:
        return TransferMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def reciprocity_error(self):
        """|det - 1| relative to |a*d| + |b*c|, the size of the cancelling products."""
        scale = np.maximum(1.0, np.abs(self.a * self.d) + np.abs(self.b * self.c))
        return np.abs(self.det - 1.0) / scale

    def is_reciprocal(self, rtol: float = 1e-9) -> bool:
        return bool(np.all(self.reciprocity_error <= rtol))


@dataclass(frozen=True)
class PortSolution:
    """Port phasors of a ladder terminated in ``r_ac``.

    Under voltage drive V_in = 1∠0; under current drive I_in = 1∠0.
    """

    v_in: complex
    i_in: complex
    v_o: complex
    i_o: complex
    z_in: complex
    r_ac: float
    theta_in: float
    theta_out: float


@dataclass(frozen=True)
class PowerBalance:
    p_in: float
    p_out: float
    relative_mismatch: float


def wrap_degrees(angle):
    """Wrap degrees into (-180, 180]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0
    wrapped = np.where(wrapped <= -180.0, wrapped + 360.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def phase_deg(z):
    return wrap_degrees(np.degrees(np.angle(z)))


def _arm_is_zero(stage: LadderStage, w):
    return np.abs(stage.reactance(w)) <= _ZERO_ARM_RTOL * stage.reactance_scale(w)


def stage_matrix(stage: LadderStage, omega, index: int = 0) -> TransferMatrix:
    """Chain matrix of one arm at a scalar frequency."""
    w = as_omega(omega)
    if np.ndim(w) != 0:
        raise ContractError("stage_matrix takes a scalar frequency; use network_matrix_batch")
    z = stage.impedance(w)
    if stage.orientation is Orientation.SERIES:
        return TransferMatrix.series(z)
    if _arm_is_zero(stage, w):
        raise SingularStageError(index, w)
    return TransferMatrix.shunt(z)


def compose(matrices: Iterable[TransferMatrix]) -> TransferMatrix:
    """Cascade chain matrices left to right, source side first."""
    matrices = list(matrices)
    if not matrices:
        raise ContractError("compose needs at least one matrix")
    total = matrices[0]
    for m in matrices[1:]:
        total = total @ m
    return total


def network_matrix(network: CompensationNetwork, omega) -> TransferMatrix:
    """Chain matrix of the whole ladder (without the load) at one frequency."""
    if not network.stages:
        return TransferMatrix.identity()
    return compose(stage_matrix(s, omega, i) for i, s in enumerate(network.stages))


def network_matrix_batch(network: CompensationNetwork, omegas) -> tuple[TransferMatrix, np.ndarray]:
    """Vectorized chain matrix over a frequency array.

    Returns the matrix (array-valued fields) and a boolean mask of frequencies
    where some shunt arm has zero impedance. Masked entries hold NaN.
    """
    w = np.asarray(as_omega(omegas), dtype=float)
    singular = np.zeros(w.shape, dtype=bool)
    one = np.ones(w.shape, dtype=complex)
    total = TransferMatrix(one, 0 * one, 0 * one, one.copy())
    with np.errstate(divide="ignore", invalid="ignore"):
        for stage in network.stages:
            z = 1j * stage.reactance(w)
            if stage.orientation is Orientation.SERIES:
                m = TransferMatrix.series(z)
            else:
                bad = _arm_is_zero(stage, w)
                singular |= bad
                m = TransferMatrix.shunt(np.where(bad, np.nan, z))
            total = total @ m
    return total, singular


def port_response(m: TransferMatrix, r_ac):
    """Input impedance and voltage gain V_o/V_in for a resistive termination.

    Returns ``(z_in, gain_v, open_input)`` where ``open_input`` flags points
    with |c*R + d| below the open-circuit threshold. Works elementwise.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.asarray(m.a * r_ac + m.b, dtype=complex)
        den = np.asarray(m.c * r_ac + m.d, dtype=complex)
        open_input = np.abs(den) < _OPEN_INPUT_ATOL
        z_in = num / den
        gain_v = r_ac / num
    return z_in, gain_v, open_input


def _check_drive(r_ac: float, drive: str) -> float:
    r_ac = float(r_ac)
    if not (math.isfinite(r_ac) and r_ac > 0.0):
        raise ValidationError(f"R_ac must be positive, got {r_ac!r}")
    if drive not in ("voltage", "current"):
        raise ContractError(f"drive must be 'voltage' or 'current', got {drive!r}")
    return r_ac


def _port_solution(z_in: complex, gain_v: complex, r_ac: float, drive: Drive) -> PortSolution:
    if drive == "voltage":
        v_in = 1.0 + 0j
        i_in = v_in / z_in
    else:
        i_in = 1.0 + 0j
        v_in = z_in * i_in
    v_o = complex(v_in * gain_v)
    i_o = v_o / r_ac
    theta_in = wrap_degrees(math.degrees(math.atan2(z_in.imag, z_in.real)))
    # I_o = V_o / R_ac with R_ac real and positive
    theta_out = 0.0
    return PortSolution(v_in, i_in, v_o, i_o, z_in, r_ac, theta_in, theta_out)


def solve_ports(m: TransferMatrix, r_ac: float, drive: Drive = "voltage") -> PortSolution:
    """Terminate ``m`` in ``r_ac`` and solve the port phasors."""
    r_ac = _check_drive(r_ac, drive)
    z_in, gain_v, open_input = port_response(m, r_ac)
    if open_input or not np.isfinite(z_in):
        raise OpenCircuitResonanceError(
            f"|c*R_ac + d| < {_OPEN_INPUT_ATOL:g}: input port is open-circuit resonant"
        )
    return _port_solution(complex(z_in), complex(gain_v), r_ac, drive)


def ladder_response(network: CompensationNetwork, omegas, r_ac: float):
    """Input impedance and V_o/V_in of a terminated ladder, load side first.

    Walks from the load back to the source: a series arm adds jX to the
    impedance, a shunt arm adds -j/X to the admittance. Neither step touches
    the real part, so Re(Z_in) keeps full relative precision even where the
    input is almost purely reactive and the chain-matrix quotient
    (a*R + b)/(c*R + d) cancels it away. The gain is the product of the
    series-arm voltage dividers.

    Returns ``(z_in, gain_v, singular, open_input)``, elementwise over
    ``omegas``; masked points hold NaN.
    """
    w = np.asarray(as_omega(omegas), dtype=float)
    z = np.full(w.shape, complex(r_ac))
    inv_gain = np.ones(w.shape, dtype=complex)
    singular = np.zeros(w.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for stage in reversed(network.stages):
            x = np.asarray(stage.reactance(w), dtype=float)
            if stage.orientation is Orientation.SERIES:
                z_next = z + 1j * x
                inv_gain = inv_gain * (z_next / z)
                z = z_next
            else:
                singular |= _arm_is_zero(stage, w)
                z = 1.0 / (1.0 / z - 1j / x)
        z_in = np.where(singular, np.nan, z)
        gain_v = np.where(singular, np.nan, 1.0 / inv_gain)
    open_input = ~singular & ~(np.isfinite(z_in) & np.isfinite(gain_v))
    return z_in, gain_v, singular, open_input


def analyze(network: CompensationNetwork, omega, drive: Drive = "voltage") -> PortSolution:
    """Solve ``network`` terminated by its own load at one frequency.

    Uses :func:`ladder_response`; :func:`solve_ports` is the chain-matrix
    route for a given matrix.
    """
    w = as_omega(omega)
    if np.ndim(w) != 0:
        raise ContractError("analyze takes a scalar frequency; use ladder_response")
    r_ac = _check_drive(network.load, drive)
    z_in, gain_v, singular, open_input = ladder_response(network, w, r_ac)
    if singular:
        index = next(i for i, s in enumerate(network.stages)
                     if s.orientation is Orientation.SHUNT and _arm_is_zero(s, w))
        raise SingularStageError(index, w)
    if open_input:
        raise OpenCircuitResonanceError("input port is open-circuit resonant")
    return _port_solution(complex(z_in), complex(gain_v), r_ac, drive)


def power_balance(p: PortSolution, eps: float = 1e-300) -> PowerBalance:
    p_in = 0.5 * (p.v_in * p.i_in.conjugate()).real
    p_out = 0.5 * abs(p.i_o) ** 2 * p.r_ac
    return PowerBalance(p_in, p_out, abs(p_in - p_out) / max(p_in, eps))
