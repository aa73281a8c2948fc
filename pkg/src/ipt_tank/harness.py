"""Frequency/load sweeps and CC-ZPA / CV-ZPA verification reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .circuit import CompensationNetwork, Orientation, as_omega
from .conditions import mode_residuals, ssp_reactances_of
from .errors import DegenerateConditionError, IptError
from .tanks import DEFAULT_ANGLE_TOL_DEG, Mode, phase_relation_check
from .twoport import analyze, ladder_response, phase_deg

CSV_HEADER = (
    "omega_rad_s", "f_hz", "r_ac_ohm", "re_zin", "im_zin", "theta_in_deg",
    "mag_vo_vin", "mag_io_vin_s", "arg_io_vin_deg", "arg_vo_vin_deg",
    "p_in_w", "p_out_w", "flag",
)

SINGULAR = "SINGULAR"


@dataclass(frozen=True)
class Tolerances:
    spread: float = 1e-6
    angle_deg: float = DEFAULT_ANGLE_TOL_DEG
    residual: float = 1e-9


@dataclass(frozen=True, slots=True)
class SweepRecord:
    """One (omega, R_ac) point under 1 V input drive.

    Singular points carry ``flag == "SINGULAR"``, a ``reason`` and ``None``
    in every numeric field except ``omega`` and ``r_ac``.
    """

    omega: float
    r_ac: float
    z_in: complex | None = None
    theta_in: float | None = None
    mag_vo_vin: float | None = None
    mag_io_vin: float | None = None
    arg_io_vin: float | None = None
    arg_vo_vin: float | None = None
    p_in: float | None = None
    p_out: float | None = None
    flag: str = ""
    reason: str = ""

    @property
    def singular(self) -> bool:
        return self.flag == SINGULAR

    @property
    def power_mismatch(self) -> float:
        return abs(self.p_in - self.p_out) / max(self.p_in, 1e-300)


def sweep(network: CompensationNetwork, omegas: Iterable[float],
          loads: Iterable[float]) -> list[SweepRecord]:
    """Evaluate the ladder on every (omega, R_ac) pair, ordered by omega then R_ac.

    The network's own load is ignored; each value in ``loads`` is used in turn.
    """
    w = np.sort(np.asarray([as_omega(o) for o in omegas], dtype=float))
    loads = sorted(float(r) for r in loads)
    if w.size == 0 or not loads:
        raise ValueError("sweep needs at least one frequency and one load")
    if w[0] <= 0 or loads[0] <= 0:
        raise ValueError("frequencies and loads must be positive")
    columns = []
    for r in loads:
        z_in, gain_v, singular, open_input = ladder_response(network, w, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            i_in = 1.0 / z_in
            i_o = gain_v / r
            p_in = 0.5 * i_in.real
            p_out = 0.5 * np.abs(i_o) ** 2 * r
        bad = singular | open_input | ~np.isfinite(z_in) | ~np.isfinite(gain_v)
        reasons = np.where(singular, "shunt arm short", np.where(open_input, "open input", "non-finite"))
        columns.append((r, z_in, phase_deg(z_in), np.abs(gain_v), np.abs(i_o), phase_deg(i_o),
                        phase_deg(gain_v), p_in, p_out, bad, reasons))
    records = []
    for i, omega in enumerate(w.tolist()):
        for r, z_in, th, mv, mi, aio, avo, p_in, p_out, bad, reasons in columns:
            if bad[i]:
                records.append(SweepRecord(omega, r, flag=SINGULAR, reason=str(reasons[i])))
                continue
            records.append(SweepRecord(
                omega, r, complex(z_in[i]), float(th[i]), float(mv[i]), float(mi[i]),
                float(aio[i]), float(avo[i]), float(p_in[i]), float(p_out[i]),
            ))
    return records


def passivity_violations(records: Iterable[SweepRecord], mismatch_tol: float = 1e-9) -> list[SweepRecord]:
    """Records with Re(Z_in) < 0 or a real-power mismatch above ``mismatch_tol``."""
    return [r for r in records
            if not r.singular and (r.z_in.real < 0 or r.power_mismatch >= mismatch_tol)]


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_sweep_csv(records: Sequence[SweepRecord], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        if rec.singular:
            writer.writerow([_fmt(rec.omega), _fmt(rec.omega / (2 * math.pi)), _fmt(rec.r_ac)]
                            + [""] * 9 + [SINGULAR])
            continue
        writer.writerow([
            _fmt(rec.omega), _fmt(rec.omega / (2 * math.pi)), _fmt(rec.r_ac),
            _fmt(rec.z_in.real), _fmt(rec.z_in.imag), _fmt(rec.theta_in),
            _fmt(rec.mag_vo_vin), _fmt(rec.mag_io_vin), _fmt(rec.arg_io_vin),
            _fmt(rec.arg_vo_vin), _fmt(rec.p_in), _fmt(rec.p_out), rec.flag,
        ])


def sweep_csv_text(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    write_sweep_csv(records, buf)
    return buf.getvalue()


def relative_spread(values: Sequence[float]) -> float:
    """(max - min) / mean."""
    arr = np.asarray(values, dtype=float)
    return float((arr.max() - arr.min()) / arr.mean())


def is_ssp_ladder(network: CompensationNetwork) -> bool:
    pattern = (Orientation.SERIES, Orientation.SHUNT, Orientation.SERIES, Orientation.SHUNT)
    return tuple(s.orientation for s in network.stages) == pattern


@dataclass(frozen=True)
class VerificationReport:
    mode: Mode
    omega: float
    loads: tuple[float, ...]
    spread: float
    max_abs_theta_in: float
    worst_phase_deviation_deg: float
    phase_relations_pass: bool
    residuals: dict[str, float | None]
    checks: dict[str, bool]
    warnings: tuple[str, ...] = ()
    verdict: bool = False
    gains: tuple[float, ...] = field(default=())

    def failing_checks(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["f_hz"] = self.omega / (2 * math.pi)
        d["failing_checks"] = self.failing_checks()
        d["warnings"] = list(self.warnings)
        d["loads"] = list(self.loads)
        d["gains"] = list(self.gains)
        return d


def _verify(network: CompensationNetwork, omega, loads: Sequence[float], tol: Tolerances,
            mode: Mode) -> VerificationReport:
    w = as_omega(omega)
    loads = tuple(float(r) for r in loads)
    if not loads:
        raise ValueError("verification needs at least one load")
    warnings: list[str] = []
    gains, thetas, deviations, relations_ok = [], [], [], True
    solved = True
    for r in loads:
        try:
            p = analyze(network.with_load(r), w)
        except IptError as exc:
            warnings.append(f"R_ac={r!r}: {exc}")
            solved = False
            continue
        gains.append(abs(p.i_o) if mode is Mode.CC else abs(p.v_o))
        thetas.append(abs(p.theta_in))
        rep = phase_relation_check(p, mode, tol.angle_deg)
        deviations.append(max(rep.deviations.values()))
        relations_ok &= rep.passed

    if solved:
        spread = relative_spread(gains)
        max_theta = max(thetas)
        worst_dev = max(deviations)
    else:
        spread = max_theta = worst_dev = math.inf
        relations_ok = False
    if len(loads) == 1:
        warnings.append("single load: the load-independence spread check is vacuous")

    gain_name = "spread_io_vin" if mode is Mode.CC else "spread_vo_vin"
    checks = {
        gain_name: spread < tol.spread,
        "theta_in": max_theta < tol.angle_deg,
        "phase_relations": relations_ok,
    }

    residuals: dict[str, float | None] = {}
    if is_ssp_ladder(network):
        x = ssp_reactances_of(network, w, mode)
        names = ("cc", "zpa_cc") if mode is Mode.CC else ("cv", "zpa_cv")
        try:
            values = mode_residuals(x)
        except DegenerateConditionError as exc:
            warnings.append(str(exc))
            values = (math.inf, math.inf)
        for name, value in zip(names, values):
            # dimensionless: divide by the magnetizing reactance
            residuals[name] = value / x.x2
        checks["residuals"] = all(abs(v) < tol.residual for v in residuals.values())
    else:
        warnings.append("not an S-SP ladder: condition residuals not evaluated")

    return VerificationReport(
        mode=mode, omega=w, loads=loads, spread=spread, max_abs_theta_in=max_theta,
        worst_phase_deviation_deg=worst_dev, phase_relations_pass=relations_ok,
        residuals=residuals, checks=checks, warnings=tuple(warnings),
        verdict=all(checks.values()), gains=tuple(gains),
    )


def verify_cc(network: CompensationNetwork, omega_cc, loads: Sequence[float],
              tol: Tolerances = Tolerances()) -> VerificationReport:
    """Load-independent output current with zero input phase at ``omega_cc``.

    Checks the relative spread of |I_o/V_in| over ``loads``, |theta_in| at
    every load, the V-C and C-V quadrature relations and (for S-SP ladders)
    the normalized CC and ZPA residuals.
    """
    return _verify(network, omega_cc, loads, tol, Mode.CC)


def verify_cv(network: CompensationNetwork, omega_cv, loads: Sequence[float],
              tol: Tolerances = Tolerances()) -> VerificationReport:
    """CV counterpart of :func:`verify_cc` (|V_o/V_in| spread, V-V and C-C relations)."""
    return _verify(network, omega_cv, loads, tol, Mode.CV)
