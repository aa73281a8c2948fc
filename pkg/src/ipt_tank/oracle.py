"""Brute-force check of a finished S-SP design, independent of the solver.

ZPA means a resistive input impedance, so the oracle looks for sign changes
of Im(Z_in) on a dense log grid and refines them by bisection. Load
independence shows up as a minimum of the spread of |I_o/V_in| (CC) or
|V_o/V_in| (CV) over the load set. A design is CC-ZPA (CV-ZPA) compatible at
a frequency where a spread minimum and a ZPA root of every load coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .circuit import CompensationNetwork, CoupledCoils, build_ssp
from .twoport import network_matrix, network_matrix_batch, port_response

DEFAULT_POINTS = 2000
COINCIDENCE_RTOL = 1e-4
ROOT_IMAG_RTOL = 1e-9


def bisect_root(f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-13,
                max_iter: int = 200, widths: list[float] | None = None) -> float:
    """Bisect a sign change of ``f`` on [lo, hi] until the bracket is ``rtol`` wide (relative)."""
    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise ValueError("bisect_root needs a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if widths is not None:
            widths.append(hi - lo)
        if hi - lo <= rtol * abs(mid) or mid in (lo, hi):
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _z_in(network: CompensationNetwork, omega: float, r: float) -> complex:
    z, _, _ = port_response(network_matrix(network, omega), r)
    return complex(z)


def zpa_roots(network: CompensationNetwork, grid: np.ndarray, r: float,
              rtol: float = 1e-13) -> tuple[list[float], list[float]]:
    """Frequencies in ``grid``'s span where Im(Z_in) crosses zero with ``r`` as load.

    Returns (roots, rejected); a crossing is rejected when the refined point
    is not resistive to ROOT_IMAG_RTOL (an impedance pole, not a zero).
    """
    m, singular = network_matrix_batch(network, grid)
    z, _, _ = port_response(m, r)
    im = np.where(singular, np.nan, z.imag)
    roots, rejected = [], []
    # walk consecutive nonzero samples; zeros only count when the sign flips across them
    prev = None
    for i, v in enumerate(im):
        if not np.isfinite(v):
            prev = None
            continue
        if v == 0.0:
            continue
        if prev is not None and np.sign(im[prev]) != np.sign(v):
            if i == prev + 1:
                w = bisect_root(lambda om: _z_in(network, om, r).imag, float(grid[prev]), float(grid[i]), rtol)
            else:
                w = float(grid[(prev + i) // 2])
            zw = _z_in(network, w, r)
            (roots if abs(zw.imag) < ROOT_IMAG_RTOL * abs(zw) else rejected).append(w)
        prev = i
    return roots, rejected


def gain_spreads(network: CompensationNetwork, omegas, loads: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Relative (max - min)/mean spread of |I_o/V_in| and |V_o/V_in| over ``loads``."""
    m, singular = network_matrix_batch(network, np.atleast_1d(np.asarray(omegas, dtype=float)))
    gv = np.array([np.abs(port_response(m, r)[1]) for r in loads])
    gi = gv / np.asarray(loads, dtype=float)[:, None]

    def spread(g):
        out = (g.max(axis=0) - g.min(axis=0)) / g.mean(axis=0)
        return np.where(singular, np.nan, out)

    return spread(gi), spread(gv)


def _refined_minima(metric: Callable[[float], float], grid: np.ndarray, values: np.ndarray) -> list[tuple[float, float]]:
    minima = []
    for i in range(1, len(grid) - 1):
        v = values[i - 1:i + 2]
        if not np.all(np.isfinite(v)) or not (v[1] <= v[0] and v[1] <= v[2]):
            continue
        res = minimize_scalar(metric, bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                              options={"xatol": 1e-12 * grid[i]})
        minima.append((float(res.x), float(res.fun)))
    return minima


@dataclass
class OracleResult:
    omega_bounds: tuple[float, float]
    points: int
    zpa_roots: dict[float, list[float]]
    rejected_crossings: dict[float, list[float]]
    spread_i_minima: list[tuple[float, float]]
    spread_v_minima: list[tuple[float, float]]
    cc_frequencies: list[float] = field(default_factory=list)
    cv_frequencies: list[float] = field(default_factory=list)

    @property
    def cc_compatible(self) -> bool:
        return bool(self.cc_frequencies)

    @property
    def cv_compatible(self) -> bool:
        return bool(self.cv_frequencies)

    def matches(self, omega: float, mode: str, rtol: float = COINCIDENCE_RTOL) -> bool:
        found = self.cc_frequencies if mode.upper() == "CC" else self.cv_frequencies
        return any(abs(w - omega) <= rtol * omega for w in found)


def _coincident(minima, roots_by_load, rtol) -> list[float]:
    hits = []
    for w_min, _ in minima:
        if all(any(abs(r - w_min) <= rtol * w_min for r in roots) for roots in roots_by_load.values()):
            hits.append(w_min)
    return hits


def oracle_verify(coils: CoupledCoils, c_p: float, c_ss: float, c_sp: float,
                  loads: Sequence[float], omega_bounds: tuple[float, float],
                  points: int = DEFAULT_POINTS, coincidence_rtol: float = COINCIDENCE_RTOL,
                  bisect_rtol: float = 1e-13) -> OracleResult:
    """Locate CC-ZPA and CV-ZPA frequencies of an S-SP design by sweeping."""
    if points < 2:
        raise ValueError("need at least two grid points")
    loads = sorted(float(r) for r in loads)
    network = build_ssp(coils, c_p, c_ss, c_sp, loads[0])
    return oracle_sweep(network, loads, omega_bounds, points, coincidence_rtol, bisect_rtol)


def oracle_sweep(network: CompensationNetwork, loads: Sequence[float],
                 omega_bounds: tuple[float, float], points: int = DEFAULT_POINTS,
                 coincidence_rtol: float = COINCIDENCE_RTOL, bisect_rtol: float = 1e-13) -> OracleResult:
    """:func:`oracle_verify` for an arbitrary ladder."""
    lo, hi = (float(v) for v in omega_bounds)
    if not 0 < lo < hi:
        raise ValueError(f"omega_bounds must satisfy 0 < lo < hi, got {omega_bounds!r}")
    grid = np.geomspace(lo, hi, points)
    roots, rejected = {}, {}
    for r in loads:
        roots[r], rejected[r] = zpa_roots(network, grid, r, bisect_rtol)
    spread_i, spread_v = gain_spreads(network, grid, loads)
    min_i = _refined_minima(lambda w: float(gain_spreads(network, w, loads)[0][0]), grid, spread_i)
    min_v = _refined_minima(lambda w: float(gain_spreads(network, w, loads)[1][0]), grid, spread_v)
    return OracleResult(
        omega_bounds=(lo, hi), points=points, zpa_roots=roots, rejected_crossings=rejected,
        spread_i_minima=min_i, spread_v_minima=min_v,
        cc_frequencies=_coincident(min_i, roots, coincidence_rtol),
        cv_frequencies=_coincident(min_v, roots, coincidence_rtol),
    )
