"""Modified nodal analysis of a ladder, independent of the chain-matrix path.

Serves as an oracle for :mod:`ipt_tank.twoport`. Unknowns are the node
voltages (node 0 is the source node, each series arm opens a new node) plus
one branch current per arm and one for the load. Arm equations are written
with the impedance jX itself, so no admittance is ever formed and the matrix
entries are exact. The dense solve is followed by iterative refinement with
the residual taken in extended precision.
"""

from __future__ import annotations

import numpy as np

from .circuit import CompensationNetwork, Orientation, as_omega
from .errors import SingularStageError

_REFINEMENT_STEPS = 3


def mna_system(network: CompensationNetwork, omega: float, i_in: complex = 1.0) -> tuple[np.ndarray, np.ndarray, int]:
    """Return (matrix, rhs, number of nodes) for a current ``i_in`` into node 0."""
    w = as_omega(omega)
    n_nodes = 1 + sum(1 for s in network.stages if s.orientation is Orientation.SERIES)
    n_branches = len(network.stages) + 1
    size = n_nodes + n_branches
    m = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    rhs[0] = i_in
    node = 0
    for index, stage in enumerate(network.stages):
        row = n_nodes + index
        z = 1j * stage.reactance(w)
        if stage.orientation is Orientation.SERIES:
            # V_node - V_next - z*I = 0; I leaves node, enters next
            m[row, node], m[row, node + 1], m[row, row] = 1.0, -1.0, -z
            m[node, row] += 1.0
            m[node + 1, row] -= 1.0
            node += 1
        else:
            if z == 0:
                raise SingularStageError(index, w)
            m[row, node], m[row, row] = 1.0, -z
            m[node, row] += 1.0
    load_row = size - 1
    m[load_row, node], m[load_row, load_row] = 1.0, -network.load
    m[node, load_row] += 1.0
    return m, rhs, n_nodes


def nodal_voltages(network: CompensationNetwork, omega: float, i_in: complex = 1.0) -> np.ndarray:
    """Node voltages for a current ``i_in`` injected at the input node."""
    m, rhs, n_nodes = mna_system(network, omega, i_in)
    x = np.linalg.solve(m, rhs)
    m_ext = m.astype(np.clongdouble)
    rhs_ext = rhs.astype(np.clongdouble)
    for _ in range(_REFINEMENT_STEPS):
        resid = (rhs_ext - m_ext @ x.astype(np.clongdouble)).astype(complex)
        x = x + np.linalg.solve(m, resid)
    return x[:n_nodes]


def nodal_input_impedance(network: CompensationNetwork, omega: float) -> complex:
    return complex(nodal_voltages(network, omega)[0])


def nodal_voltage_gain(network: CompensationNetwork, omega: float) -> complex:
    """V_o / V_in of the terminated ladder."""
    v = nodal_voltages(network, omega)
    return complex(v[-1] / v[0])
