"""Finite-element discrete-variable representation (FEDVR) of the nuclear
coordinate R.

The domain [r_min, r_max] is split into equally sized elements, each carrying
an `order`-point Gauss-Lobatto rule. Basis functions are weight-normalized
Lagrange interpolating polynomials; functions at shared element boundaries
(bridges) are counted once, and the two functions sitting on the domain
endpoints are removed (Dirichlet boundaries). The retained count is

    n_basis = n_elements * (order - 1) - 1

Potentials are exactly diagonal in this basis, and the coefficient of a
wavefunction psi on basis function i is c_i = psi(R_i) * sqrt(w_i).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import Legendre
from scipy.interpolate import CubicSpline
from scipy.sparse import csr_matrix

from .errors import CoverageError, FormatError, ParameterError

__all__ = [
    "FEDVRGrid",
    "build_grid",
    "kinetic_operator",
    "sample_on_grid",
    "interpolate_table",
    "load_curve_table",
]


def gauss_lobatto(n):
    """Nodes and weights of the n-point Gauss-Lobatto rule on [-1, 1].

    Interior nodes are the roots of P'_{n-1}; w_j = 2/(n(n-1) P_{n-1}(x_j)^2)
    with the endpoint weights 2/(n(n-1)). Exact for polynomials up to degree
    2n - 3.
    """
    if n < 2:
        raise ParameterError(f"Gauss-Lobatto rule needs n >= 2, got {n}")
    x = np.empty(n)
    x[0], x[-1] = -1.0, 1.0
    p = Legendre.basis(n - 1)
    if n > 2:
        x[1:-1] = np.sort(p.deriv().roots().real)
    w = 2.0 / (n * (n - 1) * p(x) ** 2)
    return x, w


def _lagrange_derivative_matrix(x):
    """D[r, p] = l_p'(x_r) for the Lagrange polynomials on nodes x."""
    n = len(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)  # barycentric weights
    d = np.zeros((n, n))
    for r in range(n):
        for p_ in range(n):
            if r != p_:
                d[r, p_] = (bary[p_] / bary[r]) / (x[r] - x[p_])
        d[r, r] = -np.sum(d[r, :])
    return d


@dataclass(frozen=True)
class FEDVRGrid:
    """Immutable FEDVR basis description.

    nodes/weights refer to the retained (interior) basis functions; bridge
    weights are the sum of the adjoining element weights.
    """

    r_min: float
    r_max: float
    n_elements: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    element_boundaries: np.ndarray
    n_basis: int
    # per-element quadrature, kept for operator assembly
    elem_points: np.ndarray = field(repr=False, default=None)
    elem_weights: np.ndarray = field(repr=False, default=None)

    @property
    def length(self):
        return self.r_max - self.r_min

    def norm(self, values_at_nodes):
        """L2 norm of a function given by its node values."""
        return float(np.sqrt(np.sum(self.weights * np.abs(values_at_nodes) ** 2)))

    def coefficients(self, values_at_nodes):
        """Basis coefficients c_i = psi(R_i) sqrt(w_i) of a node-sampled function."""
        return values_at_nodes * np.sqrt(self.weights)

    def amplitudes(self, coefficients):
        """Inverse of :meth:`coefficients`: node values psi(R_i)."""
        return coefficients / np.sqrt(self.weights)


def build_grid(r_min, r_max, n_elements, order):
    """Build an FEDVR grid with equally sized elements.

    `order` is the number of Gauss-Lobatto points per element. The two
    functions at r_min and r_max are dropped (Dirichlet), so
    n_basis = n_elements*(order-1) - 1.
    """
    if not r_max > r_min:
        raise ParameterError(f"need r_max > r_min, got [{r_min}, {r_max}]")
    if n_elements < 1:
        raise ParameterError(f"need n_elements >= 1, got {n_elements}")
    if order < 2:
        raise ParameterError(f"need order >= 2, got {order}")
    n_basis = n_elements * (order - 1) - 1
    if n_basis < 1:
        raise ParameterError(
            f"grid ({n_elements} elements, order {order}) retains no basis functions"
        )

    boundaries = np.linspace(r_min, r_max, n_elements + 1)
    x_ref, w_ref = gauss_lobatto(order)

    elem_points = np.empty((n_elements, order))
    elem_weights = np.empty((n_elements, order))
    half = 0.5 * (boundaries[1] - boundaries[0])
    for e in range(n_elements):
        mid = 0.5 * (boundaries[e] + boundaries[e + 1])
        elem_points[e] = mid + half * x_ref
        elem_weights[e] = half * w_ref

    # joined nodes: bridges counted once, weights summed across the bridge
    n_joined = n_elements * (order - 1) + 1
    joined_nodes = np.empty(n_joined)
    joined_weights = np.zeros(n_joined)
    for e in range(n_elements):
        lo = e * (order - 1)
        joined_nodes[lo : lo + order] = elem_points[e]
        joined_weights[lo : lo + order] += elem_weights[e]

    return FEDVRGrid(
        r_min=float(r_min),
        r_max=float(r_max),
        n_elements=int(n_elements),
        order=int(order),
        nodes=joined_nodes[1:-1],
        weights=joined_weights[1:-1],
        element_boundaries=boundaries,
        n_basis=n_basis,
        elem_points=elem_points,
        elem_weights=elem_weights,
    )


def kinetic_operator(grid, mass):
    """-(1/2m) d^2/dR^2 in the FEDVR basis as a sparse symmetric matrix.

    Assembled per element from (1/2m) * integral of phi_i' phi_j' (exact under
    the Lobatto rule), overlapping only at bridge functions; Dirichlet rows
    and columns are removed.
    """
    if mass <= 0:
        raise ParameterError(f"mass must be positive, got {mass}")
    order = grid.order
    n_joined = grid.n_elements * (order - 1) + 1
    joined_weights = np.zeros(n_joined)
    for e in range(grid.n_elements):
        lo = e * (order - 1)
        joined_weights[lo : lo + order] += grid.elem_weights[e]

    t_joined = np.zeros((n_joined, n_joined))
    for e in range(grid.n_elements):
        d = _lagrange_derivative_matrix(grid.elem_points[e])
        k_local = d.T @ (grid.elem_weights[e][:, None] * d)
        lo = e * (order - 1)
        t_joined[lo : lo + order, lo : lo + order] += k_local

    inv_sqrt_w = 1.0 / np.sqrt(joined_weights)
    t_joined *= inv_sqrt_w[:, None] * inv_sqrt_w[None, :]
    t_joined /= 2.0 * mass
    t = t_joined[1:-1, 1:-1]
    t = 0.5 * (t + t.T)  # symmetrize away rounding noise
    return csr_matrix(t)


def sample_on_grid(grid, f):
    """Evaluate a scalar function of R at the grid nodes (diagonal vector)."""
    values = np.asarray([f(r) for r in grid.nodes], dtype=float)
    if not np.all(np.isfinite(values)):
        bad = grid.nodes[~np.isfinite(values)]
        raise ParameterError(f"function not finite at nodes {bad[:5]}")
    return values


def interpolate_table(table, grid, extrapolation=None):
    """Natural cubic-spline interpolation of an (R, value) table onto the grid.

    extrapolation: None (table must cover the grid), 'constant' (clamp to the
    end values), or 'spline' (extend the natural spline).
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
        raise FormatError("table must be an (N >= 2) x 2 array of (R, value)")
    r, v = table[:, 0], table[:, 1]
    if np.any(np.diff(r) <= 0):
        raise FormatError("table R column must be strictly increasing")
    covered = r[0] <= grid.nodes[0] + 1e-12 and r[-1] >= grid.nodes[-1] - 1e-12
    if not covered and extrapolation is None:
        raise CoverageError(
            f"table covers [{r[0]}, {r[-1]}] but grid needs "
            f"[{grid.nodes[0]}, {grid.nodes[-1]}] and no extrapolation rule is set"
        )
    spline = CubicSpline(r, v, bc_type="natural")
    values = spline(grid.nodes)
    if extrapolation == "constant":
        values = np.where(grid.nodes < r[0], v[0], values)
        values = np.where(grid.nodes > r[-1], v[-1], values)
    elif extrapolation not in (None, "spline"):
        raise ParameterError(f"unknown extrapolation rule {extrapolation!r}")
    return values


_R_UNITS = {"bohr": 1.0, "a0": 1.0, "au": 1.0, "angstrom": 1.0 / 0.529177210903}
_V_UNITS = {"hartree": 1.0, "au": 1.0, "ev": 1.0 / 27.211386245988, "e*bohr": 1.0, "e*a0": 1.0}


def load_curve_table(path):
    """Read a tabulated curve file and return an (N, 2) array in atomic units.

    Format: '#' comment lines; unit declarations R_unit=... and V_unit=...
    on comment lines (default: atomic units); two numeric columns.
    """
    r_scale = v_scale = 1.0
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].replace(",", " ").split():
                    if "=" not in token:
                        continue
                    key, _, value = token.partition("=")
                    value = value.lower()
                    if key == "R_unit":
                        if value not in _R_UNITS:
                            raise FormatError(f"{path}:{lineno}: unknown R_unit {value!r}")
                        r_scale = _R_UNITS[value]
                    elif key == "V_unit":
                        if value not in _V_UNITS:
                            raise FormatError(f"{path}:{lineno}: unknown V_unit {value!r}")
                        v_scale = _V_UNITS[value]
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric data") from exc
    if len(rows) < 2:
        raise FormatError(f"{path}: fewer than two data rows")
    table = np.array(rows)
    table[:, 0] *= r_scale
    table[:, 1] *= v_scale
    return table
