"""Green kernel of the Euler-alpha model and boundary-integral velocity.

The stream kernel is G(rho) = (1/2pi)(log rho + K_0(rho/alpha)): the Euler
log kernel plus a screened correction.  The two pieces have cancelling log
singularities, so their sum extends continuously to the diagonal with value
log(2 alpha) - gamma; all boundary quadratures here exploit that by
evaluating the combined kernel and replacing the diagonal node by the
analytic limit (the trapezoid weights and symmetry are preserved).

Line integrals over the circle parameter use the plain (1/2pi) d-theta
convention of the velocity representation
     v(z) = -(1/2pi) oint [log|z-xi| + K_0(|z-xi|/alpha)] d-xi ;
the conformal functional in :mod:`vortexalpha.vstates` uses the
1/(2 i pi)-normalized line integral instead -- each usage documents its
convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun as sf
from .errors import DomainError, GridError

EULER_GAMMA = sf.EULER_GAMMA


@dataclass(frozen=True)
class Boundary:
    """Closed curve sampled at M uniform parameter values on [0, 2pi).

    ``points[k]`` is the complex position at theta_k = 2 pi k / M and
    ``tangents[k]`` the parameter derivative d xi / d theta there.  The
    closing node theta = 2pi must not be duplicated.
    """

    points: np.ndarray
    tangents: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        tan = np.asarray(self.tangents, dtype=complex)
        if pts.ndim != 1 or pts.shape != tan.shape:
            raise GridError("points and tangents must be 1-d arrays of equal size")
        if pts.size < 8:
            raise GridError("boundary needs at least 8 nodes")
        if pts.size % 2 != 0:
            raise GridError("boundary grid size must be even")
        if pts[0] == pts[-1]:
            raise GridError(
                "boundary looks endpoint-duplicated; drop the closing node"
            )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tangents", tan)

    @property
    def size(self):
        return self.points.size


def boundary_circle(radius=1.0, M=256):
    """Uniformly sampled circle of given radius."""
    theta = 2 * np.pi * np.arange(M) / M
    w = np.exp(1j * theta)
    return Boundary(radius * w, 1j * radius * w)


def green_kernel(alpha, rho):
    """Stream kernel (1/2pi)(log rho + K_0(rho/alpha)); rho > 0.

    Accepts scalars or arrays; every entry must be positive.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    arr = np.asarray(rho, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("green_kernel requires rho > 0")
    out = (np.log(arr) + sf.k0_array(arr / alpha)) / (2 * np.pi)
    return float(out) if np.isscalar(rho) else out


def combined_boundary_kernel(alpha, rho):
    """log rho + K_0(rho/alpha), continued by log(2 alpha) - gamma at rho = 0."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    arr = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(arr < 0):
        raise DomainError("rho must be nonnegative")
    out = np.full(arr.shape, math.log(2 * alpha) - EULER_GAMMA)
    pos = arr > 0
    if pos.any():
        out[pos] = np.log(arr[pos]) + sf.k0_array(arr[pos] / alpha)
    return float(out[0]) if np.isscalar(rho) or np.ndim(rho) == 0 else out


def _kernel_values(alpha, rho, kind):
    """Kernel values on a nonnegative distance array, by kernel kind."""
    rho = np.asarray(rho, dtype=float)
    on_diag = rho == 0.0
    if kind == "combined":
        return combined_boundary_kernel(alpha, rho)
    if on_diag.any():
        raise GridError(
            f"kernel {kind!r} is singular on the diagonal; evaluate the "
            "combined kernel or move the target off the node"
        )
    if kind == "euler":
        return np.log(rho)
    if kind == "sw":
        return sf.k0_array(rho / alpha)
    raise DomainError(f"unknown kernel kind {kind!r}")


def velocity_at(alpha, boundary, z, kernel="combined"):
    """Filtered velocity at a complex point from the boundary integral.

    Trapezoidal rule on the uniform parameter grid; if z falls on a grid
    node the (continuous) combined kernel takes its diagonal limit there.
    ``kernel`` selects the combined evaluation (default) or the separate
    Euler / screened pieces for superposition cross-checks.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if not isinstance(boundary, Boundary):
        raise GridError("boundary must be a Boundary instance")
    rho = np.abs(complex(z) - boundary.points)
    vals = _kernel_values(alpha, rho, kernel)
    return complex(-(vals * boundary.tangents).mean())


def velocity_field(alpha, boundary, targets, kernel="combined"):
    """velocity_at over an array of targets (read-only boundary sharing)."""
    targets = np.asarray(targets, dtype=complex)
    flat = targets.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i, z in enumerate(flat):
        out[i] = velocity_at(alpha, boundary, z, kernel=kernel)
    return out.reshape(targets.shape)


@dataclass(frozen=True)
class ConvergenceReport:
    """Grid-doubling record for the boundary quadrature."""

    grid_sizes: tuple
    values: tuple
    observed_order: float


def velocity_convergence(alpha, curve, z, M0=64, levels=3, kernel="combined"):
    """Observed convergence order of velocity_at under grid doubling.

    ``curve(M)`` must return the Boundary resampled at M nodes.  The order
    is estimated from the last three levels by Richardson comparison.
    """
    sizes = [M0 * 2**k for k in range(levels + 1)]
    vals = [velocity_at(alpha, curve(M), z, kernel=kernel) for M in sizes]
    d1 = abs(vals[-2] - vals[-1])
    d0 = abs(vals[-3] - vals[-2])
    order = math.log2(d0 / d1) if d1 > 0 else math.inf
    return ConvergenceReport(tuple(sizes), tuple(vals), order)


def poisson_integral(x):
    """Closed form of int_{-pi}^{pi} log(1 + x^2 - 2 x cos eta) d eta."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    if abs(x) <= 1.0:
        return 0.0
    return 4 * math.pi * math.log(abs(x))


def poisson_integral_quadrature(x, M=4096):
    """Midpoint-rule companion to :func:`poisson_integral`.

    The midpoint grid never hits eta = 0, so the boundary case |x| = 1
    (integrable log singularity) is handled without special-casing.
    """
    x = float(x)
    eta = -np.pi + (np.arange(M) + 0.5) * (2 * np.pi / M)
    vals = np.log(1.0 + x * x - 2.0 * x * np.cos(eta))
    return float(vals.sum() * (2 * np.pi / M))
