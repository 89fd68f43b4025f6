"""Uniform 1-D grids, wave functions and basic packet operations.

Conventions used throughout the package (natural units unless stated):

* a wave function is a complex array sampled on a uniform grid, tagged with
  the representation it lives in (position, momentum, oriented energy or
  arrival time) and the physical constants (hbar, mass),
* the squared norm is the Riemann sum ``sum |psi_i|^2 * step``,
* the momentum operator is ``(hbar/i) d/dx``,
* packets are expected to decay at the grid edges; periodic wrap-around is a
  discretization artefact, never physics.
"""

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridMismatch, GridTooSmall, NonPositiveWidth, RepMismatch


class Representation(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"
    ORIENTED_ENERGY = "oriented_energy"
    ARRIVAL_TIME = "arrival_time"


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid: point(i) = origin + i * step for 0 <= i < count."""

    origin: float
    step: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.origin) and math.isfinite(self.step)):
            raise ValueError("grid origin and step must be finite")
        if self.step <= 0.0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.count < 8:
            raise ValueError(f"grid needs at least 8 points, got {self.count}")

    @cached_property
    def points(self) -> np.ndarray:
        pts = self.origin + self.step * np.arange(self.count)
        pts.setflags(write=False)
        return pts

    def point(self, i: int) -> float:
        return self.origin + i * self.step

    @property
    def span(self) -> float:
        """Length of the sampled box, count * step."""
        return self.count * self.step

    @property
    def last(self) -> float:
        return self.point(self.count - 1)

    def conjugate(self, hbar: float) -> "Grid1D":
        """Fourier-conjugate grid: step 2*pi*hbar/span, centered on zero."""
        dk = 2.0 * math.pi * hbar / self.span
        return Grid1D(-(self.count // 2) * dk, dk, self.count)

    @classmethod
    def from_bounds(cls, lo: float, hi: float, count: int) -> "Grid1D":
        """Grid covering [lo, hi) with the usual half-open FFT layout."""
        return cls(lo, (hi - lo) / count, count)


@dataclass(frozen=True)
class PhysicalParams:
    """Planck constant and particle mass, both strictly positive."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise ValueError("hbar must be positive")
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise ValueError("mass must be positive")


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Sampled wave function tagged with its representation.

    Values are stored as an immutable complex128 copy; operations on wave
    functions are pure functions returning new instances.
    """

    grid: Grid1D
    values: np.ndarray
    rep: Representation
    params: PhysicalParams = field(default_factory=PhysicalParams)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128, copy=True)
        if vals.shape != (self.grid.count,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid count {self.grid.count}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    def with_values(self, values: np.ndarray, rep: Representation | None = None,
                    grid: Grid1D | None = None) -> "WaveFunction":
        return WaveFunction(grid or self.grid, values, rep or self.rep, self.params)

    def require_rep(self, rep: Representation) -> None:
        if self.rep is not rep:
            raise RepMismatch(f"expected {rep.value} representation, got {self.rep.value}")


@dataclass(frozen=True, eq=False)
class CurrentField:
    """Probability current j(x) sampled on a position grid at fixed time."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def norm_squared(psi: WaveFunction) -> float:
    """Squared L2 norm, sum |psi_i|^2 * step."""
    return float(np.sum(np.abs(psi.values) ** 2) * psi.grid.step)


def inner_product(phi: WaveFunction, psi: WaveFunction) -> complex:
    """Sesquilinear product sum conj(phi_i) psi_i * step (linear in psi)."""
    if phi.grid != psi.grid:
        raise GridMismatch("inner product requires identical grids")
    if phi.rep is not psi.rep:
        raise RepMismatch("inner product requires matching representations")
    return complex(np.sum(np.conj(phi.values) * psi.values) * phi.grid.step)


def moments(psi: WaveFunction) -> tuple[float, float]:
    """Mean and standard deviation of the wave function's own coordinate."""
    w = np.abs(psi.values) ** 2
    total = np.sum(w)
    if total <= 0.0:
        raise ValueError("cannot compute moments of the zero function")
    u = psi.points
    mean = float(np.sum(u * w) / total)
    var = float(np.sum((u - mean) ** 2 * w) / total)
    return mean, math.sqrt(max(var, 0.0))


def packet_fits_box(psi: WaveFunction, rel_tol: float = 1e-12,
                    edge_fraction: float = 0.05) -> bool:
    """True when |values| fall below rel_tol * max|values| near both grid edges."""
    n_edge = max(1, int(edge_fraction * psi.grid.count))
    amp = np.abs(psi.values)
    peak = amp.max()
    if peak == 0.0:
        return True
    edge = max(amp[:n_edge].max(), amp[-n_edge:].max())
    return bool(edge <= rel_tol * peak)


def require_fits_box(psi: WaveFunction, rel_tol: float = 1e-12,
                     edge_fraction: float = 0.05) -> None:
    if not packet_fits_box(psi, rel_tol, edge_fraction):
        raise GridTooSmall(
            "packet does not decay below the edge tolerance inside the grid box"
        )


def gaussian_packet(grid: Grid1D, params: PhysicalParams, center_x: float,
                    center_p: float, sigma_p: float) -> WaveFunction:
    """Normalized minimum-uncertainty packet in the position representation.

    sigma_p is the standard deviation of the momentum density |psi~(p)|^2; the
    position spread is hbar / (2 sigma_p).  The returned packet is normalized
    on the grid and checked against the edge-decay requirement.
    """
    if not (sigma_p > 0.0 and math.isfinite(sigma_p)):
        raise NonPositiveWidth(f"sigma_p must be positive, got {sigma_p}")
    sigma_x = params.hbar / (2.0 * sigma_p)
    x = grid.points
    envelope = np.exp(-((x - center_x) ** 2) / (4.0 * sigma_x**2))
    phase = np.exp(1j * center_p * (x - center_x) / params.hbar)
    values = envelope * phase
    nrm = math.sqrt(float(np.sum(np.abs(values) ** 2) * grid.step))
    if nrm == 0.0:
        raise GridTooSmall("packet underflows to zero on this grid")
    psi = WaveFunction(grid, values / nrm, Representation.POSITION, params)
    require_fits_box(psi)
    return psi


def spectral_derivative(values: np.ndarray, step: float) -> np.ndarray:
    """d/du of periodic samples via the FFT; the Nyquist mode is dropped.

    Zeroing the Nyquist multiplier keeps the derivative matrix exactly
    anti-Hermitian on even-length grids.
    """
    n = len(values)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=step)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(values))


def probability_current(psi: WaveFunction) -> CurrentField:
    """Probability current j(x) = (hbar/m) Im(conj(psi) dpsi/dx).

    The derivative is spectral, which is accurate for packets that decay at
    the box edges.
    """
    psi.require_rep(Representation.POSITION)
    dpsi = spectral_derivative(psi.values, psi.grid.step)
    j = (psi.params.hbar / psi.params.mass) * np.imag(np.conj(psi.values) * dpsi)
    return CurrentField(psi.grid, j)
