"""Classical statistical-ensemble counterpart of the quantum constructions.

A phase-space density of free particles is represented by weighted Monte
Carlo samples.  Free evolution moves positions along straight lines,
phi(t; x, p) = phi(0; x - (t/m) p, p); position and momentum densities are
the marginals.  For large t the rescaled position density recovers the
momentum density,

    mu(p) = lim (t/m) rho(t, x0 + (t/m) p)            (1-D exponent),

which also holds verbatim for |psi(t,x)|^2 of a freely evolving packet and
fixes the quantum momentum density as |psi~(p)|^2.  The module also provides
the Monte Carlo oriented-arrival-time oracle used to validate the quantum
distribution's quasiclassical mean.

All stochastic constructors take explicit seeds; reductions are plain numpy
(pairwise) sums, so results are reproducible bit-for-bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .arrival import oriented_arrival_time
from .errors import (BinRangeTooSmall, BoxOverflow, MomentumFloorViolated,
                     RepMismatch)
from .grids import (Grid1D, PhysicalParams, Representation, WaveFunction,
                    moments)
from .transforms import evolve_free, fourier_eval, to_momentum


@dataclass(frozen=True, eq=False)
class PhaseSpaceEnsemble:
    """Weighted samples (x_i, p_i, w_i) of a classical phase-space density."""

    x: np.ndarray
    p: np.ndarray
    w: np.ndarray
    params: PhysicalParams

    def __post_init__(self):
        for name in ("x", "p", "w"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.x) == len(self.p) == len(self.w)):
            raise ValueError("sample arrays must have equal lengths")
        if np.any(self.w < 0.0):
            raise ValueError("weights must be nonnegative")
        if abs(float(np.sum(self.w)) - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        second = float(np.sum(self.w * (self.x**2 + self.p**2)))
        if not math.isfinite(second):
            raise ValueError("ensemble must have finite second moments")

    @property
    def size(self) -> int:
        return len(self.x)


def gaussian_ensemble(params: PhysicalParams, mean_x: float, sigma_x: float,
                      mean_p: float, sigma_p: float, count: int,
                      seed: int) -> PhaseSpaceEnsemble:
    """Product-Gaussian ensemble with independent x and p marginals."""
    rng = np.random.default_rng(seed)
    x = rng.normal(mean_x, sigma_x, count)
    p = rng.normal(mean_p, sigma_p, count)
    w = np.full(count, 1.0 / count)
    return PhaseSpaceEnsemble(x, p, w, params)


def ensemble_from_packet(psi: WaveFunction, count: int,
                         seed: int) -> PhaseSpaceEnsemble:
    """Classical stand-in for a quantum packet: independent Gaussian marginals
    matching the packet's position and momentum moments."""
    if psi.rep is Representation.POSITION:
        psi_x, psi_p = psi, to_momentum(psi)
    elif psi.rep is Representation.MOMENTUM:
        from .transforms import to_position
        psi_x, psi_p = to_position(psi), psi
    else:
        raise RepMismatch("need a position- or momentum-representation packet")
    mx, sx = moments(psi_x)
    mp, sp = moments(psi_p)
    return gaussian_ensemble(psi.params, mx, sx, mp, sp, count, seed)


def evolve_ensemble(e: PhaseSpaceEnsemble, t: float) -> PhaseSpaceEnsemble:
    """Free motion: positions advance by (t/m) p, momenta are constants."""
    return PhaseSpaceEnsemble(e.x + (t / e.params.mass) * e.p, e.p, e.w, e.params)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Weighted histogram: masses per bin (not densities)."""

    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        for name in ("edges", "masses"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.widths


@dataclass(frozen=True)
class Marginals:
    rho: Histogram
    mu: Histogram


def _histogram(values: np.ndarray, weights: np.ndarray, edges: np.ndarray,
               strict: bool = True) -> Histogram:
    if strict and (values.min() < edges[0] or values.max() > edges[-1]):
        raise BinRangeTooSmall(
            f"samples span [{values.min():g}, {values.max():g}] but bins cover "
            f"[{edges[0]:g}, {edges[-1]:g}]")
    masses, _ = np.histogram(values, bins=edges, weights=weights)
    return Histogram(edges, masses)


def marginals(e: PhaseSpaceEnsemble, x_edges: np.ndarray,
              p_edges: np.ndarray) -> Marginals:
    """Position and momentum histograms; each sums to the total weight (one)."""
    return Marginals(_histogram(e.x, e.w, np.asarray(x_edges, dtype=float)),
                     _histogram(e.p, e.w, np.asarray(p_edges, dtype=float)))


def l1_distance(h1: Histogram, h2: Histogram) -> float:
    if h1.edges.shape != h2.edges.shape or not np.allclose(h1.edges, h2.edges):
        raise ValueError("histograms must share bin edges")
    return float(np.sum(np.abs(h1.masses - h2.masses)))


def momentum_from_position_limit(e: PhaseSpaceEnsemble, x0: float, t: float,
                                 p_edges: np.ndarray) -> Histogram:
    """Momentum density recovered from the position density at time t.

    Evolves the ensemble and reads (t/m) rho(t, x0 + (t/m) p) as bin masses:
    the mass in the p-bin is the evolved-position mass in the mapped x-bin.
    Comparing against the direct momentum histogram of the same samples
    isolates the finite-t systematic error.  Samples drifting outside the
    mapped window are excluded (part of that error).
    """
    if t <= 0.0:
        raise ValueError("the limit formula needs t > 0")
    evolved = evolve_ensemble(e, t)
    p_edges = np.asarray(p_edges, dtype=float)
    x_edges = x0 + (t / e.params.mass) * p_edges
    masses, _ = np.histogram(evolved.x, bins=x_edges, weights=evolved.w)
    return Histogram(p_edges, masses)


def quantum_momentum_limit(psi: WaveFunction, x0: float, t: float,
                           p_edges: np.ndarray,
                           box: Grid1D | None = None) -> Histogram:
    """Quantum version: (t/m) |psi(t, x0 + (t/m) p)|^2 as bin masses.

    The packet is zero-padded into an enlarged position box (the evolved
    packet must still fit it, else BoxOverflow), evolved in the momentum
    representation, and evaluated directly at the mapped bin centers.
    """
    psi.require_rep(Representation.POSITION)
    if t <= 0.0:
        raise ValueError("the limit formula needs t > 0")
    m = psi.params.mass
    hbar = psi.params.hbar
    p_edges = np.asarray(p_edges, dtype=float)

    mx, sx = moments(psi)
    psi_p0 = to_momentum(psi)
    mp, sp = moments(psi_p0)
    center_t = mx + mp * t / m
    spread_t = math.sqrt(sx**2 + (sp * t / m) ** 2)

    if box is None:
        half = max(abs(center_t) + 8.0 * spread_t,
                   abs(psi.grid.origin) + psi.grid.span)
        factor = int(math.ceil(2.0 * half / psi.grid.span))
        factor = 2 ** int(math.ceil(math.log2(max(factor, 1))))
        box = _embedding_grid(psi.grid, factor)
    lo_box, hi_box = box.origin, box.last
    if center_t - 6.0 * spread_t < lo_box or center_t + 6.0 * spread_t > hi_box:
        raise BoxOverflow(
            f"evolved packet (center {center_t:g}, spread {spread_t:g}) leaves "
            f"the box [{lo_box:g}, {hi_box:g}]")

    big = _embed(psi, box)
    big_p = evolve_free(to_momentum(big), t)

    centers = 0.5 * (p_edges[:-1] + p_edges[1:])
    x_eval = Grid1D(x0 + (t / m) * centers[0], (t / m) * (centers[1] - centers[0]),
                    len(centers))
    psi_at = fourier_eval(big_p.values, big_p.grid, x_eval, +1, hbar)
    masses = (t / m) * np.abs(psi_at) ** 2 * np.diff(p_edges)
    return Histogram(p_edges, masses)


def exact_momentum_histogram(psi: WaveFunction,
                             p_edges: np.ndarray) -> Histogram:
    """|psi~(p)|^2 evaluated at bin centers, as bin masses."""
    psi.require_rep(Representation.POSITION)
    p_edges = np.asarray(p_edges, dtype=float)
    centers = 0.5 * (p_edges[:-1] + p_edges[1:])
    p_eval = Grid1D(centers[0], centers[1] - centers[0], len(centers))
    vals = fourier_eval(psi.values, psi.grid, p_eval, -1, psi.params.hbar)
    return Histogram(p_edges, np.abs(vals) ** 2 * np.diff(p_edges))


def _embedding_grid(grid: Grid1D, factor: int) -> Grid1D:
    count = factor * grid.count
    extra = (count - grid.count) // 2
    return Grid1D(grid.origin - extra * grid.step, grid.step, count)


def _embed(psi: WaveFunction, box: Grid1D) -> WaveFunction:
    if not math.isclose(box.step, psi.grid.step, rel_tol=1e-12):
        raise ValueError("embedding box must share the grid step")
    offset = (psi.grid.origin - box.origin) / box.step
    k = round(offset)
    if abs(offset - k) > 1e-9 or k < 0 or k + psi.grid.count > box.count:
        raise ValueError("embedding box must contain the original grid on-node")
    values = np.zeros(box.count, dtype=np.complex128)
    values[k:k + psi.grid.count] = psi.values
    return WaveFunction(box, values, Representation.POSITION, psi.params)


@dataclass(frozen=True)
class ArrivalStats:
    mean: float
    variance: float
    histogram: Histogram | None = None


def classical_arrival_oracle(e: PhaseSpaceEnsemble, p_floor: float = 1e-6,
                             bins: np.ndarray | None = None) -> ArrivalStats:
    """Weighted statistics of the per-sample oriented arrival time -m x / |p|."""
    if float(np.min(np.abs(e.p))) < p_floor:
        raise MomentumFloorViolated(
            f"ensemble contains |p| < {p_floor:g}; arrival times diverge")
    T = oriented_arrival_time(e.x, e.p, e.params.mass)
    mean = float(np.sum(e.w * T))
    var = float(np.sum(e.w * (T - mean) ** 2))
    hist = None
    if bins is not None:
        hist = _histogram(T, e.w, np.asarray(bins, dtype=float), strict=False)
    return ArrivalStats(mean, var, hist)
