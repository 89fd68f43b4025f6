"""Oriented arrival time of a free particle.

The classical arrival time at the plane x = 0 is t = -m x / p; its oriented
variant T = -m x / |p| = sgn(p) t is the observable that survives
quantization.  In the oriented-energy representation the corresponding
operator is (hbar/i) d/ds, so its spectral amplitude is the Fourier transform
of phi~(s) with the -i kernel:

    phi(T) = (2 pi hbar)^(-1/2) integral phi~(s) exp(-i s T / hbar) ds
           = (2 pi hbar)^(-1/2) integral psi~(p) sqrt(|p|/m)
                                 exp(-i sgn(p) p^2 T / (2 m hbar)) dp.

This sign anchors T to the classical observable: a quasiclassical
right-mover started at <x> = -50 with p0 = 2 has its density centered at
T = +25, and free evolution acts as the argument substitution T -> T + t.

Two independent evaluations of this amplitude are provided: a fast
transform-chain path (momentum -> oriented energy -> arrival time) and a
direct oscillatory-quadrature oracle working from the momentum samples.  The
probability density |phi(T)|^2 splits into right-mover, left-mover and
interference parts; the movers' s-supports are disjoint, so the interference
term integrates to zero while remaining visible pointwise.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (IntervalOutOfRange, LowMomentumMass, NegativeMomentumLeak,
                     QuadratureNonConvergence, RepMismatch, ZeroWeightComponent)
from .grids import (Grid1D, PhysicalParams, Representation, WaveFunction,
                    moments, norm_squared)
from .transforms import (default_momentum_floor, default_oriented_grid,
                         from_oriented_energy, low_momentum_mass,
                         to_arrival_time, to_momentum, to_oriented_energy,
                         to_position)


def classical_arrival_time(x, p, mass: float = 1.0):
    """Time -m x / p at which a free classical particle crosses x = 0."""
    return -mass * np.asarray(x, dtype=float) / np.asarray(p, dtype=float)


def oriented_arrival_time(x, p, mass: float = 1.0):
    """Oriented arrival time T = -m x / |p| = sgn(p) * (-m x / p)."""
    return -mass * np.asarray(x, dtype=float) / np.abs(np.asarray(p, dtype=float))


class Component(enum.Enum):
    TOTAL = "total"
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True, eq=False)
class ArrivalDistribution:
    """Arrival-time density and its mover decomposition.

    total = plus + minus + interference holds pointwise by construction
    (total is the density of the summed amplitude).  w_plus and w_minus are
    the momentum-space mover weights.
    """

    grid_T: Grid1D
    total: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    interference: np.ndarray
    w_plus: float
    w_minus: float

    def __post_init__(self):
        for name in ("total", "plus", "minus", "interference"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def component(self, which: Component) -> np.ndarray:
        return {Component.TOTAL: self.total, Component.PLUS: self.plus,
                Component.MINUS: self.minus}[which]


def split_movers(psi_tilde: WaveFunction, p_min: float | None = None,
                 low_p_mass_tol: float = 1e-6,
                 zero_mass_tol: float = 1e-10) -> tuple[WaveFunction, WaveFunction]:
    """Right-mover / left-mover decomposition in the momentum representation.

    psi+ keeps the p > 0 samples, psi- the p < 0 samples; an exact p = 0
    sample belongs to neither and must carry negligible mass.  The
    low-momentum validator of the energy map applies here too (the split
    feeds that map downstream).
    """
    psi_tilde.require_rep(Representation.MOMENTUM)
    if p_min is None:
        p_min = default_momentum_floor(psi_tilde.grid)
    leak = low_momentum_mass(psi_tilde, p_min)
    if leak > low_p_mass_tol:
        raise LowMomentumMass(
            f"mass {leak:.3e} below |p| < {p_min:.3e} exceeds {low_p_mass_tol:g}")
    p = psi_tilde.points
    zero = p == 0.0
    zero_mass = float(np.sum(np.abs(psi_tilde.values[zero]) ** 2) * psi_tilde.grid.step)
    if zero_mass > zero_mass_tol:
        raise LowMomentumMass(
            f"the p = 0 sample carries mass {zero_mass:.3e} > {zero_mass_tol:g}")
    plus = psi_tilde.with_values(np.where(p > 0.0, psi_tilde.values, 0.0))
    minus = psi_tilde.with_values(np.where(p < 0.0, psi_tilde.values, 0.0))
    return plus, minus


def default_time_grid(psi_tilde: WaveFunction, count: int = 512,
                      span_factor: float = 8.0) -> Grid1D:
    """T-grid centered on the classical arrival estimate -m <x> / p0.

    The span is span_factor times the classical spread estimate
    m (|<x>| sigma_p / p0^2 + sigma_x / p0), with p0 the mean of |p|.
    """
    psi_tilde.require_rep(Representation.MOMENTUM)
    m = psi_tilde.params.mass
    x_mean, x_std = moments(to_position(psi_tilde))
    p = psi_tilde.points
    w = np.abs(psi_tilde.values) ** 2
    w_total = w.sum()
    p0 = float(np.sum(np.abs(p) * w) / w_total)
    p_std = float(math.sqrt(np.sum((np.abs(p) - p0) ** 2 * w) / w_total))
    center = -m * x_mean / p0
    span = span_factor * m * (abs(x_mean) * p_std / p0**2 + x_std / p0)
    span = max(span, 16.0 * m * x_std / p0)
    return Grid1D(center - span / 2.0, span / count, count)


def arrival_amplitude_fast(psi_tilde: WaveFunction, grid_T: Grid1D | None = None,
                           s_grid: Grid1D | None = None,
                           p_min: float | None = None) -> WaveFunction:
    """Arrival amplitude via the transform chain (the production path)."""
    phi_s, _ = to_oriented_energy(psi_tilde, s_grid=s_grid, p_min=p_min)
    return to_arrival_time(phi_s, grid_T)


def _momentum_at(psi_x: WaveFunction, p_nodes: np.ndarray,
                 chunk: int = 512, threads: int = 1) -> np.ndarray:
    """Trigonometric evaluation of psi~ at arbitrary momenta from x-samples."""
    x = psi_x.grid.points
    hbar = psi_x.params.hbar
    pref = psi_x.grid.step / math.sqrt(2.0 * math.pi * hbar)
    out = np.empty(len(p_nodes), dtype=np.complex128)

    def work(lo):
        hi = min(lo + chunk, len(p_nodes))
        kern = np.exp(-1j * np.outer(p_nodes[lo:hi], x) / hbar)
        out[lo:hi] = pref * (kern @ psi_x.values)

    starts = range(0, len(p_nodes), chunk)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return out


def _gauss_panels(lo: float, hi: float, n_target: int,
                  order: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over [lo, hi]."""
    from numpy.polynomial.legendre import leggauss
    xg, wg = leggauss(order)
    n_panels = max(4, int(math.ceil(n_target / order)))
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


# Above the trigonometric-evaluation noise floor (~1e-15 of the peak); the
# truncated tail contributes O(1e-11) of the amplitude.
_ORACLE_SUPPORT_CUT = 1e-12


def arrival_amplitude_quadrature(psi_tilde: WaveFunction, grid_T: Grid1D,
                                 rel_tol: float = 1e-8,
                                 start_nodes: int = 256,
                                 max_nodes: int = 2**17,
                                 threads: int = 1) -> WaveFunction:
    """Arrival amplitude by direct oscillatory quadrature (the oracle).

    Composite Gauss-Legendre quadrature of the momentum integral, with the
    node count doubled until the amplitude changes by less than rel_tol of
    its peak; the integrand samples psi~ exactly (trigonometric sums over the
    position samples), independent of the interpolating transform chain.
    """
    psi_tilde.require_rep(Representation.MOMENTUM)
    m = psi_tilde.params.mass
    hbar = psi_tilde.params.hbar
    psi_x = to_position(psi_tilde)
    p = psi_tilde.points
    amp = np.abs(psi_tilde.values)
    peak = amp.max()
    T = grid_T.points

    branches = []
    for positive in (True, False):
        mask = (p > 0.0) if positive else (p < 0.0)
        sup = mask & (amp >= _ORACLE_SUPPORT_CUT * peak)
        if not np.any(sup):
            continue
        pa = np.abs(p[sup])
        lo = max(pa.min() - 2.0 * psi_tilde.grid.step, 0.5 * psi_tilde.grid.step)
        hi = pa.max() + 2.0 * psi_tilde.grid.step
        branches.append((1.0 if positive else -1.0, lo, hi))
    if not branches:
        return WaveFunction(grid_T, np.zeros(grid_T.count, dtype=np.complex128),
                            Representation.ARRIVAL_TIME, psi_tilde.params)

    def level(n_nodes: int) -> np.ndarray:
        phi = np.zeros(len(T), dtype=np.complex128)
        for sgn, lo, hi in branches:
            nodes, weights = _gauss_panels(lo, hi, n_nodes)
            vals = _momentum_at(psi_x, sgn * nodes, threads=threads)
            base = weights * vals * np.sqrt(nodes / m) / math.sqrt(2.0 * math.pi * hbar)
            s_nodes = sgn * nodes**2 / (2.0 * m)

            def work(lo_t):
                hi_t = min(lo_t + 64, len(T))
                kern = np.exp(-1j * np.outer(T[lo_t:hi_t], s_nodes) / hbar)
                phi[lo_t:hi_t] += kern @ base

            starts = range(0, len(T), 64)
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as ex:
                    list(ex.map(work, starts))
            else:
                for lo_t in starts:
                    work(lo_t)
        return phi

    n = start_nodes
    prev = level(n)
    while True:
        n *= 2
        cur = level(n)
        scale = max(float(np.abs(cur).max()), 1e-300)
        err = float(np.abs(cur - prev).max() / scale)
        if err <= rel_tol:
            return WaveFunction(grid_T, cur, Representation.ARRIVAL_TIME,
                                psi_tilde.params)
        if n >= max_nodes:
            raise QuadratureNonConvergence(
                f"oscillatory quadrature stuck at relative error {err:.3e} "
                f"with {n} nodes (target {rel_tol:g})")
        prev = cur


def arrival_distribution(psi: WaveFunction, grid_T: Grid1D | None = None,
                         s_grid: Grid1D | None = None,
                         p_min: float | None = None) -> ArrivalDistribution:
    """Arrival-time distribution with right/left-mover decomposition.

    Accepts position, momentum or oriented-energy input (converted to the
    momentum representation first).  Both mover amplitudes are computed on a
    common s-grid and T-grid so the decomposition identities hold exactly.
    """
    if psi.rep is Representation.POSITION:
        psi_tilde = to_momentum(psi)
    elif psi.rep is Representation.MOMENTUM:
        psi_tilde = psi
    elif psi.rep is Representation.ORIENTED_ENERGY:
        psi_tilde, _ = from_oriented_energy(psi)
    else:
        raise RepMismatch("arrival-time input cannot be inverted back to momentum")

    plus, minus = split_movers(psi_tilde)
    w_plus = norm_squared(plus)
    w_minus = norm_squared(minus)
    if s_grid is None:
        s_grid = default_oriented_grid(psi_tilde, p_min or
                                       default_momentum_floor(psi_tilde.grid))
    if grid_T is None:
        grid_T = default_time_grid(psi_tilde)

    def amplitude(part: WaveFunction, weight: float) -> np.ndarray:
        if weight <= 1e-12 * max(w_plus + w_minus, 1e-300):
            return np.zeros(grid_T.count, dtype=np.complex128)
        return arrival_amplitude_fast(part, grid_T, s_grid=s_grid, p_min=p_min).values

    phi_plus = amplitude(plus, w_plus)
    phi_minus = amplitude(minus, w_minus)

    plus_d = np.abs(phi_plus) ** 2
    minus_d = np.abs(phi_minus) ** 2
    interference = 2.0 * np.real(phi_plus * np.conj(phi_minus))
    total = np.abs(phi_plus + phi_minus) ** 2
    return ArrivalDistribution(grid_T, total, plus_d, minus_d, interference,
                               w_plus, w_minus)


def probability_in_interval(dist: ArrivalDistribution, a: float, b: float,
                            component: Component = Component.TOTAL) -> float:
    """P(T in [a, b]) by trapezoidal integration of the selected density."""
    T = dist.grid_T.points
    if not (a < b):
        raise IntervalOutOfRange(f"need a < b, got [{a}, {b}]")
    if a < T[0] or b > T[-1]:
        raise IntervalOutOfRange(
            f"[{a}, {b}] is not inside the tabulated span [{T[0]}, {T[-1]}]")
    density = dist.component(component)
    inner = (T > a) & (T < b)
    ts = np.concatenate(([a], T[inner], [b]))
    vs = np.concatenate(([np.interp(a, T, density)], density[inner],
                         [np.interp(b, T, density)]))
    val = float(np.trapezoid(vs, ts))
    return float(np.clip(val, 0.0, 1.0 + 1e-6))


@dataclass(frozen=True)
class ArrivalMoments:
    mean: float
    variance: float


def arrival_moments(dist: ArrivalDistribution,
                    component: Component = Component.TOTAL,
                    weight_floor: float = 1e-6) -> ArrivalMoments:
    """Mean and variance of the normalized component density."""
    density = dist.component(component)
    T = dist.grid_T.points
    weight = float(np.trapezoid(density, T))
    if weight <= weight_floor:
        raise ZeroWeightComponent(
            f"component {component.value} carries weight {weight:.3e}")
    mean = float(np.trapezoid(T * density, T) / weight)
    var = float(np.trapezoid((T - mean) ** 2 * density, T) / weight)
    return ArrivalMoments(mean, var)


@dataclass(frozen=True)
class BackflowSpec:
    """Two positive-momentum Gaussians whose interference drives j < 0."""

    p1: float = 1.0
    p2: float = 3.0
    a1: float = 1.0
    a2: float = 1.6
    rel_phase: float = math.pi
    sigma: float = 0.1


def make_backflow_packet(grid_p: Grid1D, params: PhysicalParams,
                         spec: BackflowSpec = BackflowSpec(),
                         leak_tol: float = 1e-10) -> WaveFunction:
    """Normalized superposition of two positive-momentum Gaussians.

    Despite containing only positive momenta (up to a checked leak), the
    packet develops regions of negative probability current at later times.
    """
    if not (spec.sigma > 0.0 and min(spec.p1, spec.p2) > 4.0 * spec.sigma):
        raise ValueError("need p1, p2 > 4 sigma > 0 for a positive-momentum packet")
    p = grid_p.points
    g1 = np.exp(-((p - spec.p1) ** 2) / (4.0 * spec.sigma**2))
    g2 = np.exp(-((p - spec.p2) ** 2) / (4.0 * spec.sigma**2))
    values = spec.a1 * g1 + spec.a2 * np.exp(1j * spec.rel_phase) * g2
    nrm = math.sqrt(float(np.sum(np.abs(values) ** 2) * grid_p.step))
    values = values / nrm
    psi = WaveFunction(grid_p, values, Representation.MOMENTUM, params)
    neg_mass = float(np.sum(np.abs(values[p < 0.0]) ** 2) * grid_p.step)
    if neg_mass > leak_tol:
        raise NegativeMomentumLeak(
            f"negative-momentum mass {neg_mass:.3e} exceeds {leak_tol:g}")
    return psi
