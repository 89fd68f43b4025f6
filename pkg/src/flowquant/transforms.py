"""Unitary changes of representation.

Kernels (1-D, explicit hbar):

* position -> momentum:        psi~(p) = (2 pi hbar)^(-1/2) integral psi(x)  exp(-i p x / hbar) dx
* momentum -> position:        psi(x)  = (2 pi hbar)^(-1/2) integral psi~(p) exp(+i p x / hbar) dp
* free evolution (momentum):   multiply by exp(-i p^2 t / (2 m hbar))
* momentum -> oriented energy: phi~(s) = psi~(sgn(s) sqrt(2 m |s|)) * (m / (2|s|))^(1/4)
  with s = sgn(p) p^2 / (2m), the kinetic energy signed by the direction of motion
* oriented energy -> arrival:  phi(T) = (2 pi hbar)^(-1/2) integral phi~(s) exp(-i s T / hbar) ds

The arrival kernel sign is fixed by the spectral pairing of the operator
(hbar/i) d/ds: with exp(-i s T / hbar), the variable T of a quasiclassical
right-mover concentrates at the classical oriented arrival time -m <x> / p0,
and free evolution acts on the amplitude as the substitution T -> T + t
(right-movers carry forward-in-time phases exp(-i|s|t/hbar), left-movers the
conjugate).

The discrete Fourier steps evaluate the continuum kernels exactly at the grid
points (origin-offset phase factors included), so round trips on conjugate
grids are identities to rounding and Parseval holds to ~1e-13.  The momentum
operator convention is (hbar/i) d/dx.

The oriented-energy map is a change of variables with a Jacobian square root
that diverges at p = 0; inputs must carry negligible probability mass below a
momentum floor (default four momentum-grid steps).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from .errors import GridMismatch, LowMomentumMass
from .grids import Grid1D, Representation, WaveFunction, norm_squared
from .resample import resample_complex

#: Wave functions with more relative mass below the momentum floor than this
#: are rejected by the oriented-energy map.
DEFAULT_LOW_P_MASS_TOL = 1e-6

#: Amplitudes below this fraction of the peak are treated as numerically zero
#: when locating the support of a packet.
_SUPPORT_CUT = 1e-13


@dataclass(frozen=True)
class TransformReport:
    """Quality telemetry for a change of representation."""

    norm_in: float
    norm_out: float
    unitarity_defect: float
    interpolation_residual: float

    @classmethod
    def from_norms(cls, norm_in: float, norm_out: float,
                   interpolation_residual: float = 0.0) -> "TransformReport":
        defect = abs(norm_out - norm_in) / norm_in if norm_in > 0.0 else 0.0
        return cls(norm_in, norm_out, defect, interpolation_residual)


def _continuum_dft(values: np.ndarray, grid_in: Grid1D, grid_out: Grid1D,
                   sign: int, hbar: float) -> np.ndarray:
    """Riemann sum (du/sqrt(2 pi hbar)) sum_j v_j exp(sign i u_j w_k / hbar).

    Requires conjugate grids (du * dw = 2 pi hbar / N, equal counts); then the
    sum reduces to an FFT with origin-offset pre/post phases and is exactly
    unitary.
    """
    n = grid_in.count
    if grid_out.count != n:
        raise GridMismatch("conjugate grids must have equal counts")
    if not math.isclose(grid_in.step * grid_out.step * n, 2.0 * math.pi * hbar,
                        rel_tol=1e-12):
        raise GridMismatch("grids are not Fourier-conjugate for this hbar")
    u = grid_in.points
    pre = np.exp(sign * 1j * u * grid_out.origin / hbar)
    if sign < 0:
        core = np.fft.fft(values * pre)
    else:
        core = np.fft.ifft(values * pre) * n
    k = np.arange(n)
    post = np.exp(sign * 1j * grid_in.origin * k * grid_out.step / hbar)
    return (grid_in.step / math.sqrt(2.0 * math.pi * hbar)) * post * core


def fourier_eval(values: np.ndarray, grid_in: Grid1D, grid_out: Grid1D,
                 sign: int, hbar: float) -> np.ndarray:
    """Same Riemann sum evaluated on an arbitrary uniform output grid.

    Uses the chirp-z transform, so the output grid is free to have any origin,
    spacing and count.  Unlike the conjugate-grid path this is not exactly
    norm-preserving; it is the trigonometric evaluation of the input samples.
    """
    u0, du = grid_in.origin, grid_in.step
    w0, dw = grid_out.origin, grid_out.step
    y = values * np.exp(sign * 1j * grid_in.points * w0 / hbar)
    w = np.exp(sign * 1j * du * dw / hbar)
    core = czt(y, m=grid_out.count, w=w, a=1.0 + 0.0j)
    k = np.arange(grid_out.count)
    post = np.exp(sign * 1j * u0 * k * dw / hbar)
    return (du / math.sqrt(2.0 * math.pi * hbar)) * post * core


def to_momentum(psi: WaveFunction, p_grid: Grid1D | None = None) -> WaveFunction:
    """Position -> momentum representation on the conjugate grid."""
    psi.require_rep(Representation.POSITION)
    grid = p_grid or psi.grid.conjugate(psi.params.hbar)
    out = _continuum_dft(psi.values, psi.grid, grid, -1, psi.params.hbar)
    return WaveFunction(grid, out, Representation.MOMENTUM, psi.params)


def to_position(psi_tilde: WaveFunction, x_grid: Grid1D | None = None) -> WaveFunction:
    """Momentum -> position representation on the conjugate grid."""
    psi_tilde.require_rep(Representation.MOMENTUM)
    grid = x_grid or psi_tilde.grid.conjugate(psi_tilde.params.hbar)
    out = _continuum_dft(psi_tilde.values, psi_tilde.grid, grid, +1, psi_tilde.params.hbar)
    return WaveFunction(grid, out, Representation.POSITION, psi_tilde.params)


def evolve_free(psi_tilde: WaveFunction, t: float) -> WaveFunction:
    """Free Schroedinger evolution in the momentum representation.

    Pure phase, hence exactly norm-preserving; phases compose additively in t.
    """
    psi_tilde.require_rep(Representation.MOMENTUM)
    p = psi_tilde.points
    phase = np.exp(-1j * p**2 * t / (2.0 * psi_tilde.params.mass * psi_tilde.params.hbar))
    return psi_tilde.with_values(psi_tilde.values * phase)


def default_momentum_floor(p_grid: Grid1D) -> float:
    """Momentum floor below which the energy map is ill-conditioned: 4 dp."""
    return 4.0 * p_grid.step


def low_momentum_mass(psi_tilde: WaveFunction, p_min: float) -> float:
    """Probability mass carried by samples with |p| < p_min."""
    psi_tilde.require_rep(Representation.MOMENTUM)
    p = psi_tilde.points
    mask = np.abs(p) < p_min
    return float(np.sum(np.abs(psi_tilde.values[mask]) ** 2) * psi_tilde.grid.step)


def default_oriented_grid(psi_tilde: WaveFunction, p_min: float | None = None,
                          margin: float = 1.3, max_count: int = 2**22) -> Grid1D:
    """Uniform s-grid adapted to the packet's support.

    The span covers the signed kinetic energies of the amplitude support with
    a margin; the spacing matches the momentum grid's information density at
    the inner support edge (ds = |p| dp / m there), which also guarantees the
    arrival-time content of any packet that fits the position box is below
    Nyquist.  Depends on |psi~| only, so phase changes (free evolution) leave
    the default grid unchanged.
    """
    m = psi_tilde.params.mass
    p = psi_tilde.points
    amp = np.abs(psi_tilde.values)
    if p_min is None:
        p_min = default_momentum_floor(psi_tilde.grid)
    support = amp >= _SUPPORT_CUT * amp.max()
    p_sup = np.abs(p[support])
    p_hi = float(p_sup.max())
    p_lo = max(float(p_sup.min()), p_min)
    s_max = margin * p_hi**2 / (2.0 * m)
    s_max = min(s_max, float(np.abs(p).max()) ** 2 / (2.0 * m) * margin)
    ds_target = 0.5 * p_lo * psi_tilde.grid.step / m
    count = 2 ** int(math.ceil(math.log2(2.0 * s_max / ds_target)))
    count = min(max(count, 1024), max_count)
    ds = 2.0 * s_max / count
    return Grid1D(-(count // 2) * ds, ds, count)


def _branch_nodes(psi_tilde: WaveFunction, positive: bool) -> tuple[np.ndarray, np.ndarray]:
    p = psi_tilde.points
    mask = p > 0.0 if positive else p < 0.0
    nodes = p[mask]
    vals = psi_tilde.values[mask]
    if not positive:
        nodes = nodes[::-1]
        vals = vals[::-1]
        nodes = -nodes
    return nodes, vals


def to_oriented_energy(psi_tilde: WaveFunction, s_grid: Grid1D | None = None,
                       p_min: float | None = None,
                       low_p_mass_tol: float = DEFAULT_LOW_P_MASS_TOL,
                       ) -> tuple[WaveFunction, TransformReport]:
    """Momentum -> oriented-energy representation.

    phi~(s) = psi~(sgn(s) sqrt(2 m |s|)) * (m/(2|s|))^(1/4) on a uniform
    s-grid; the two momentum half-axes map to the two signs of s.  Values with
    |s| below the floor s_min = p_min^2/(2m) are set to zero.
    """
    psi_tilde.require_rep(Representation.MOMENTUM)
    m = psi_tilde.params.mass
    if p_min is None:
        p_min = default_momentum_floor(psi_tilde.grid)
    leak = low_momentum_mass(psi_tilde, p_min)
    total = norm_squared(psi_tilde)
    if leak > low_p_mass_tol:  # absolute mass bound, stated for unit-norm states
        raise LowMomentumMass(
            f"mass {leak:.3e} below |p| < {p_min:.3e} exceeds {low_p_mass_tol:g}; "
            "the Jacobian of the energy map diverges at p = 0"
        )
    if s_grid is None:
        s_grid = default_oriented_grid(psi_tilde, p_min)
    s = s_grid.points
    s_min = p_min**2 / (2.0 * m)
    global_peak = float(np.abs(psi_tilde.values).max())

    out = np.zeros(s_grid.count, dtype=np.complex128)
    residual = 0.0
    for positive in (True, False):
        sel = (s >= s_min) if positive else (s <= -s_min)
        if not np.any(sel):
            continue
        nodes, vals = _branch_nodes(psi_tilde, positive)
        branch_peak = float(np.abs(vals).max())
        if branch_peak == 0.0 or global_peak == 0.0:
            continue
        p_query = np.sqrt(2.0 * m * np.abs(s[sel]))
        interp, res = resample_complex(nodes, vals, p_query)
        jac = (m / (2.0 * np.abs(s[sel]))) ** 0.25
        out[sel] = interp * jac
        residual = max(residual, res * branch_peak / global_peak)

    phi = WaveFunction(s_grid, out, Representation.ORIENTED_ENERGY, psi_tilde.params)
    report = TransformReport.from_norms(
        math.sqrt(total), math.sqrt(norm_squared(phi)), residual)
    return phi, report


def from_oriented_energy(phi_tilde: WaveFunction, p_grid: Grid1D | None = None,
                         p_min: float | None = None,
                         ) -> tuple[WaveFunction, TransformReport]:
    """Oriented-energy -> momentum representation (inverse change of variables).

    psi~(p) = phi~(sgn(p) p^2/(2m)) * sqrt(|p|/m); samples with |p| below the
    floor are zero.
    """
    phi_tilde.require_rep(Representation.ORIENTED_ENERGY)
    m = phi_tilde.params.mass
    if p_grid is None:
        s_max = max(abs(phi_tilde.grid.origin), abs(phi_tilde.grid.last))
        p_max = math.sqrt(2.0 * m * s_max)
        count = phi_tilde.grid.count
        dp = 2.0 * p_max / count
        p_grid = Grid1D(-(count // 2) * dp, dp, count)
    if p_min is None:
        p_min = default_momentum_floor(p_grid)

    s = phi_tilde.grid.points
    p = p_grid.points
    global_peak = float(np.abs(phi_tilde.values).max())
    out = np.zeros(p_grid.count, dtype=np.complex128)
    residual = 0.0
    for positive in (True, False):
        node_sel = (s > 0.0) if positive else (s < 0.0)
        q_sel = (p >= p_min) if positive else (p <= -p_min)
        if not (np.any(node_sel) and np.any(q_sel)):
            continue
        nodes = np.abs(s[node_sel])
        vals = phi_tilde.values[node_sel]
        branch_peak = float(np.abs(vals).max())
        if branch_peak == 0.0 or global_peak == 0.0:
            continue
        if not positive:
            nodes = nodes[::-1]
            vals = vals[::-1]
        s_query = p[q_sel] ** 2 / (2.0 * m)
        interp, res = resample_complex(nodes, vals, s_query)
        out[q_sel] = interp * np.sqrt(np.abs(p[q_sel]) / m)
        residual = max(residual, res * branch_peak / global_peak)

    psi = WaveFunction(p_grid, out, Representation.MOMENTUM, phi_tilde.params)
    report = TransformReport.from_norms(
        math.sqrt(norm_squared(phi_tilde)), math.sqrt(norm_squared(psi)), residual)
    return psi, report


def to_arrival_time(phi_tilde: WaveFunction, grid_T: Grid1D | None = None) -> WaveFunction:
    """Oriented-energy -> arrival-time representation.

    phi(T) = (2 pi hbar)^(-1/2) integral phi~(s) exp(-i s T/hbar) ds, the
    spectral amplitude of the generator (hbar/i) d/ds.  On the conjugate grid
    this is a pure Fourier step (exactly unitary); on a requested grid it is
    the trigonometric evaluation of the same sum.
    """
    phi_tilde.require_rep(Representation.ORIENTED_ENERGY)
    hbar = phi_tilde.params.hbar
    if grid_T is None:
        grid_T = phi_tilde.grid.conjugate(hbar)
        out = _continuum_dft(phi_tilde.values, phi_tilde.grid, grid_T, -1, hbar)
    else:
        out = fourier_eval(phi_tilde.values, phi_tilde.grid, grid_T, -1, hbar)
    return WaveFunction(grid_T, out, Representation.ARRIVAL_TIME, phi_tilde.params)
