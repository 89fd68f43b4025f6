"""Transport flows of 1-D vector fields and the quantization they induce.

An observable linear in momentum, f = X(x) p, generates the flow
dx/dt = X(x).  When every trajectory exists for all times (the field is
complete) the induced drag of wave functions is unitary and its generator is
the unique self-adjoint quantization of f; when trajectories blow up in
finite time the symmetric operator (hbar/2i)(X d/dx + d/dx X) has either many
self-adjoint extensions or none.  This module integrates the flows, measures
completeness with probe ensembles, transports wave functions with the
half-density Jacobian factor, applies the generator, and implements the
phase-ambiguous "plugged" transport for the quadratic field where escaping
and starving regions happen to match.

Key conventions:

* ``transport`` drags the packet along the field: a bump at x0 moves to
  G_t(x0).  Its time derivative at t = 0 is therefore the *negative* of
  ``lie_derivative`` (which differentiates the pull-back family).
* completeness verdicts come from escape statistics of probe trajectories;
  the coverage gap of the time-t flow map equals, in one dimension, the
  escape fraction of the reverse-time run (a point is missed by the forward
  image exactly when its backward trajectory blows up).  Direct interval
  coverage of the probe window is unreliable for contracting complete flows,
  so the reverse-run identity is what the classifier reports.
"""

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from .errors import (InconclusiveClassification, NotComplete, NotPluggable,
                     OutOfDomain, RoughInput, ZeroFieldValue)
from .grids import WaveFunction, norm_squared, spectral_derivative
from .resample import resample_complex
from .transforms import TransformReport

_FULL_LINE = ((-math.inf, math.inf),)


@dataclass(frozen=True)
class VectorField1D:
    """Scalar field X over one coordinate, the object being quantized.

    ``domain`` is a tuple of open intervals; trajectories cannot cross the
    gaps between them.  ``deriv`` is the closed-form derivative when known,
    otherwise a central difference is used.
    """

    func: Callable
    deriv: Callable | None = None
    domain: tuple[tuple[float, float], ...] = _FULL_LINE
    label: str = ""

    def __call__(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.func(x)

    def derivative(self, x):
        if self.deriv is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.deriv(x)
        h = 1e-6 * (1.0 + np.abs(x))
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.func(x + h) - self.func(x - h)) / (2.0 * h)

    def contains(self, x: float) -> bool:
        return any(a < x < b for a, b in self.domain)

    def component_of(self, x: float) -> tuple[float, float]:
        for a, b in self.domain:
            if a < x < b:
                return (a, b)
        raise OutOfDomain(f"{x} is not inside the domain of field {self.label!r}")


def constant_field(value: float = 1.0) -> VectorField1D:
    return VectorField1D(lambda x: np.full_like(np.asarray(x, dtype=float), value),
                         lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                         label=f"const({value:g})")


def linear_field() -> VectorField1D:
    """X(x) = x, the generator of homotheties."""
    return VectorField1D(lambda x: np.asarray(x, dtype=float),
                         lambda x: np.ones_like(np.asarray(x, dtype=float)),
                         label="x")


def quadratic_field() -> VectorField1D:
    """X(x) = x^2; trajectories blow up in finite time 1/x0."""
    return VectorField1D(lambda x: np.asarray(x, dtype=float) ** 2,
                         lambda x: 2.0 * np.asarray(x, dtype=float),
                         label="x^2")


def cubic_field() -> VectorField1D:
    """X(x) = x^3; blow-up with no matching starved region."""
    return VectorField1D(lambda x: np.asarray(x, dtype=float) ** 3,
                         lambda x: 3.0 * np.asarray(x, dtype=float) ** 2,
                         label="x^3")


_HALF_LINES = ((-math.inf, 0.0), (0.0, math.inf))


def arrival_field(mass: float = 1.0) -> VectorField1D:
    """X(p) = m/p on the punctured momentum line (plain arrival time)."""
    return VectorField1D(lambda p: mass / np.asarray(p, dtype=float),
                         lambda p: -mass / np.asarray(p, dtype=float) ** 2,
                         domain=_HALF_LINES, label="m/p")


def oriented_arrival_field(mass: float = 1.0) -> VectorField1D:
    """X(p) = m/|p| on the punctured momentum line (oriented arrival time)."""
    def f(p):
        p = np.asarray(p, dtype=float)
        return mass / np.abs(p)

    def df(p):
        p = np.asarray(p, dtype=float)
        return -mass * np.sign(p) / p**2

    return VectorField1D(f, df, domain=_HALF_LINES, label="m/|p|")


def straightened_oriented_field() -> VectorField1D:
    """The oriented arrival field expressed in its flow coordinate.

    In the signed-kinetic-energy variable s = sgn(p) p^2/(2m) the two
    momentum half-axes glue into a single line and the field becomes the unit
    translation field, which is complete.
    """
    f = constant_field(1.0)
    return VectorField1D(f.func, f.deriv, label="m/|p| straightened")


def expression_field(expression: str) -> VectorField1D:
    """Field from a sympy-parsable expression in the symbol x."""
    import sympy

    x = sympy.Symbol("x")
    expr = sympy.sympify(expression)
    func = sympy.lambdify(x, expr, modules="numpy")
    deriv = sympy.lambdify(x, sympy.diff(expr, x), modules="numpy")
    return VectorField1D(lambda u: np.asarray(func(u), dtype=float),
                         lambda u: np.asarray(deriv(u), dtype=float),
                         label=expression)


# --------------------------------------------------------------------------
# Single-trajectory integration

@dataclass(frozen=True)
class FlowResult:
    """Outcome of integrating dx/dt = X(x) from one initial point."""

    start: float
    t_requested: float
    t_reached: float
    endpoint: float | None
    escaped: bool
    escape_time_estimate: float | None = None


def _tail_time(field: VectorField1D, x_from: float, direction: int,
               target: float) -> float | None:
    """Remaining travel time from x_from to target (may be +-inf) along the flow.

    Integrates dxi / (direction * X(xi)) over doubling (or halving) segments;
    returns None when the integral diverges, i.e. the point is never reached.
    """
    def integrand(xi):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / (direction * field.func(xi))

    total = 0.0
    prev = x_from
    for k in range(200):
        if math.isinf(target):
            nxt = prev * 2.0 if abs(prev) > 1.0 else prev + math.copysign(1.0, target)
        else:
            nxt = prev + 0.5 * (target - prev)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            seg, _ = quad(integrand, prev, nxt, limit=200)
        total += seg
        if not math.isfinite(total) or abs(total) > 1e9:
            return None
        if abs(seg) < 1e-13 * (1.0 + abs(total)):
            return abs(total)
        prev = nxt
    return None


def integrate_flow(field: VectorField1D, x0: float, t: float,
                   escape_radius: float = 1e6) -> FlowResult:
    """Adaptive integration of the flow with escape detection.

    Embedded Runge-Kutta at relative tolerance 1e-10.  If |x| crosses the
    escape radius (or the trajectory reaches a finite domain boundary) before
    time t, the result is flagged escaped and the blow-up time is estimated
    by adding the residual travel time beyond the crossing point.
    """
    if not field.contains(x0):
        raise OutOfDomain(f"x0 = {x0} outside the domain of field {field.label!r}")
    if escape_radius <= abs(x0):
        raise ValueError("escape_radius must exceed |x0|")
    if t == 0.0:
        return FlowResult(x0, 0.0, 0.0, x0, False)

    direction = 1 if t > 0 else -1
    tau_end = abs(t)
    comp = field.component_of(x0)

    def rhs(_tau, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return [direction * float(field.func(y[0]))]

    events = []

    def esc_hi(_tau, y):
        return y[0] - escape_radius
    esc_hi.terminal = True

    def esc_lo(_tau, y):
        return y[0] + escape_radius
    esc_lo.terminal = True
    events += [esc_hi, esc_lo]

    boundaries = [b for b in comp if math.isfinite(b)]
    for b in boundaries:
        def hit(_tau, y, b=b):
            return y[0] - b
        hit.terminal = True
        events.append(hit)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        sol = solve_ivp(rhs, (0.0, tau_end), [x0], method="RK45",
                        rtol=1e-10, atol=1e-12, events=events)

    hit_idx = [i for i, te in enumerate(sol.t_events) if len(te)]
    if hit_idx:
        i = hit_idx[0]
        tau_ev = float(sol.t_events[i][0])
        x_ev = float(sol.y_events[i][0][0])
        if i < 2:  # escape through the radius
            target = math.copysign(math.inf, x_ev)
        else:      # reached a finite domain boundary
            target = boundaries[i - 2]
        tail = _tail_time(field, x_ev, direction, target)
        estimate = None if tail is None else direction * (tau_ev + tail)
        return FlowResult(x0, t, direction * tau_ev, None, True, estimate)

    if sol.status == -1:
        # Step-size underflow: the trajectory ground to a halt against a
        # domain boundary where X diverges.
        x_last = float(sol.y[0, -1])
        near = [b for b in boundaries if abs(x_last - b) <= 1e-3 * (1.0 + abs(b))]
        if near:
            tau_ev = float(sol.t[-1])
            return FlowResult(x0, t, direction * tau_ev, None, True,
                              direction * tau_ev)
        raise RuntimeError(f"flow integration failed: {sol.message}")

    return FlowResult(x0, t, t, float(sol.y[0, -1]), False)


# --------------------------------------------------------------------------
# Vectorized ensemble integrator (Dormand-Prince 5(4), per-probe step control)

_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0),
)
_DP_B5 = np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
                   -2187.0 / 6784.0, 11.0 / 84.0, 0.0])
_DP_B4 = np.array([5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
                   -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0])

RUNNING, DONE, ESCAPED, BOUNDARY = 0, 1, 2, 3


@dataclass
class EnsembleResult:
    state: np.ndarray     # (n, d) final states
    t_reached: np.ndarray  # (n,)
    status: np.ndarray    # (n,) DONE / ESCAPED / BOUNDARY
    t_event: np.ndarray   # (n,) event times, nan where none


def integrate_ensemble(f: Callable, y0: np.ndarray, t_end: float,
                       escape_radius: float,
                       boundaries: tuple[float, ...] = (),
                       rtol: float = 1e-8, atol: float = 1e-11,
                       h_floor: float = 1e-14,
                       max_iter: int = 100_000) -> EnsembleResult:
    """Integrate independent trajectories with individual adaptive steps.

    ``f`` maps states (m, d) -> derivatives (m, d); escape and boundary
    crossings are detected on component 0.  Trajectories whose step size
    underflows against a finite boundary (fields diverging there) are
    absorbed as boundary hits.  Pure numpy, deterministic.
    """
    y = np.array(y0, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n, d = y.shape
    t = np.zeros(n)
    status = np.full(n, RUNNING, dtype=np.int8)
    t_event = np.full(n, np.nan)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        f0 = np.asarray(f(y), dtype=float)
    scale0 = atol + rtol * np.abs(y[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.minimum(t_end / 100.0, 0.1 * scale0 / (np.abs(f0[:, 0]) + 1e-300))
    h = np.clip(np.where(np.isfinite(h), h, t_end / 100.0), h_floor, t_end)

    bnds = np.array(boundaries, dtype=float)

    for _ in range(max_iter):
        act = np.flatnonzero(status == RUNNING)
        if act.size == 0:
            break
        ya = y[act]
        ha = np.minimum(h[act], t_end - t[act])

        k = np.empty((7, act.size, d))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            k[0] = f(ya)
            for i in range(1, 7):
                incr = sum(aij * k[j] for j, aij in enumerate(_DP_A[i]))
                k[i] = f(ya + ha[:, None] * incr)
            y5 = ya + ha[:, None] * np.tensordot(_DP_B5, k, axes=(0, 0))
            y4 = ya + ha[:, None] * np.tensordot(_DP_B4, k, axes=(0, 0))
            scale = atol + rtol * np.maximum(np.abs(ya), np.abs(y5))
            enorm = np.max(np.abs(y5 - y4) / scale, axis=1)
        enorm = np.where(np.isfinite(enorm) & np.all(np.isfinite(y5), axis=1),
                         enorm, np.inf)

        accept = enorm <= 1.0
        with np.errstate(divide="ignore"):
            factor = np.clip(0.9 * enorm**-0.2, 0.2, 5.0)
        factor = np.where(np.isfinite(factor), factor, 0.2)

        idx_acc = act[accept]
        if idx_acc.size:
            x_prev = y[idx_acc, 0]
            t_prev = t[idx_acc]
            h_used = ha[accept]
            y[idx_acc] = y5[accept]
            t[idx_acc] = t_prev + h_used
            x_new = y[idx_acc, 0]

            esc = np.abs(x_new) >= escape_radius
            if np.any(esc):
                sub = idx_acc[esc]
                frac = (escape_radius - np.abs(x_prev[esc])) / (
                    np.abs(x_new[esc]) - np.abs(x_prev[esc]))
                t_event[sub] = t_prev[esc] + np.clip(frac, 0.0, 1.0) * h_used[esc]
                status[sub] = ESCAPED
            for b in bnds:
                crossed = ((x_prev - b) * (x_new - b) <= 0.0) & (status[idx_acc] == RUNNING)
                if np.any(crossed):
                    sub = idx_acc[crossed]
                    with np.errstate(divide="ignore", invalid="ignore"):
                        frac = (b - x_prev[crossed]) / (x_new[crossed] - x_prev[crossed])
                    frac = np.where(np.isfinite(frac), frac, 0.5)
                    t_event[sub] = t_prev[crossed] + np.clip(frac, 0.0, 1.0) * h_used[crossed]
                    status[sub] = BOUNDARY
            done = (t[idx_acc] >= t_end * (1.0 - 1e-15)) & (status[idx_acc] == RUNNING)
            status[idx_acc[done]] = DONE

        h[act] = np.maximum(ha * factor, h_floor)

        stalled = act[(~accept) & (ha <= h_floor * 1.001)]
        for i in stalled:
            near = bnds[np.abs(y[i, 0] - bnds) <= 1e-3 * (1.0 + np.abs(bnds))] \
                if bnds.size else np.array([])
            if near.size:
                status[i] = BOUNDARY
                t_event[i] = t[i]
            else:
                raise RuntimeError(
                    f"ensemble integration stalled at x = {y[i, 0]} away from any boundary")
    else:
        raise RuntimeError("ensemble integration exceeded the iteration budget")

    return EnsembleResult(y, t, status, t_event)


# --------------------------------------------------------------------------
# Completeness classification

class FlowVerdict(enum.Enum):
    COMPLETE = "Complete"
    PLUGGABLE_INCOMPLETE = "PluggableIncomplete"
    INCURABLE = "Incurable"
    HALF_LINE_INCOMPLETE = "HalfLineIncomplete"


@dataclass(frozen=True)
class ProbeSpec:
    """Probe ensemble for completeness classification."""

    interval: tuple[float, float] = (-10.0, 10.0)
    count: int = 2048
    t_probe: float = 4.0
    escape_radius: float = 1e6
    tol: float = 1e-3


@dataclass(frozen=True)
class EscapeSample:
    start: float
    direction: int
    t_escape: float


@dataclass(frozen=True)
class FlowClass:
    """Completeness verdict with its probe diagnostics.

    ``lost_mass_fraction`` is the larger of the two directional escape
    fractions and ``gap_measure`` the smaller; by the coverage duality of 1-D
    flows the reverse-direction escape fraction is exactly the fraction of
    the probe window missed by the forward image.
    """

    verdict: FlowVerdict
    lost_mass_fraction: float
    gap_measure: float
    invariant_components: int
    forward_escape_fraction: float
    backward_escape_fraction: float
    escape_samples: tuple[EscapeSample, ...] = ()


def _band_guarded_above(value: float, tol: float, diagnostics: dict,
                        what: str) -> bool:
    if 0.5 * tol < value < 2.0 * tol:
        raise InconclusiveClassification(
            f"{what} = {value:.6g} lies within a factor 2 of the decision "
            f"threshold {tol:g}; refusing to guess", diagnostics)
    return value > tol


def classify_flow(field: VectorField1D, probes: ProbeSpec = ProbeSpec()) -> FlowClass:
    """Classify the completeness of a field from probe trajectories.

    Probes on a midpoint grid over the probe interval are integrated forward
    and backward for t_probe.  Escapes (through the radius or into a finite
    domain boundary) measure the lost mass per direction; the reverse
    direction's escapes measure the coverage gap.  Deterministic for a fixed
    ProbeSpec.
    """
    a, b = probes.interval
    step = (b - a) / probes.count
    grid = a + step * (np.arange(probes.count) + 0.5)
    keep = np.fromiter((field.contains(x) for x in grid), dtype=bool,
                       count=len(grid))
    grid = grid[keep]
    if grid.size == 0:
        raise OutOfDomain("no probe points fall inside the field's domain")

    comp_keys = []
    comp_of_probe = np.empty(grid.size, dtype=int)
    for i, x in enumerate(grid):
        c = field.component_of(float(x))
        if c not in comp_keys:
            comp_keys.append(c)
        comp_of_probe[i] = comp_keys.index(c)
    n_comp = len(comp_keys)
    n_total = grid.size

    esc = np.zeros((2, n_total), dtype=bool)      # [direction, probe]
    t_esc = np.full((2, n_total), np.nan)
    images = np.full((2, n_total), np.nan)

    for di, direction in enumerate((+1, -1)):
        def rhs(y, _dir=direction):
            return _dir * np.asarray(field(y[:, 0]), dtype=float)[:, None]

        for ci, comp in enumerate(comp_keys):
            sel = np.flatnonzero(comp_of_probe == ci)
            bounds = tuple(x for x in comp if math.isfinite(x))
            res = integrate_ensemble(rhs, grid[sel][:, None], probes.t_probe,
                                     probes.escape_radius, boundaries=bounds)
            gone = res.status != DONE
            esc[di, sel] = gone
            t_esc[di, sel[gone]] = res.t_event[gone]
            images[di, sel[~gone]] = res.state[~gone, 0]

    # Components merge if any surviving probe image lands in a different one.
    parent = list(range(n_comp))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for di in range(2):
        for i in range(n_total):
            img = images[di, i]
            if np.isnan(img):
                continue
            for cj, comp in enumerate(comp_keys):
                if comp[0] < img < comp[1] and cj != comp_of_probe[i]:
                    parent[find(comp_of_probe[i])] = find(cj)
    invariant_components = len({find(i) for i in range(n_comp)})

    esc_f = float(np.count_nonzero(esc[0]) / n_total)
    esc_b = float(np.count_nonzero(esc[1]) / n_total)
    lost = max(esc_f, esc_b)
    gap = min(esc_f, esc_b)

    samples = []
    for di, direction in enumerate((+1, -1)):
        for i in np.flatnonzero(esc[di])[:8]:
            samples.append(EscapeSample(float(grid[i]), direction,
                                        float(t_esc[di, i])))

    diagnostics = {
        "forward_escape_fraction": esc_f,
        "backward_escape_fraction": esc_b,
        "invariant_components": invariant_components,
        "tol": probes.tol,
    }

    def build(verdict):
        return FlowClass(verdict, lost, gap, invariant_components,
                         esc_f, esc_b, tuple(samples))

    any_f = _band_guarded_above(esc_f, probes.tol, diagnostics, "forward escape fraction")
    any_b = _band_guarded_above(esc_b, probes.tol, diagnostics, "backward escape fraction")
    if not any_f and not any_b:
        return build(FlowVerdict.COMPLETE)

    if invariant_components >= 2:
        one_sided = []
        for ci in range(n_comp):
            sel = comp_of_probe == ci
            nc = np.count_nonzero(sel)
            f_c = float(np.count_nonzero(esc[0, sel]) / nc)
            b_c = float(np.count_nonzero(esc[1, sel]) / nc)
            above_f = _band_guarded_above(f_c, probes.tol, diagnostics,
                                          f"component {ci} forward escapes")
            above_b = _band_guarded_above(b_c, probes.tol, diagnostics,
                                          f"component {ci} backward escapes")
            one_sided.append(above_f != above_b)
        if all(one_sided):
            return build(FlowVerdict.HALF_LINE_INCOMPLETE)

    if not _band_guarded_above(gap, probes.tol, diagnostics, "coverage gap"):
        return build(FlowVerdict.INCURABLE)

    mismatch = abs(esc_f - esc_b)
    if mismatch <= max(0.05 * lost, 4.0 / n_total):
        return build(FlowVerdict.PLUGGABLE_INCOMPLETE)
    raise InconclusiveClassification(
        f"lost mass {lost:.4g} and gap {gap:.4g} are both significant but do "
        "not match; no verdict fits", diagnostics)


# --------------------------------------------------------------------------
# Straightening coordinate

@dataclass(frozen=True)
class StraightenResult:
    """Monotone chart s(x) in which the field becomes d/ds."""

    s_of_x: Callable
    x_of_s: Callable
    global_chart: bool
    table_x: np.ndarray
    table_s: np.ndarray


def straighten(field: VectorField1D, x_ref: float,
               span: tuple[float, float] | None = None,
               table_points: int = 1025) -> StraightenResult:
    """Solve ds/dx = 1/X by adaptive quadrature from x_ref.

    The chart is tabulated on ``span`` (default: the domain component clipped
    to x_ref +- 20) and refined by local quadrature on evaluation, so
    s_of_x is accurate to the quadrature tolerance rather than the table
    resolution.  ``global_chart`` is True when s maps the component onto all
    of R, i.e. the cumulative time integral diverges toward both ends.
    """
    comp = field.component_of(x_ref)
    if span is None:
        lo = max(comp[0], x_ref - 20.0) if math.isfinite(comp[0]) else x_ref - 20.0
        hi = min(comp[1], x_ref + 20.0) if math.isfinite(comp[1]) else x_ref + 20.0
        if math.isfinite(comp[0]) and lo <= comp[0]:
            lo = comp[0] + 1e-9 * (1.0 + abs(comp[0]))
        if math.isfinite(comp[1]) and hi >= comp[1]:
            hi = comp[1] - 1e-9 * (1.0 + abs(comp[1]))
        span = (lo, hi)
    if not (span[0] <= x_ref <= span[1]):
        raise ValueError("x_ref must lie inside the tabulation span")

    nodes = np.linspace(span[0], span[1], table_points)
    xvals = np.asarray(field(nodes), dtype=float)
    if np.any(~np.isfinite(xvals)) or np.any(xvals == 0.0) or \
            np.any(np.sign(xvals) != np.sign(xvals[0])):
        raise ZeroFieldValue(
            f"field {field.label!r} vanishes or changes sign inside the span")

    def inv(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / field.func(x)

    ref_idx = int(np.argmin(np.abs(nodes - x_ref)))
    seg = np.zeros(table_points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for i in range(table_points - 1):
            seg[i + 1], _ = quad(inv, nodes[i], nodes[i + 1],
                                 epsrel=1e-12, epsabs=1e-14, limit=200)
        cum = np.cumsum(seg)
        offset, _ = quad(inv, nodes[ref_idx], x_ref, epsrel=1e-12, epsabs=1e-14)
    table_s = cum - cum[ref_idx] - offset

    def s_of_x(x):
        def one(xx):
            if not (span[0] <= xx <= span[1]):
                raise ValueError(f"{xx} outside the tabulated span {span}")
            i = min(int(np.searchsorted(nodes, xx)), table_points - 1)
            i = max(i - 1, 0)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                val, _ = quad(inv, nodes[i], xx, epsrel=1e-12, epsabs=1e-14,
                              limit=200)
            return table_s[i] + val
        if np.isscalar(x):
            return one(x)
        return np.array([one(float(xx)) for xx in np.asarray(x).ravel()])

    increasing = table_s[-1] > table_s[0]
    ts = table_s if increasing else -table_s

    def x_of_s(s):
        def one(ss):
            q = ss if increasing else -ss
            if not (ts[0] <= q <= ts[-1]):
                raise ValueError(f"{ss} outside the tabulated chart range")
            j = int(np.clip(np.searchsorted(ts, q) - 1, 0, table_points - 2))
            from scipy.optimize import brentq
            lo_x, hi_x = nodes[j], nodes[j + 1]
            f_lo = s_of_x(lo_x) - ss
            if f_lo == 0.0:
                return lo_x
            return brentq(lambda xx: s_of_x(xx) - ss, lo_x, hi_x, xtol=1e-13)
        if np.isscalar(s):
            return one(s)
        return np.array([one(float(ss)) for ss in np.asarray(s).ravel()])

    def side_diverges(from_x, endpoint):
        return _tail_time(field, from_x, 1, endpoint) is None

    global_chart = side_diverges(span[0], comp[0]) and side_diverges(span[1], comp[1])
    return StraightenResult(s_of_x, x_of_s, global_chart, nodes, table_s)


# --------------------------------------------------------------------------
# Transport, generator, plugged transport

def transport(psi: WaveFunction, field: VectorField1D, t: float,
              flow_class: FlowClass | None = None,
              probe_spec: ProbeSpec | None = None,
              ) -> tuple[WaveFunction, TransformReport]:
    """Unitary drag of a wave function along the flow of a complete field.

    (G_t psi)(x) = psi(G_{-t}(x)) sqrt|G'_{-t}(x)|: the pull-back point and
    its Jacobian come from the flow and its variational equation integrated
    together.  A bump at x0 ends up at G_t(x0).
    """
    if flow_class is None:
        flow_class = classify_flow(field, probe_spec or ProbeSpec())
    if flow_class.verdict is not FlowVerdict.COMPLETE:
        raise NotComplete(
            f"field {field.label!r} classified {flow_class.verdict.value}; "
            "transport would not be unitary")
    norm_in = math.sqrt(norm_squared(psi))
    if t == 0.0:
        return psi.with_values(psi.values), TransformReport.from_norms(norm_in, norm_in)

    direction = -1.0 if t > 0 else 1.0
    tau = abs(t)

    def rhs(state):
        yy = state[:, 0]
        jj = state[:, 1]
        fx = np.asarray(field(yy), dtype=float)
        dfx = np.asarray(field.derivative(yy), dtype=float)
        return np.stack([direction * fx, direction * dfx * jj], axis=1)

    x = psi.grid.points
    state0 = np.stack([x, np.ones_like(x)], axis=1)
    radius = 10.0 * (abs(psi.grid.origin) + psi.grid.span) + 10.0
    res = integrate_ensemble(rhs, state0, tau, radius,
                             rtol=1e-11, atol=1e-13)

    vals = np.zeros(len(x), dtype=np.complex128)
    ok = res.status == DONE
    pulled, residual = resample_complex(x, psi.values, res.state[ok, 0])
    vals[ok] = pulled * np.sqrt(np.abs(res.state[ok, 1]))
    out = psi.with_values(vals)
    report = TransformReport.from_norms(norm_in, math.sqrt(norm_squared(out)), residual)
    return out, report


_TAIL_BAND = 0.10  # outermost fraction of spectral bins checked for roughness


def lie_derivative(psi: WaveFunction, field: VectorField1D,
                   tail_tol: float = 1e-8) -> WaveFunction:
    """Half-density Lie derivative (1/2)(X psi' + (X psi)').

    Derivatives are spectral.  The quantized observable acts as
    (hbar/i) times this, see ``apply_generator``.  Inputs must be smooth on
    the grid scale; a spectral tail above ``tail_tol`` raises RoughInput.
    """
    v = psi.values
    spec = np.fft.fft(v)
    n = len(v)
    freq_idx = np.abs(np.fft.fftfreq(n))
    tail = freq_idx >= 0.5 * (1.0 - _TAIL_BAND)
    power = np.abs(spec) ** 2
    total = power.sum()
    if total > 0.0 and power[tail].sum() > tail_tol * total:
        raise RoughInput(
            "wave function has significant power in the outer spectral band; "
            "spectral differentiation would be unreliable")

    x = psi.points
    xvals = np.asarray(field(x), dtype=float)
    finite = np.isfinite(xvals)
    xv = np.where(finite, xvals, 0.0)

    dv = spectral_derivative(v, psi.grid.step)
    term1 = np.where(finite, xv * dv, 0.0)
    term2 = spectral_derivative(np.where(finite, xv * v, 0.0), psi.grid.step)
    return psi.with_values(0.5 * (term1 + term2))


def apply_generator(psi: WaveFunction, field: VectorField1D) -> WaveFunction:
    """The symmetric operator (hbar/i)(X d/dx + (1/2) X') applied to psi.

    Symmetry holds for every real field; whether the operator is essentially
    self-adjoint is decided separately by ``classify_flow``.
    """
    lie = lie_derivative(psi, field)
    return lie.with_values(-1j * psi.params.hbar * lie.values)


_PLUG_PROBES = np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])


def pluggable_transport(psi: WaveFunction, field: VectorField1D, t: float,
                        plug_phase: float,
                        flow_class: FlowClass | None = None,
                        ) -> tuple[WaveFunction, TransformReport]:
    """Norm-preserving but non-unique transport for the quadratic field.

    The time-t flow map x -> x/(1 - t x), read as a measurable bijection of
    the line, re-injects the mass that blows up past the pole into the region
    the regular flow never reaches.  The re-entrant branch may carry an
    arbitrary constant phase, so each plug_phase defines a different unitary
    extension of the same symmetric generator.

    Only the quadratic form X = x^2 is supported; the loss/gap matching is
    specific to its single-pole flow.
    """
    probe_vals = np.asarray(field(_PLUG_PROBES), dtype=float)
    if not np.allclose(probe_vals, _PLUG_PROBES**2, rtol=1e-9, atol=1e-12):
        raise NotPluggable("plugged transport is implemented for X = x^2 only")
    if flow_class is None:
        flow_class = classify_flow(field)
    if flow_class.verdict is not FlowVerdict.PLUGGABLE_INCOMPLETE:
        raise NotPluggable(
            f"field classified {flow_class.verdict.value}, not PluggableIncomplete")

    norm_in = math.sqrt(norm_squared(psi))
    x = psi.grid.points
    if t == 0.0:
        return psi.with_values(psi.values), TransformReport.from_norms(norm_in, norm_in)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        denom = 1.0 + t * x
        pullback = x / denom
        jac = 1.0 / denom**2
    pulled, residual = resample_complex(x, psi.values, pullback)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = np.where(pulled == 0.0, 0.0, pulled * np.sqrt(np.abs(jac)))
    replug = denom < 0.0
    vals = np.where(replug, vals * np.exp(1j * plug_phase), vals)
    out = psi.with_values(vals)
    report = TransformReport.from_norms(norm_in, math.sqrt(norm_squared(out)), residual)
    return out, report
