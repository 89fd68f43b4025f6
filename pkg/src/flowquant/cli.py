"""Command-line front end.

Subcommands (one scenario JSON in, CSV/JSON files out):

* ``flow-classify``    completeness verdict for a vector field
* ``arrival``          arrival-time density with mover decomposition
* ``classical-limit``  momentum density from position measurements at large t
* ``backflow``         probability-current scan of the backflow packet

Exit codes: 0 success, 1 configuration or validation error, 2 diagnostic
outcome (inconclusive classification, negative-momentum leak).  Outputs are
byte-stable for identical configs and seeds: CSV uses '.' decimals, 17
significant digits, LF endings, UTF-8; JSON is sorted and indented.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .arrival import (Component, arrival_amplitude_fast,
                      arrival_amplitude_quadrature, arrival_distribution,
                      arrival_moments)
from .classical import (ensemble_from_packet, exact_momentum_histogram,
                        l1_distance, momentum_from_position_limit,
                        quantum_momentum_limit)
from .errors import (FlowQuantError, InconclusiveClassification,
                     NegativeMomentumLeak, ScenarioError)
from .flows import classify_flow
from .grids import Representation, norm_squared, probability_current
from .scenarios import (build_field, build_packet, build_params,
                        build_probe_spec, build_s_grid, build_time_grid,
                        build_x_grid, load_scenario)
from .transforms import evolve_free, to_momentum, to_position


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_flow_classify(cfg: dict, out_dir: str, args) -> int:
    params = build_params(cfg)
    field = build_field(cfg, params)
    probes = build_probe_spec(cfg)
    path = os.path.join(out_dir, "flow_classification.json")
    try:
        fc = classify_flow(field, probes)
    except InconclusiveClassification as exc:
        _write_json(path, {
            "field": field.label,
            "class": "Inconclusive",
            "message": str(exc),
            "diagnostics": exc.diagnostics,
        })
        print(f"inconclusive classification: {exc}", file=sys.stderr)
        return 2
    _write_json(path, {
        "field": field.label,
        "class": fc.verdict.value,
        "lost_mass_fraction": fc.lost_mass_fraction,
        "gap_measure": fc.gap_measure,
        "invariant_components": fc.invariant_components,
        "forward_escape_fraction": fc.forward_escape_fraction,
        "backward_escape_fraction": fc.backward_escape_fraction,
        "escape_samples": [
            {"start": s.start, "direction": s.direction, "t_escape": s.t_escape}
            for s in fc.escape_samples
        ],
    })
    print(f"{field.label}: {fc.verdict.value}")
    return 0


def cmd_arrival(cfg: dict, out_dir: str, args) -> int:
    params = build_params(cfg)
    x_grid = build_x_grid(cfg)
    packet = build_packet(cfg, params, x_grid)
    psi_tilde = packet if packet.rep is Representation.MOMENTUM \
        else to_momentum(packet)
    grid_T = build_time_grid(cfg)
    s_grid = build_s_grid(cfg)

    dist = arrival_distribution(psi_tilde, grid_T=grid_T, s_grid=s_grid)
    T = dist.grid_T.points
    _write_csv(os.path.join(out_dir, "arrival_density.csv"),
               ["T", "total", "plus", "minus", "interference"],
               zip(T, dist.total, dist.plus, dist.minus, dist.interference))

    plus_moments = arrival_moments(dist, Component.PLUS)
    summary = {
        "w_plus": dist.w_plus,
        "w_minus": dist.w_minus,
        "mean_T_plus": plus_moments.mean,
        "var_T_plus": plus_moments.variance,
        "norm_defect": abs(float(np.trapezoid(dist.total, T))
                           - norm_squared(psi_tilde)),
    }
    if dist.w_minus > 1e-6:
        minus_moments = arrival_moments(dist, Component.MINUS)
        summary["mean_T_minus"] = minus_moments.mean
        summary["var_T_minus"] = minus_moments.variance
        # left movers arrive physically at -T
        summary["mean_arrival_minus"] = -minus_moments.mean
    if args.oracle:
        oracle = arrival_amplitude_quadrature(psi_tilde, dist.grid_T,
                                              threads=args.threads)
        fast = arrival_amplitude_fast(psi_tilde, dist.grid_T, s_grid=s_grid)
        scale = float(np.abs(oracle.values).max())
        summary["oracle_l_inf"] = float(
            np.abs(oracle.values - fast.values).max() / scale)
    _write_json(os.path.join(out_dir, "arrival_summary.json"), summary)
    print(f"w_plus={summary['w_plus']:.6f} mean_T_plus={summary['mean_T_plus']:.4f}")
    return 0


def cmd_classical_limit(cfg: dict, out_dir: str, args) -> int:
    if "classical_limit" not in cfg:
        raise ScenarioError("scenario needs a classical_limit section")
    section = cfg["classical_limit"]
    params = build_params(cfg)
    x_grid = build_x_grid(cfg)
    packet = build_packet(cfg, params, x_grid)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    samples = section.get("samples", 1_000_000)
    x0 = section.get("x0", 0.0)
    bins = section["p_bins"]
    p_edges = np.linspace(bins["min"], bins["max"], bins["count"] + 1)
    centers = 0.5 * (p_edges[:-1] + p_edges[1:])
    widths = np.diff(p_edges)

    ensemble = ensemble_from_packet(packet, samples, seed)
    mu_ens = np.histogram(ensemble.p, bins=p_edges, weights=ensemble.w)[0]
    exact_q = exact_momentum_histogram(packet, p_edges)

    results = []
    for t in section["times"]:
        h_ens = momentum_from_position_limit(ensemble, x0, t, p_edges)
        l1_ens = float(np.sum(np.abs(h_ens.masses - mu_ens)))
        _write_csv(os.path.join(out_dir, f"classical_limit_ensemble_t{t:g}.csv"),
                   ["p", "mu_exact", "mu_limit", "abs_err"],
                   zip(centers, mu_ens / widths, h_ens.masses / widths,
                       np.abs(mu_ens - h_ens.masses) / widths))
        h_q = quantum_momentum_limit(packet, x0, t, p_edges)
        l1_q = l1_distance(h_q, exact_q)
        _write_csv(os.path.join(out_dir, f"classical_limit_quantum_t{t:g}.csv"),
                   ["p", "mu_exact", "mu_limit", "abs_err"],
                   zip(centers, exact_q.masses / widths, h_q.masses / widths,
                       np.abs(exact_q.masses - h_q.masses) / widths))
        results.append({"t": t, "l1_error_ensemble": l1_ens,
                        "l1_error_quantum": l1_q})
        print(f"t={t:g}: L1 ensemble={l1_ens:.5f} quantum={l1_q:.6f}")
    _write_json(os.path.join(out_dir, "classical_limit_summary.json"),
                {"samples": samples, "seed": seed, "x0": x0, "runs": results})
    return 0


def cmd_backflow(cfg: dict, out_dir: str, args) -> int:
    if "backflow_scan" not in cfg:
        raise ScenarioError("scenario needs a backflow_scan section")
    scan = cfg["backflow_scan"]
    params = build_params(cfg)
    x_grid = build_x_grid(cfg)
    psi_tilde = build_packet(cfg, params, x_grid)
    if psi_tilde.rep is not Representation.MOMENTUM:
        psi_tilde = to_momentum(psi_tilde)

    p = psi_tilde.points
    neg_mass = float(np.sum(np.abs(psi_tilde.values[p < 0.0]) ** 2)
                     * psi_tilde.grid.step)
    ts = np.linspace(scan["t_range"][0], scan["t_range"][1], scan["t_count"])
    xs = np.linspace(scan["x_range"][0], scan["x_range"][1], scan["x_count"])

    rows = []
    min_current = math.inf
    argmin = (0.0, 0.0)
    for t in ts:
        psi_t = to_position(evolve_free(psi_tilde, float(t)))
        j = probability_current(psi_t)
        j_scan = np.interp(xs, j.grid.points, j.values)
        for x, jj in zip(xs, j_scan):
            rows.append((t, x, jj))
        k = int(np.argmin(j_scan))
        if j_scan[k] < min_current:
            min_current = float(j_scan[k])
            argmin = (float(xs[k]), float(t))

    _write_csv(os.path.join(out_dir, "backflow_current.csv"),
               ["t", "x", "j"], rows)
    _write_json(os.path.join(out_dir, "backflow_summary.json"), {
        "min_current": min_current,
        "argmin_x": argmin[0],
        "argmin_t": argmin[1],
        "negative_momentum_mass": neg_mass,
    })
    print(f"min current {min_current:.6e} at x={argmin[0]:g}, t={argmin[1]:g}")
    return 0


_COMMANDS = {
    "flow-classify": cmd_flow_classify,
    "arrival": cmd_arrival,
    "classical-limit": cmd_classical_limit,
    "backflow": cmd_backflow,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="flowquant",
        description="Flow quantization and arrival-time distributions on 1-D grids.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=os.environ.get("FLOWQUANT_OUT", "out"),
                       help="output directory (env FLOWQUANT_OUT overrides the default)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap for parallel kernels; output independent of N")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        if name == "arrival":
            p.add_argument("--oracle", action="store_true",
                           help="also run the oscillatory-quadrature oracle")
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")

    try:
        cfg = load_scenario(args.config)
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](cfg, args.out, args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NegativeMomentumLeak as exc:
        print(f"diagnostic: {exc}", file=sys.stderr)
        return 2
    except InconclusiveClassification as exc:
        print(f"diagnostic: {exc}", file=sys.stderr)
        return 2
    except FlowQuantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
