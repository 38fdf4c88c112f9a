"""Command-line front end emitting machine-readable artifacts.

Subcommands: surface (band sheets + |disc| on a slice, CSV), loop
(transport report for a preset or JSON config), ea (arc polylines), lab
(synthesize / fit / full pipeline), group (Cayley table + verification).
Every run writes a manifest (inputs, versions, seed, timestamp) next to its
outputs; reports themselves carry no timestamps so identical configs yield
byte-identical files.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AmbiguousMatch, EptriadError, FitDiverged, NoConvergence, NotAGroup
from .locate import refine_ep, seed_eps_in_slice, trace_ea
from .loops import PRESET_NAMES, interpolate_loop, preset_loop
from .model import ParamPoint, discriminant_formula, eigensystem
from .permutations import all_elements, element, identify, to_matrix, verify_group
from .spectral import (
    CavityConfig,
    FitConfig,
    NoiseSpec,
    fit_loop,
    load_dataset,
    save_dataset,
    synthesize,
)
from .transport import (
    cycles_to_identity,
    match_assignment,
    transport,
    vorticity_table,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _write_manifest(out_dir: Path, command: str, args: dict, seed: int | None) -> None:
    clean = {k: v for k, v in args.items() if k != "func" and not callable(v)}
    manifest = {
        "command": command,
        "arguments": clean,
        "seed": seed,
        "versions": {
            "eptriad": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _dump_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))


def _transport_report(result) -> dict:
    return {
        "label": result.label,
        "permutation": result.permutation.as_string(),
        "permutation_label": identify(result.permutation),
        "nabp_abs": np.abs(result.holonomy).round(12).tolist(),
        "nabp_phase": np.angle(result.holonomy).round(12).tolist(),
        "theta": result.berry_phase,
        "min_overlap": result.min_overlap,
        "reliable": result.reliable,
        "n_steps": int(result.tracked_eigenvalues.shape[0]),
        "n_exchanges": result.n_exchanges,
        "exchange_points": [
            {"eta": e.point.eta, "zeta": e.point.zeta, "xi": e.point.xi, "step": e.step}
            for e in result.events
        ],
        "vorticity": vorticity_table(result),
        "cycles_to_identity": cycles_to_identity(result),
    }


def _parse_grid(spec: str) -> tuple[int, int]:
    if "x" in spec.lower():
        a, b = spec.lower().split("x")
        return int(a), int(b)
    n = int(spec)
    return n, n


def cmd_surface(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    nz, nx = _parse_grid(args.grid)
    header = (
        ["zeta", "xi"]
        + [f"re_omega_{k}" for k in (1, 2, 3)]
        + [f"im_omega_{k}" for k in (1, 2, 3)]
        + ["abs_disc"]
    )
    if args.window[0] >= args.window[1] or args.window[2] >= args.window[3]:
        path = out / "surface.csv"
        with path.open("w", newline="") as fh:
            csv.writer(fh).writerow(header)
        _write_manifest(out, "surface", vars(args) | {"out": str(out)}, None)
        print(f"wrote {path} (empty window, header only)")
        return EXIT_OK
    zz = np.linspace(args.window[0], args.window[1], nz)
    xx = np.linspace(args.window[2], args.window[3], nx)
    rows = []
    prev_row_first = None
    for z in zz:
        es = eigensystem(ParamPoint(args.eta, z, xx[0], args.g))
        if prev_row_first is not None:
            order, _, _ = match_assignment(prev_row_first, es)
            es = _reorder_es(es, order)
        prev_row_first = es
        cur = es
        _emit_surface_row(rows, cur, z, xx[0], args)
        for x in xx[1:]:
            es2 = eigensystem(ParamPoint(args.eta, z, x, args.g))
            order, _, _ = match_assignment(cur, es2)
            cur = _reorder_es(es2, order)
            _emit_surface_row(rows, cur, z, x, args)
    path = out / "surface.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    _write_manifest(out, "surface", vars(args) | {"out": str(out)}, None)
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def _reorder_es(es, order):
    from dataclasses import replace

    idx = list(order)
    return replace(
        es,
        eigenvalues=es.eigenvalues[idx],
        right_vectors=es.right_vectors[:, idx],
        left_vectors=es.left_vectors[idx, :],
    )


def _emit_surface_row(rows, es, z, x, args):
    w = es.eigenvalues
    d = abs(discriminant_formula(ParamPoint(args.eta, z, x, args.g)))
    rows.append(
        [f"{z:.10g}", f"{x:.10g}"]
        + [f"{w[k].real:.12g}" for k in range(3)]
        + [f"{w[k].imag:.12g}" for k in range(3)]
        + [f"{d:.12g}"]
    )


def cmd_loop(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.preset:
        loop = preset_loop(args.preset, steps_per_segment=args.steps_per_segment)
        name = args.preset
    else:
        cfg = json.loads(Path(args.config).read_text())
        g = cfg["g"]
        if cfg.get("eta_mode", "per-point") == "fixed":
            eta = cfg["eta"]
            waypoints = [
                ParamPoint(eta, w[-2], w[-1], g) for w in cfg["waypoints"]
            ]
        else:
            waypoints = [ParamPoint(w[0], w[1], w[2], g) for w in cfg["waypoints"]]
        loop = interpolate_loop(
            waypoints, cfg.get("steps_per_segment", args.steps_per_segment),
            label=cfg.get("label", "loop"),
        )
        name = cfg.get("label", "loop")
    result = transport(loop)
    _dump_json(out / f"loop_{name}.json", _transport_report(result))
    _write_manifest(out, "loop", {k: v for k, v in vars(args).items() if k != "func"}, None)
    print(
        f"{name}: permutation {result.permutation.as_string()} "
        f"theta {result.berry_phase:+.6f} min_overlap {result.min_overlap:.3f}"
    )
    return EXIT_OK


def cmd_ea(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    arcs = []
    found: list[ParamPoint] = []
    for eta in (-0.5, 0.0, 0.5):
        for cand in seed_eps_in_slice(eta, args.g, ((-1.2, 1.2), (-1.2, 1.2)), 64):
            try:
                ep = refine_ep(cand.center)
            except NoConvergence:
                continue
            if any(
                np.linalg.norm(ep.point.as_array() - q.as_array()) < 1e-4 for q in found
            ):
                continue
            found.append(ep.point)
            arcs.append(trace_ea(args.g, ep, step=args.step))
    # drop duplicate arcs covering the same points
    unique = []
    for arc in arcs:
        c = arc.coords()
        dup = False
        for other in unique:
            oc = other.coords()
            k = min(len(c), len(oc))
            if k and np.min(np.linalg.norm(oc[:, None, :] - c[None, :k, :], axis=2)) < args.step:
                dup = True
                break
        if not dup:
            unique.append(arc)
    doc = {
        "g": args.g,
        "arcs": [
            {
                "terminated": arc.terminated,
                "closed": arc.closed,
                "points": [
                    {
                        "eta": q.point.eta,
                        "zeta": q.point.zeta,
                        "xi": q.point.xi,
                        "re_omega": q.repeated_eigenvalue.real,
                        "im_omega": q.repeated_eigenvalue.imag,
                        "order": q.order,
                    }
                    for q in arc.points
                ],
            }
            for arc in unique
        ],
    }
    _dump_json(out / "arcs.json", doc)
    _write_manifest(out, "ea", {k: v for k, v in vars(args).items() if k != "func"}, None)
    print(f"traced {len(unique)} arc(s) at g = {args.g}")
    return EXIT_OK


def _lab_config(args) -> tuple[CavityConfig, FitConfig]:
    cav = CavityConfig()
    fit = FitConfig(seed=args.seed)
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        if "n_positions_per_cavity" in doc or "n_frequencies" in doc:
            cav = CavityConfig(
                n_positions_per_cavity=doc.get("n_positions_per_cavity", 7),
                n_frequencies=doc.get("n_frequencies", 31),
            )
        fit = FitConfig(
            population=doc.get("population", 64),
            generations=doc.get("generations", 200),
            seed=args.seed,
        )
    return cav, fit


def cmd_lab(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cav, fitcfg = _lab_config(args)
    preset = args.loop_preset
    if args.subcommand in ("synth", "pipeline"):
        loop = preset_loop(preset, steps_per_segment=1)
        points = list(loop.steps)
        dataset = synthesize(points, cav, NoiseSpec(args.noise, args.seed))
        save_dataset(dataset, out / "dataset.json")
        print(f"synthesized {len(points)} steps (noise {args.noise:g}, seed {args.seed})")
    if args.subcommand == "fit":
        dataset = load_dataset(args.dataset)
    if args.subcommand in ("fit", "pipeline"):
        fits, result = fit_loop(dataset, fit_config=fitcfg)
        report = {
            "fit": [
                {
                    "eta": f.point.eta,
                    "zeta": f.point.zeta,
                    "xi": f.point.xi,
                    "g": f.point.g,
                    "omega0": f.scale.omega0,
                    "gamma0": f.scale.gamma0,
                    "kappa": f.scale.kappa,
                    "residual": f.residual,
                    "truth": (
                        None
                        if st.param_truth is None
                        else [st.param_truth.eta, st.param_truth.zeta, st.param_truth.xi, st.param_truth.g]
                    ),
                }
                for f, st in zip(fits, dataset.steps)
            ],
            "transport": _transport_report(result),
        }
        _dump_json(out / "fit_report.json", report)
        print(
            f"fit {len(fits)} steps: permutation {result.permutation.as_string()} "
            f"theta {result.berry_phase:+.6f}"
        )
    _write_manifest(out, f"lab-{args.subcommand}", {k: v for k, v in vars(args).items() if k != "func"}, args.seed)
    return EXIT_OK


def cmd_group(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = verify_group(all_elements())
    labels = list(report.labels)
    table = [[report.cayley[(a, b)] for b in labels] for a in labels]
    doc = {
        "labels": labels,
        "orders": report.orders,
        "cayley": table,
        "witness": list(report.witness) if report.witness else None,
        "matrices": {lbl: to_matrix(element(lbl)).astype(int).tolist() for lbl in labels},
    }
    _dump_json(out / "group.json", doc)
    _write_manifest(out, "group", {k: v for k, v in vars(args).items() if k != "func"}, None)
    width = max(len(x) for x in labels) + 1
    header = " " * width + "".join(x.ljust(width) for x in labels)
    print(header)
    for a in labels:
        print(a.ljust(width) + "".join(report.cayley[(a, b)].ljust(width) for b in labels))
    if report.witness:
        a, b = report.witness
        print(f"non-commuting witness: {a} o {b} != {b} o {a}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eptriad", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("surface", help="band sheets and |disc| on a (zeta, xi) slice")
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--g", type=float, default=0.61)
    sp.add_argument("--grid", default="101x101", help="resolution N or NxM")
    sp.add_argument("--window", type=float, nargs=4, default=[-1.0, 1.0, -1.0, 1.0],
                    metavar=("ZLO", "ZHI", "XLO", "XHI"))
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_surface)

    lp = sub.add_parser("loop", help="transport a loop and report the permutation")
    lp.add_argument("--preset", choices=PRESET_NAMES)
    lp.add_argument("--config", help="JSON loop config path")
    lp.add_argument("--steps-per-segment", type=int, default=200)
    lp.add_argument("--out", default="out")
    lp.set_defaults(func=cmd_loop)

    ep = sub.add_parser("ea", help="trace exceptional arcs at fixed g")
    ep.add_argument("--g", type=float, required=True)
    ep.add_argument("--step", type=float, default=0.02)
    ep.add_argument("--out", default="out")
    ep.set_defaults(func=cmd_ea)

    lb = sub.add_parser("lab", help="virtual experiment: synth / fit / pipeline")
    lb.add_argument("subcommand", choices=("synth", "fit", "pipeline"))
    lb.add_argument("--loop-preset", default="mu1", choices=PRESET_NAMES)
    lb.add_argument("--dataset", help="dataset JSON (for fit)")
    lb.add_argument("--config", help="JSON lab config path")
    lb.add_argument("--noise", type=float, default=0.0)
    lb.add_argument("--seed", type=int, default=0)
    lb.add_argument("--out", default="out")
    lb.set_defaults(func=cmd_lab)

    gp = sub.add_parser("group", help="Cayley table and group verification")
    gp.add_argument("--out", default="out")
    gp.set_defaults(func=cmd_group)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "loop" and not (args.preset or args.config):
            print("loop: provide --preset or --config", file=sys.stderr)
            return EXIT_CONFIG
        if args.command == "lab" and args.subcommand == "fit" and not args.dataset:
            print("lab fit: provide --dataset", file=sys.stderr)
            return EXIT_CONFIG
        return args.func(args)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoConvergence, FitDiverged, AmbiguousMatch, NotAGroup) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except EptriadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
