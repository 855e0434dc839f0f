"""Command-line entry point: ``thermocone <command> [options]``."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np
from scipy.spatial import QhullError

from . import __version__, cones, entanglement_sampling as ent, probabilistic_cones as prob
from . import qubit_coherent as qb
from . import volumes as vol
from ._io import atomic_write, dumps_csv, dumps_json
from .simplex_core import GibbsContext, ValidationError, beta_order, check_prob

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse number list {text!r}") from exc


def _beta(text: str) -> float:
    try:
        b = float(text)
    except ValueError as exc:
        raise ValidationError(f"cannot parse beta {text!r}") from exc
    if math.isnan(b) or b < 0:
        raise ValidationError("beta must be non-negative or 'inf'")
    return b


def _beta_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError("--betas expects start:stop:step")
    a, b, step = (float(x) for x in parts)
    if step <= 0 or b < a:
        raise ValidationError("--betas needs step > 0 and stop >= start")
    k = int(math.floor((b - a) / step + 1e-9))
    return [round(a + i * step, 12) for i in range(k + 1)]


def _context(args, d: int) -> GibbsContext:
    energies = _floats(args.energies) if args.energies else list(range(d))
    if len(energies) != d:
        raise ValidationError(f"--energies has {len(energies)} entries, state has {d}")
    return GibbsContext(tuple(energies), args.beta)


def _state(args) -> np.ndarray:
    if not args.state:
        raise ValidationError("--state is required")
    return check_prob(_floats(args.state))


def _positive(value: int, name: str):
    if value < 1:
        raise ValidationError(f"{name} must be positive")


# --------------------------------------------------------------------------
# commands; each returns (results, csv rows)


def cmd_cones(args):
    p = _state(args)
    ctx = _context(args, p.size)
    fut = cones.future_cone(p, ctx)
    res = {
        "beta_order": list(beta_order(p, ctx).perm),
        "gibbs": ctx.gibbs,
        "partition": ctx.partition,
        "future_vertices": fut.vertices,
        "future_volume": fut.volume,
    }
    rows = [{"kind": "future", "chamber": "", "index": i, "entries": v} for i, v in enumerate(fut.vertices)]
    if math.isfinite(ctx.beta) and p.size >= 2:
        tangents = []
        for chamber in cones.all_orders(p.size):
            for t in cones.tangent_vectors_thermal(p, ctx, chamber):
                proj = cones.project_to_simplex(t)
                tangents.append({"chamber": list(chamber.perm), "level": t.level,
                                 "raw": t.entries, "projected": proj})
                tag = "".join(map(str, chamber.perm))
                rows.append({"kind": "tangent_raw", "chamber": tag, "index": t.level, "entries": t.entries})
                rows.append({"kind": "tangent_projected", "chamber": tag, "index": t.level, "entries": proj})
        res["tangent_vectors"] = tangents
    if p.size <= cones.MAX_EXACT_PAST_DIM and math.isfinite(ctx.beta):
        chambers = []
        for chamber in cones.all_orders(p.size):
            v = cones.past_chamber_vertices(p, ctx, chamber)
            if len(v):
                chambers.append({"chamber": list(chamber.perm), "vertices": v, "volume": cones.relative_volume(v)})
                tag = "".join(map(str, chamber.perm))
                rows += [{"kind": "past", "chamber": tag, "index": i, "entries": x} for i, x in enumerate(v)]
        res["past_chambers"] = chambers
        res["past_volume"] = sum(c["volume"] for c in chambers)
        res["gibbs_edge_states"] = cones.gibbs_edge_states(ctx)
    return res, rows


def cmd_volume(args):
    p = _state(args)
    ctx = _context(args, p.size)
    _positive(args.samples, "--samples")
    rep = vol.volumes(p, ctx, method=args.method, n=args.samples, seed=args.seed)
    row = {f"p{i + 1}": v for i, v in enumerate(p)}
    row["beta"] = ctx.beta
    row.update(rep.as_dict())
    return rep.as_dict(), [row]


def cmd_sweep(args):
    p = _state(args)
    betas = _beta_range(args.betas)
    energies = _floats(args.energies) if args.energies else list(range(p.size))
    if len(energies) != p.size:
        raise ValidationError("--energies length differs from the state")
    rows = [r.as_dict() for r in vol.volume_sweep(p, energies, betas, method=args.method,
                                                   n=args.samples, seed=args.seed)]
    return {"rows": rows}, rows


def cmd_iso(args):
    _positive(args.resolution, "--resolution")
    energies = _floats(args.energies) if args.energies else [0.0, 1.0, 2.0]
    ctx = GibbsContext(tuple(energies), args.beta)
    rows = vol.isovolumetric_grid(ctx, args.resolution, method=args.method, n=args.samples, seed=args.seed)
    return {"rows": rows}, rows


def cmd_prob(args):
    p = _state(args)
    levels = _floats(args.p) if args.p else [1.0]
    _positive(args.resolution, "--resolution")
    grid = prob.simplex_grid(p.size, args.resolution)
    panels, rows = [], []
    for P in levels:
        q = prob.ProbConeQuery(p, P)
        codes = prob.prob_classify_many(grid, q)
        names = [prob.ProbRelation(int(c)).name.lower() for c in codes]
        panels.append({
            "P": P,
            "tilde": prob.tilde_distribution(p, P),
            "hat": prob.hat_distribution(p, P),
            "counts": {r.name.lower(): int(np.sum(codes == r)) for r in prob.ProbRelation},
        })
        for pt, name in zip(grid, names):
            row = {f"q{i + 1}": x for i, x in enumerate(pt)}
            row.update({"P": P, "relation": name})
            rows.append(row)
    res = {"panels": panels, "critical_probability": prob.critical_probability(p, grid),
           "grid": rows}
    return res, rows


def cmd_entangle(args):
    spec = ent.InducedMeasureSpec(args.n, args.m, args.seed)
    _positive(args.samples, "--samples")
    _positive(args.resolution, "--resolution")
    res = {"spec": {"N": spec.n_sys, "M": spec.m_env, "n": args.samples, "seed": spec.seed}}
    if args.state:
        p = _state(args)
        res["volumes"] = ent.entanglement_cone_volumes(p, spec, args.samples).as_dict()
    rows = ent.iso_entanglement_grid(spec, args.resolution, args.samples)
    res["grid"] = rows
    return res, rows


def cmd_qubit(args):
    if not args.bloch:
        raise ValidationError("--bloch is required")
    x, y, z = (_floats(args.bloch) + [None, None, None])[:3]
    if z is None:
        raise ValidationError("--bloch expects x,y,z")
    s = qb.BlochState(x, y, z).rotated()
    ctx = qb.QubitThermalContext(args.zeta)
    if args.mode == "gp":
        g = qb.gp_cones(s, ctx)
        lines = qb.gp_polylines(s, ctx)
        res = {"mode": "gp", "cones": g, "polylines": lines}
    else:
        lines = qb.to_polylines(s, ctx)
        past = qb.to_past_region(s, ctx)
        res = {"mode": "to", "d_cross": past.d_cross, "q2_interval": past.q2_interval, "polylines": lines}
    return res, qb.polyline_rows(lines, bloch=args.mode == "gp")


COMMANDS = {
    "cones": cmd_cones,
    "volume": cmd_volume,
    "sweep": cmd_sweep,
    "iso": cmd_iso,
    "prob": cmd_prob,
    "entangle": cmd_entangle,
    "qubit": cmd_qubit,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermocone", description="Thermal and entanglement cone calculations.")
    ap.add_argument("--version", action="version", version=f"thermocone {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", default=None, help="output file (default: stdout)")

    def thermal(sp, beta_default="0"):
        sp.add_argument("--state")
        sp.add_argument("--energies")
        sp.add_argument("--beta", type=str, default=beta_default)

    sp = sub.add_parser("cones", help="future/past vertices and tangent vectors")
    thermal(sp)
    common(sp)

    sp = sub.add_parser("volume", help="relative cone volumes of one state")
    thermal(sp)
    sp.add_argument("--method", choices=("auto", "closed-form", "exact", "mc"), default="auto")
    sp.add_argument("--samples", type=int, default=10**6)
    common(sp)

    sp = sub.add_parser("sweep", help="volumes of a state and its permutations across beta")
    thermal(sp)
    sp.add_argument("--betas", required=True, help="start:stop:step")
    sp.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")
    sp.add_argument("--samples", type=int, default=10**5)
    common(sp)

    sp = sub.add_parser("iso", help="isovolumetric grid over the 2-simplex")
    sp.add_argument("--energies")
    sp.add_argument("--beta", type=str, default="0")
    sp.add_argument("--resolution", type=int, default=60)
    sp.add_argument("--method", choices=("auto", "closed-form", "exact", "mc"), default="auto")
    sp.add_argument("--samples", type=int, default=10**4)
    common(sp)

    sp = sub.add_parser("prob", help="probabilistic LOCC cones on a grid")
    sp.add_argument("--state")
    sp.add_argument("--p", help="comma-separated transformation probabilities")
    sp.add_argument("--resolution", type=int, default=60)
    common(sp)

    sp = sub.add_parser("entangle", help="induced-measure entanglement cone volumes")
    sp.add_argument("--n", type=int, default=3, help="smaller subsystem dimension N")
    sp.add_argument("--m", type=int, default=3, help="environment dimension M")
    sp.add_argument("--samples", type=int, default=50_000)
    sp.add_argument("--resolution", type=int, default=60)
    sp.add_argument("--state")
    common(sp)

    sp = sub.add_parser("qubit", help="coherent qubit cones (GP or TO)")
    sp.add_argument("--bloch", help="x,y,z")
    sp.add_argument("--zeta", type=float, default=0.0)
    sp.add_argument("--mode", choices=("gp", "to"), default="gp")
    common(sp)
    return ap


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "format")}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if hasattr(args, "beta"):
            args.beta = _beta(args.beta)
        results, rows = COMMANDS[args.command](args)
        if args.format == "json":
            text = dumps_json({"config": _config(args), "results": results,
                               "provenance": {"seed": args.seed, "version": __version__}})
        else:
            meta = {"command": args.command, "seed": args.seed, "version": __version__}
            if args.command == "entangle":
                meta.update({"N": args.n, "M": args.m, "n": args.samples})
            text = dumps_csv(rows, meta)
    except ValidationError as exc:
        print(f"thermocone: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FloatingPointError, np.linalg.LinAlgError, QhullError, ArithmeticError) as exc:
        print(f"thermocone: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.output:
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        import os

        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
