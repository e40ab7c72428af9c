"""Batch front end driven by a single JSON run spec.

Usage: ``macwt --spec run.json [--out DIR] [--seed-override N]``

The run spec names a ``command`` (region, compare, split, counterexample,
simulate, hull, slice) plus the fields that command needs.  Relative paths
are resolved against the spec file's directory.  Exit codes: 0 success,
2 input error, 3 resource cap, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .channel import ChannelError, channel_to_json, check_inputs, load_channel, mi_bundle, uniform_inputs
from .polytope import (
    DimensionLimitError,
    PolytopeError,
    contains_point,
    dumps,
    equals,
    fmt,
    is_subset,
    slice_polygon,
    vertices,
    vertices_csv,
)
from .regions import RegionError, RegionKind, build_region, hull_over_inputs, rate_axes, region_tekin_r1, region_theorem1
from .simcode import CapExceeded, CodeConfig, SimulationError, UserRates, results_csv, run_trials
from .splitmap import (
    SplitError,
    check_gap_condition,
    counterexample_tuple,
    search_counterexample,
    transform,
    xor_witness,
)

log = logging.getLogger("macwt")

COMMANDS = ("region", "compare", "split", "counterexample", "simulate", "hull", "slice")
EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4


class SpecError(ValueError):
    pass


class InvariantBreach(RuntimeError):
    pass


def _round(obj):
    """Floats to 12 significant digits, recursively."""
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _point(t, axes) -> dict:
    return {a: float(t[a]) for a in axes}


class RunSpec:
    def __init__(self, doc: dict, base: Path, out: Path | None = None, seed: int | None = None):
        if not isinstance(doc, dict):
            raise SpecError("run spec must be a JSON object")
        self.doc = doc
        self.base = base
        self.command = doc.get("command")
        if self.command not in COMMANDS:
            raise SpecError(f"command must be one of {COMMANDS}, got {self.command!r}")
        self.seed_override = seed
        self.seed = int(doc.get("seed", 0) if seed is None else seed)
        self.eps = doc.get("eps", 0)
        self.out = out if out is not None else self.path(doc.get("output", "out"))
        self.max_dim = doc.get("max_dim")

    @classmethod
    def load(cls, path, out=None, seed=None) -> "RunSpec":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read run spec {path}: {exc}") from exc
        return cls(doc, path.parent, None if out is None else Path(out), seed)

    def path(self, name) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.base / p

    def need(self, key):
        if key not in self.doc:
            raise SpecError(f"command {self.command!r} needs field {key!r}")
        return self.doc[key]

    def channel(self):
        p = self.path(self.need("channel"))
        if not p.exists():
            raise SpecError(f"channel file {p} does not exist")
        ch, file_px = load_channel(p)
        px = self.doc.get("inputs")
        if px is not None:
            px = check_inputs(ch, px)
        elif file_px is not None:
            px = file_px
        else:
            px = uniform_inputs(ch.input_sizes)
        return ch, px

    def write(self, name, text: str):
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)


def _region_doc(kind, region, mi, verts, eps) -> dict:
    doc = region.to_json()
    doc.update(
        kind=str(RegionKind(kind).value),
        eps=float(eps),
        mutual_information=mi.as_dict(),
        vertices=[_point(v, region.axes) for v in verts],
    )
    return _round(doc)


def cmd_region(spec: RunSpec) -> int:
    ch, px = spec.channel()
    kind = spec.doc.get("kind", "theorem1")
    mi = mi_bundle(ch, px)
    region = build_region(kind, mi, spec.eps, spec.doc.get("num_users"))
    verts = vertices(region, spec.max_dim)
    spec.write("region.json", dumps(_region_doc(kind, region, mi, verts, spec.eps)))
    spec.write("vertices.csv", vertices_csv(region.axes, verts))
    return EXIT_OK


def cmd_compare(spec: RunSpec) -> int:
    ch, px = spec.channel()
    mi = mi_bundle(ch, px)
    kinds = [RegionKind(k).value for k in spec.doc.get("kinds", ["r2", "theorem1", "tekin_r1"])]
    regions = {k: build_region(k, mi) for k in kinds}
    verts = {k: vertices(p, spec.max_dim) for k, p in regions.items()}
    matrix, witnesses = {}, []
    for a in kinds:
        for b in kinds:
            if a == b:
                continue
            sub = is_subset(regions[a], regions[b], spec.max_dim)
            matrix[f"{a} <= {b}"] = sub
            if not sub:
                # A vertex of `a` outside `b` witnesses the failed inclusion.
                v = next(v for v in verts[a] if not contains_point(regions[b], v))
                witnesses.append({"in": a, "not_in": b, "point": _point(v, rate_axes(2))})
    equal = {f"{a} == {b}": equals(regions[a], regions[b], spec.max_dim) for i, a in enumerate(kinds) for b in kinds[i + 1 :]}
    report = {"inclusions": matrix, "equalities": equal, "witnesses": witnesses, "gap_condition": check_gap_condition(mi)}
    if report["gap_condition"]:
        exact = mi.rational()
        c = counterexample_tuple(exact)
        report["counterexample"] = {
            "point": _point(c, rate_axes(2)),
            "membership": {k: contains_point(build_region(k, exact), c) for k in kinds},
        }
    report["mutual_information"] = mi.as_dict()
    spec.write("compare.json", dumps(_round(report)))
    return EXIT_OK


def cmd_split(spec: RunSpec) -> int:
    ch, px = spec.channel()
    mi = mi_bundle(ch, px)
    tuples = spec.doc.get("tuples")
    if tuples is None:
        tuples = vertices(build_region("theorem1", mi))
    reports = [transform(t, mi) for t in tuples]
    axes = rate_axes(2)
    spec.write("split.json", dumps(_round({"reports": [r.to_json() for r in reports]})))
    rows = [{**{f"in_{a}": r.input[a] for a in axes}, "category": r.category, **{f"out_{a}": r.output[a] for a in axes}} for r in reports]
    header = [f"in_{a}" for a in axes] + ["category"] + [f"out_{a}" for a in axes]
    lines = [",".join(header)] + [",".join(str(row[h]) if h == "category" else fmt(row[h]) for h in header) for row in rows]
    spec.write("split.csv", "\n".join(lines) + "\n")
    bad = [r for r in reports if not r.verified]
    if bad:
        raise InvariantBreach(f"{len(bad)} transformed tuples failed verification")
    return EXIT_OK


def cmd_counterexample(spec: RunSpec) -> int:
    cfg = spec.doc.get("counterexample", {})
    sizes = cfg.get("input_sizes", [2, 2])
    planted = [xor_witness()] if cfg.get("plant_xor", False) else []
    w = search_counterexample(sizes, cfg.get("y_size", 2), cfg.get("z_size", 2), int(cfg.get("trials", 10_000)), spec.seed, planted)
    doc = {"found": w is not None, "seed": spec.seed}
    if w is not None:
        exact = w.mi.rational()
        doc.update(
            trial=w.trial,
            tuple=_point(w.tuple, rate_axes(2)),
            channel=channel_to_json(w.channel, w.inputs),
            mutual_information=w.mi.as_dict(),
            in_tekin_r1=contains_point(region_tekin_r1(exact), w.tuple),
            in_theorem1=contains_point(region_theorem1(exact), w.tuple),
        )
        if not doc["in_tekin_r1"] or doc["in_theorem1"]:
            raise InvariantBreach("returned witness does not separate the regions")
    spec.write("counterexample.json", dumps(_round(doc)))
    return EXIT_OK


def _user_rates(r) -> UserRates:
    if isinstance(r, dict):
        return UserRates(float(r.get("secret", 0)), float(r.get("open", 0)), float(r.get("guard", 0)))
    return UserRates(*map(float, r))


def cmd_simulate(spec: RunSpec) -> int:
    ch, px = spec.channel()
    sim = spec.need("simulation")
    ns = sim.get("n", [6])
    ns = ns if isinstance(ns, list) else [ns]
    rates = tuple(_user_rates(r) for r in sim["rates"])
    seeds = sim.get("seeds", [spec.seed])
    if spec.seed_override is not None:
        # Keep the number of codebook seeds, restart them at the override.
        seeds = [spec.seed_override + i for i in range(len(seeds))]
    results = []
    for seed in seeds:
        for n in ns:
            cfg = CodeConfig(int(n), rates, float(sim.get("eps", 0.1)), int(seed))
            results.append(
                run_trials(ch, px, cfg, int(sim.get("trials", 1000)), bool(sim.get("leakage", True)), int(sim.get("n_stat_samples", 200)))
            )
    spec.write("simulate.json", dumps(_round({"results": [r.to_json() for r in results]})))
    spec.write("simulate.csv", results_csv(results))
    return EXIT_OK


def cmd_hull(spec: RunSpec) -> int:
    ch, _ = spec.channel()
    family = [check_inputs(ch, px) for px in spec.need("input_family")]
    kind = spec.doc.get("kind", "theorem1")
    hull = hull_over_inputs(ch, family, kind, spec.eps, spec.max_dim)
    verts = vertices(hull, spec.max_dim)
    doc = hull.to_json()
    doc.update(kind=RegionKind(kind).value, members=len(family), vertices=[_point(v, hull.axes) for v in verts])
    spec.write("hull.json", dumps(_round(doc)))
    spec.write("vertices.csv", vertices_csv(hull.axes, verts))
    return EXIT_OK


def cmd_slice(spec: RunSpec) -> int:
    ch, px = spec.channel()
    sl = spec.need("slice")
    free = list(sl["free"])
    fixed = dict(sl.get("fixed", {}))
    region = build_region(spec.doc.get("kind", "theorem1"), mi_bundle(ch, px), spec.eps, spec.doc.get("num_users"))
    unknown = [a for a in free + list(fixed) if a not in region.axes]
    if len(free) != 2 or unknown or set(free) & set(fixed) or set(free) | set(fixed) != set(region.axes):
        raise SpecError(f"slice needs two free axes and every other axis fixed; axes are {region.axes}")
    poly = slice_polygon(region, free, fixed)
    spec.write("slice.csv", vertices_csv(free, poly))
    status = {"status": "ok" if poly else "empty", "points": len(poly), "free": free, "fixed": fixed}
    if not poly:
        status["note"] = "fixed rates lie outside the region"
    spec.write("slice_status.json", dumps(_round(status)))
    return EXIT_OK


HANDLERS = {
    "region": cmd_region,
    "compare": cmd_compare,
    "split": cmd_split,
    "counterexample": cmd_counterexample,
    "simulate": cmd_simulate,
    "hull": cmd_hull,
    "slice": cmd_slice,
}


def run(spec: RunSpec) -> int:
    try:
        return HANDLERS[spec.command](spec)
    except (CapExceeded, DimensionLimitError) as exc:
        log.error("resource cap: %s", exc)
        return EXIT_CAP
    except InvariantBreach as exc:
        log.error("invariant breach: %s", exc)
        return EXIT_INVARIANT
    except (SpecError, ChannelError, RegionError, SplitError, SimulationError, PolytopeError, KeyError, TypeError, ValueError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="macwt", description=__doc__.splitlines()[0])
    parser.add_argument("--spec", required=True, help="JSON run spec")
    parser.add_argument("--out", help="output directory (overrides the spec)")
    parser.add_argument("--seed-override", type=int, help="replace the run-spec seed")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        spec = RunSpec.load(args.spec, args.out, args.seed_override)
    except SpecError as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
