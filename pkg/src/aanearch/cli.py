"""Batch command line: ``aanearch <subcommand> [options]``.

Exit status is 0 on success. On failure a single JSON line
``{"error": <code>, "message": <text>}`` is written to stderr and the exit
status is 2 for configuration/input problems, 1 otherwise. Log verbosity is
read from the ``AANEARCH_LOG_LEVEL`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import io, pipeline
from .errors import AaneArchError, ConfigError, InputError
from .features import (
    PairwiseIndexMatrix,
    SERIAL_INTERVAL_DAYS,
    reproduction_number,
    venables_distance,
    weighted_degree_centrality,
)
from .synth import SyntheticSpec, generate_synthetic


def parse_k_range(text: str) -> list:
    """``"2-6"`` or ``"2,4,6"``."""
    try:
        if "-" in text:
            lo, hi = (int(v) for v in text.split("-", 1))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid k range {text!r}") from None


def _common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--input-dir")
    p.add_argument("--output-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--k-range", type=parse_k_range)
    p.add_argument("--k", type=int, help="pin the cluster count instead of the silhouette choice")
    p.add_argument("--method", choices=("kmeans", "gmm", "both"))
    p.add_argument("--dimension", type=int, help="embedding dimension")
    p.add_argument("--min-archetype-size", type=int)
    p.add_argument("--fuse-threshold", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--timesteps", type=int)
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aanearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    feat = sub.add_parser("features", help="standardize attribute tables, or compute one raw feature")
    _common(feat)
    feat.add_argument("--grid", help="activity grid CSV (x,y,intensity): print the Venables distance")
    feat.add_argument("--cases", help="case series CSV (date,cumulative_cases): print the reproduction number")
    feat.add_argument("--tau", type=float, default=SERIAL_INTERVAL_DAYS)
    feat.add_argument("--step", type=float, default=1.0, help="days between case rows")
    feat.add_argument("--window", type=int, nargs=2, metavar=("START", "END"))
    feat.add_argument("--matrix", help="square pairwise CSV: print weighted degree centralities")

    for name, text in (
        ("embed", "embed every timestep's network"),
        ("cluster", "cluster embeddings for every K and method"),
        ("validate", "silhouette sweep, stability and K/method selection"),
        ("archetype", "align labels and merge trajectories into archetypes"),
        ("test", "Kruskal-Wallis and Dunn post hoc tests across archetypes"),
        ("pipeline", "run every stage and write manifest.json"),
    ):
        _common(sub.add_parser(name, help=text))

    syn = sub.add_parser("synth", help="write a planted-partition dataset")
    syn.add_argument("--output-dir", required=True)
    for flag, typ, default in (
        ("--blocks", int, 4), ("--nodes", int, 200), ("--timesteps", int, 17),
        ("--p-in", float, 0.3), ("--p-out", float, 0.02), ("--shift", float, 3.0),
        ("--features", int, 6), ("--switch-nodes", int, 20), ("--seed", int, 0),
        ("--dimension", int, 16),
    ):
        syn.add_argument(flag, type=typ, default=default)
    return parser


def config_from_args(args) -> pipeline.PipelineConfig:
    methods = None
    if args.method:
        methods = ["kmeans", "gmm"] if args.method == "both" else [args.method]
    solver = {"dimension": args.dimension} if args.dimension else None
    return pipeline.load_config(
        args.config,
        input_dir=args.input_dir,
        output_dir=args.output_dir,
        seed=args.seed,
        k_range=args.k_range,
        k=args.k,
        methods=methods,
        min_archetype_size=args.min_archetype_size,
        fuse_threshold=args.fuse_threshold,
        alpha=args.alpha,
        timesteps=args.timesteps,
        threads=args.threads,
        solver=solver,
    )


def _raw_features(args, out):
    if args.grid:
        out.write(f"venables_distance,{io.fmt(venables_distance(io.read_grid(args.grid)))}\n")
    if args.cases:
        series = io.read_cases(args.cases, args.step)
        r0 = reproduction_number(series, tuple(args.window) if args.window else None, args.tau)
        out.write(f"reproduction_number,{io.fmt(r0)}\n")
    if args.matrix:
        m = io.read_pairwise_matrix(args.matrix)
        cent = weighted_degree_centrality(PairwiseIndexMatrix(m.values, m.node_ids))
        out.write("node_id,weighted_degree\n")
        for n, v in zip(m.node_ids, cent):
            out.write(f"{n},{io.fmt(v)}\n")


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("AANEARCH_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            spec = SyntheticSpec(
                blocks=args.blocks, nodes=args.nodes, timesteps=args.timesteps, p_in=args.p_in,
                p_out=args.p_out, shift=args.shift, n_features=args.features,
                switch_nodes=args.switch_nodes, seed=args.seed,
            )
            out = generate_synthetic(args.output_dir, spec)
            cfg = {"solver": {"dimension": args.dimension}, "seed": args.seed}
            (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            print(out)
            return 0
        if args.command == "features" and (args.grid or args.cases or args.matrix):
            _raw_features(args, sys.stdout)
            return 0
        config = config_from_args(args)
        if args.command == "pipeline":
            manifest = pipeline.run_pipeline(config)
            for path in manifest.outputs:
                print(path)
            return 0
        for path in pipeline.run_stage(args.command, config):
            print(path)
        return 0
    except AaneArchError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return 2 if isinstance(exc, (ConfigError, InputError)) else 1


if __name__ == "__main__":
    sys.exit(main())
