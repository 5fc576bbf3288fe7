"""End-to-end batch pipeline.

Input layout::

    <input_dir>/week_<k>/edges.csv        src,dst,count
    <input_dir>/week_<k>/attributes.csv   node_id,<feature>,...

Every stage reads its inputs from disk and writes its outputs under
``output_dir``, so any stage can be re-run on its own from persisted
upstream results.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, io, plots
from .archetype import (
    Archetype,
    ArchetypeTable,
    align_labels,
    fuse_similar,
    merge_archetypes,
    trajectories,
)
from .cluster import METHODS, fit
from .embed import SolverConfig, embed, project_2d
from .errors import ConfigError, InputError
from .features import standardize
from .graph import build_network
from .stats import CORRECTIONS, feature_difference_scan
from .validate import (
    STABILITY_MEASURES,
    aggregate_stability,
    dunn_index,
    leave_one_column_out,
    select_k,
)

logger = logging.getLogger(__name__)

STAGES = ("features", "embed", "cluster", "validate", "archetype", "test")


@dataclass
class PipelineConfig:
    input_dir: str = "data"
    output_dir: str = "out"
    timesteps: int | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    k_range: list = field(default_factory=lambda: [2, 3, 4, 5, 6])
    methods: list = field(default_factory=lambda: list(METHODS))
    k: int | None = None
    method: str | None = None
    min_archetype_size: int = 20
    fuse_threshold: int = 0
    alpha: float = 0.05
    correction: str = "holm"
    stability: bool = True
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.solver, dict):
            self.solver = SolverConfig(**self.solver)
        self.k_range = sorted(set(int(k) for k in self.k_range))
        self.methods = list(self.methods)
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")
        if not self.k_range or self.k_range[0] < 2:
            raise ConfigError("k_range values must be >= 2")
        if self.k is not None and self.k not in self.k_range:
            raise ConfigError(f"pinned k={self.k} is outside k_range {self.k_range}")
        if self.method is not None and self.method not in self.methods:
            raise ConfigError(f"pinned method {self.method!r} is not among {self.methods}")
        if self.correction not in CORRECTIONS:
            raise ConfigError(f"correction must be one of {CORRECTIONS}")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.min_archetype_size < 1 or self.fuse_threshold < 0 or self.threads < 1:
            raise ConfigError("min_archetype_size and threads must be >= 1, fuse_threshold >= 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """Hash of every setting that can change the outputs."""
        d = self.to_dict()
        for key in ("input_dir", "output_dir", "threads"):
            d.pop(key)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def load_config(path=None, **overrides) -> PipelineConfig:
    """Read a JSON config file and apply non-None keyword overrides."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    solver = dict(data.pop("solver", {}))
    solver.update(overrides.pop("solver", None) or {})
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    try:
        data["solver"] = SolverConfig(**solver)
        return PipelineConfig(**data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


@dataclass
class RunManifest:
    config_hash: str
    config: dict
    inputs: dict
    timings: dict
    outputs: dict
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Workspace:
    """Path conventions for one run."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.inp = Path(config.input_dir)
        self.out = Path(config.output_dir)

    def week_dir(self, t):
        return self.inp / f"week_{t}"

    def timesteps(self) -> int:
        cfg_t = self.config.timesteps
        if cfg_t is not None:
            if cfg_t < 1:
                raise ConfigError("timesteps must be >= 1")
            for t in range(cfg_t):
                if not self.week_dir(t).is_dir():
                    raise InputError(f"missing week directory: {self.week_dir(t)}")
            return cfg_t
        t = 0
        while self.week_dir(t).is_dir():
            t += 1
        if t == 0:
            raise InputError(f"missing week directory: {self.week_dir(0)}")
        return t

    def features(self, t):
        return self.out / "features" / f"week_{t}.csv"

    def embedding(self, t):
        return self.out / "embeddings" / f"week_{t}.csv"

    def trace(self, t):
        return self.out / "embeddings" / f"trace_week_{t}.csv"

    @property
    def assignments(self):
        return self.out / "clusters" / "assignments.csv"

    @property
    def selection(self):
        return self.out / "validate" / "selection.csv"

    @property
    def members(self):
        return self.out / "archetypes" / "members.csv"


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def validate_inputs(config: PipelineConfig):
    """Check layout, schemas, node universe and edge endpoints before any compute.

    Returns the per-timestep attribute tables (reordered to timestep 0's node
    order) and edge records.
    """
    ws = Workspace(config)
    T = ws.timesteps()
    tables, edges = [], []
    for t in range(T):
        table = io.read_attributes(ws.week_dir(t) / "attributes.csv", t)
        recs = io.read_edges(ws.week_dir(t) / "edges.csv")
        if tables:
            ref = tables[0]
            if set(table.node_ids) != set(ref.node_ids):
                raise InputError(f"week_{t}: node universe differs from week_0")
            if table.columns != ref.columns:
                raise InputError(f"week_{t}: feature columns differ from week_0")
            order = [table.index_of(n) for n in ref.node_ids]
            table = type(table)(ref.node_ids, table.columns, table.values[order], t)
        for src, dst, _ in recs:
            for node in (src, dst):
                if node not in table:
                    raise InputError(f"week_{t}/edges.csv: edge endpoint {node!r} is not in the attribute table")
        tables.append(table)
        edges.append(recs)
    n = tables[0].n_nodes
    if config.solver.dimension > n:
        raise ConfigError(f"solver dimension {config.solver.dimension} exceeds node count {n}")
    if config.k_range[-1] > n - 1:
        raise ConfigError(f"k_range must lie within [2, {n - 1}]")
    if len(tables[0].columns) < 2 and config.stability:
        raise ConfigError("stability needs at least two attribute columns")
    return tables, edges


def stage_features(config: PipelineConfig) -> list:
    ws = Workspace(config)
    tables, _ = validate_inputs(config)
    return [io.write_attributes(ws.features(t), standardize(tab)) for t, tab in enumerate(tables)]


def _load_network(ws, t):
    table = io.read_attributes(ws.features(t), t)
    recs = io.read_edges(ws.week_dir(t) / "edges.csv")
    return build_network(recs, table, t)


def stage_embed(config: PipelineConfig) -> list:
    ws = Workspace(config)
    T = ws.timesteps()

    def run(t):
        emb, trace = embed(_load_network(ws, t), config.solver)
        io.write_embedding(ws.embedding(t), emb)
        io.write_trace(ws.trace(t), trace)
        return (t, trace.iterations, trace.converged, trace.residual_monotone,
                trace.residual[-1], trace.initial_objective, trace.final_objective)

    rows = _map(run, range(T), config.threads)
    summary = io.write_rows(
        ws.out / "embeddings" / "solver_summary.csv",
        ["timestep", "iterations", "converged", "residual_monotone", "final_residual",
         "initial_objective", "final_objective"],
        rows,
    )
    return [ws.embedding(t) for t in range(T)] + [ws.trace(t) for t in range(T)] + [summary]


def _load_embeddings(ws):
    return [io.read_embedding(ws.embedding(t)) for t in range(ws.timesteps())]


def stage_cluster(config: PipelineConfig) -> list:
    ws = Workspace(config)
    embs = _load_embeddings(ws)
    jobs = [(t, k, m) for t in range(len(embs)) for k in config.k_range for m in config.methods]
    fits = _map(lambda j: fit(embs[j[0]], j[1], j[2], seed=config.seed, timestep=j[0]), jobs, config.threads)
    return [io.write_assignments(ws.assignments, fits)]


def _selection(ws) -> dict:
    _, rows = io.read_rows(ws.selection, required=("key", "value"))
    return {r[0]: r[1] for r in rows}


def stage_validate(config: PipelineConfig) -> list:
    ws = Workspace(config)
    embs = _load_embeddings(ws)
    T = len(embs)
    assignments = io.read_assignments(ws.assignments)
    report = select_k(embs, config.k_range, config.methods, config.seed, assignments)
    vdir = ws.out / "validate"
    outs = [
        io.write_rows(vdir / "silhouette.csv", ["K", *config.methods], report.rows()),
        io.write_rows(
            vdir / "silhouette_by_timestep.csv",
            ["timestep", "K", "method", "silhouette"],
            ((t, k, m, report.per_timestep[(k, m)][t])
             for t in range(T) for k in config.k_range for m in config.methods),
        ),
    ]
    dunn_rows = []
    for k in config.k_range:
        for m in config.methods:
            vals = []
            for t in range(T):
                try:
                    vals.append(dunn_index(embs[t], assignments[(t, k, m)].labels))
                except ValueError:
                    vals.append(float("nan"))
            dunn_rows.append((k, m, float(np.nanmean(vals)) if not np.all(np.isnan(vals)) else float("nan")))
    outs.append(io.write_rows(vdir / "dunn.csv", ["K", "method", "mean_dunn_index"], dunn_rows))
    outs.append(plots.silhouette_chart(report, vdir / "silhouette.svg"))

    best_k = report.best_k()
    k_sel = config.k if config.k is not None else best_k
    method_stab = ""
    if config.stability:
        per_t = {}
        for t in range(T):
            net = _load_network(ws, t)
            full = {m: assignments[(t, k_sel, m)] for m in config.methods}
            per_t[t] = leave_one_column_out(net, config.solver, k_sel, config.methods, config.seed, embs[t], full)
        stab = aggregate_stability(per_t, config.methods)
        outs.append(io.write_rows(vdir / "stability.csv", ["method", *STABILITY_MEASURES], stab.rows()))
        ranking = stab.ranking()
        outs.append(io.write_rows(
            vdir / "stability_ranking.csv",
            ["measure", *[f"rank_{i + 1}" for i in range(len(config.methods))]],
            ([name, *ranking[name]] for name in STABILITY_MEASURES),
        ))
        method_stab = stab.best_method()
    if config.method is not None:
        method_sel = config.method
    elif method_stab:
        method_sel = method_stab
    else:
        method_sel = max(config.methods, key=lambda m: report.table[(k_sel, m)])
    sel = [
        ("k_best_silhouette", best_k),
        ("k_selected", k_sel),
        ("method_best_stability", method_stab),
        ("method_selected", method_sel),
    ]
    outs.append(io.write_rows(ws.selection, ["key", "value"], sel))
    return outs


def stage_archetype(config: PipelineConfig) -> list:
    ws = Workspace(config)
    T = ws.timesteps()
    sel = _selection(ws)
    k, method = int(sel["k_selected"]), sel["method_selected"]
    assignments = io.read_assignments(ws.assignments)
    aligned = align_labels([assignments[(t, k, method)] for t in range(T)])
    table = merge_archetypes(trajectories(aligned), config.min_archetype_size)
    table = fuse_similar(table, config.fuse_threshold)
    adir = ws.out / "archetypes"
    outs = [
        io.write_rows(
            adir / "aligned_assignments.csv",
            ["node_id", "timestep", "method", "K", "label"],
            ((n, a.timestep, method, k, lab) for a in aligned for n, lab in zip(a.node_ids, a.labels)),
        ),
        io.write_rows(
            ws.members,
            ["archetype_id", "signature", "node_id"],
            ((a.archetype_id, "-".join(map(str, a.signature)), n) for a in table.archetypes for n in a.members),
        ),
        io.write_rows(
            adir / "summary.csv",
            ["archetype_id", "signature", "size", "status"],
            [(a.archetype_id, "-".join(map(str, a.signature)), a.size, "retained") for a in table.archetypes]
            + [("", "-".join(map(str, a.signature)), a.size, "dropped") for a in table.dropped],
        ),
        plots.archetype_timeline(table, adir / "timeline.svg"),
    ]
    emb0 = io.read_embedding(ws.embedding(0))
    if emb0.dimension >= 2:
        outs.append(plots.projection_scatter(
            project_2d(emb0), aligned[0].labels, adir / "projection_week_0.svg", "timestep 0"
        ))
    return outs


def _load_archetypes(ws, min_size):
    _, rows = io.read_rows(ws.members, required=("archetype_id", "signature", "node_id"))
    groups: dict = {}
    for aid, sig, node in rows:
        groups.setdefault((int(aid), sig), []).append(node)
    arch = [
        Archetype(aid, tuple(int(v) for v in sig.split("-")), tuple(nodes))
        for (aid, sig), nodes in sorted(groups.items())
    ]
    return ArchetypeTable(arch, min_size)


def stage_test(config: PipelineConfig) -> list:
    ws = Workspace(config)
    T = ws.timesteps()
    tables = [io.read_attributes(ws.features(t), t) for t in range(T)]
    archetypes = _load_archetypes(ws, config.min_archetype_size)
    report = feature_difference_scan(tables, archetypes, config.alpha, config.correction)
    sdir = ws.out / "stats"
    outs = [
        io.write_rows(sdir / "kruskal.csv", ["timestep", "feature", "statistic", "df", "p_value", "significant"],
                      report.omnibus),
        io.write_rows(sdir / "nonsignificant.csv", ["timestep", "feature", "statistic", "p_value"],
                      report.nonsignificant()),
        io.write_rows(sdir / "posthoc.csv",
                      ["timestep", "feature", "archetype_a", "archetype_b", "z", "p_raw", "p_adjusted",
                       "significant"], report.posthoc),
        io.write_rows(sdir / "distinguishing.csv",
                      ["feature", "timesteps_tested", "timesteps_significant", "mean_share_pairs_significant",
                       "timesteps_all_pairs_significant"], report.distinguishing_summary()),
    ]
    if report.omnibus:
        outs.append(plots.significance_heatmap(report, list(range(T)), sdir / "significance.svg"))
    return outs


STAGE_FUNCS = {
    "features": stage_features,
    "embed": stage_embed,
    "cluster": stage_cluster,
    "validate": stage_validate,
    "archetype": stage_archetype,
    "test": stage_test,
}


def run_stage(name: str, config: PipelineConfig) -> list:
    return STAGE_FUNCS[name](config)


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Run every stage in order and write ``manifest.json`` to the output directory."""
    ws = Workspace(config)
    validate_inputs(config)
    T = ws.timesteps()
    inputs = {}
    for t in range(T):
        for name in ("attributes.csv", "edges.csv"):
            p = ws.week_dir(t) / name
            inputs[p.relative_to(ws.inp).as_posix()] = sha256_file(p)
    timings, outputs = {}, []
    for name in STAGES:
        start = time.perf_counter()
        outputs.extend(run_stage(name, config))
        timings[name] = round(time.perf_counter() - start, 3)
        logger.info("stage %s finished in %.2fs", name, timings[name])
    out_digests = {Path(p).relative_to(ws.out).as_posix(): sha256_file(p) for p in outputs}
    manifest = RunManifest(config.digest(), config.to_dict(), inputs, timings, dict(sorted(out_digests.items())))
    (ws.out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest
