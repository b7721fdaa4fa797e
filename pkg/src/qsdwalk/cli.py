"""Command line front end.

Five subcommands cover the full experiment pipeline:

``prepare``
    Clean a raw edge list and cut a working graph (flag driven).
``oracle``
    Exact reference distribution of the thinned chain by power
    iteration, written in a form the ``custom`` target can read back.
``run``
    Reinforced-walk runs with per-checkpoint metric CSVs and a
    cross-repetition aggregate.
``baseline``
    Metropolis-Hastings or degree-reweighted crawl comparison runs.
``slope``
    Log-log decay rate fitted to a column of a metrics CSV.

All but ``prepare`` and ``slope`` read an INI config; unknown sections
or keys are rejected so typos fail loudly. Config and usage problems
exit with status 2, runtime failures with 1, both as a single
``error:`` line on stderr.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import MH_VARIANTS, durw_run, mh_run
from .empirical import SCHEDULE_KINDS, WeightSchedule
from .engine import INDEGREE_MODES, MERGE_MODES, MODES, RunConfig, run
from .graph import (
    DirectedGraph,
    NodeMap,
    induced_subgraph,
    largest_scc,
    load_edge_list,
    reachable_set,
    write_edge_list,
)
from .metrics import MetricsLog, loglog_slope, nrmse
from .spectral import left_leading_eigen
from .targets import (
    TARGET_KINDS,
    SimpleRandomWalk,
    TargetSpec,
    TeleportingWalk,
    build_acceptance,
    transient_kernel,
)

WORKING_SETS = ("as-is", "lscc", "reachable")
BASELINE_METHODS = ("mh-max", "mh-neighbor", "mh-srw", "durw")

#: Allowed keys per config section. Anything else is a hard error.
_SCHEMA: dict[str, frozenset[str]] = {
    "dataset": frozenset({"path", "working_set", "seed_count"}),
    "target": frozenset({"kind", "path"}),
    "proposal": frozenset({"kind", "p_follow", "seeds_path"}),
    "schedule": frozenset({"kind", "alpha"}),
    "run": frozenset(
        {
            "steps",
            "agents",
            "mode",
            "update_probability",
            "indegree",
            "seed",
            "repetitions",
            "checkpoint_stride",
            "shared_ceiling",
            "merge",
            "start_at_seeds",
        }
    ),
    "oracle": frozenset({"tol", "max_iter", "output"}),
    "baseline": frozenset(
        {
            "method",
            "walkers",
            "steps",
            "seed",
            "jump_weight",
            "jump_cost",
            "walk_log",
            "target",
        }
    ),
    "output": frozenset({"dir"}),
}

_MISSING = object()


class ConfigError(Exception):
    """Bad configuration or usage; reported with exit status 2."""


# ---------------------------------------------------------------------------
# config plumbing


def _load_config(path: str) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cfg.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    for section in cfg.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in cfg[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
    return cfg


def _get(cfg, section: str, key: str, default=_MISSING) -> str:
    if cfg.has_option(section, key):
        return cfg.get(section, key)
    if default is _MISSING:
        raise ConfigError(f"config needs {key!r} in [{section}]")
    return default


def _get_int(cfg, section: str, key: str, default=_MISSING) -> int:
    raw = _get(cfg, section, key, default)
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}] {key} must be an integer, got {raw!r}") from None


def _get_float(cfg, section: str, key: str, default=_MISSING) -> float:
    raw = _get(cfg, section, key, default)
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}] {key} must be a number, got {raw!r}") from None


def _get_bool(cfg, section: str, key: str, default: bool) -> bool:
    if not cfg.has_option(section, key):
        return default
    try:
        return cfg.getboolean(section, key)
    except ValueError:
        raise ConfigError(
            f"[{section}] {key} must be a boolean, got {cfg.get(section, key)!r}"
        ) from None


def _get_choice(cfg, section: str, key: str, choices, default=_MISSING) -> str:
    value = _get(cfg, section, key, default)
    if value not in choices:
        raise ConfigError(
            f"[{section}] {key} must be one of {', '.join(choices)}; got {value!r}"
        )
    return value


def _existing_path(raw: str, what: str) -> Path:
    path = Path(raw)
    if not path.is_file():
        raise ConfigError(f"{what} not found: {path}")
    return path


# ---------------------------------------------------------------------------
# shared resolution steps


def _read_id_file(path: Path) -> np.ndarray:
    """One node id per line; blank lines and # comments skipped."""
    ids = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                ids.append(int(text))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: not a node id: {text!r}") from None
    if not ids:
        raise ConfigError(f"{path}: no node ids")
    return np.array(ids, dtype=np.int64)


def _read_target_csv(path: Path, n: int) -> np.ndarray:
    """Rows of ``node,probability``; must cover every node exactly once."""
    vec = np.zeros(n, dtype=np.float64)
    seen = np.zeros(n, dtype=bool)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split(",")
            try:
                node, mass = int(parts[0]), float(parts[1])
            except (IndexError, ValueError):
                raise ConfigError(
                    f"{path}:{lineno}: expected node,probability; got {text!r}"
                ) from None
            if not 0 <= node < n:
                raise ConfigError(f"{path}:{lineno}: node {node} out of range [0, {n})")
            if seen[node]:
                raise ConfigError(f"{path}:{lineno}: duplicate node {node}")
            if not mass > 0:
                raise ConfigError(f"{path}:{lineno}: probability must be positive")
            seen[node] = True
            vec[node] = mass
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise ConfigError(f"{path}: no probability for node {missing}")
    return vec / vec.sum()


def _cut_working_set(
    graph: DirectedGraph,
    node_map: NodeMap,
    working_set: str,
    seed_count: int,
    echo: bool = False,
) -> tuple[DirectedGraph, NodeMap, Optional[np.ndarray]]:
    """Reduce to the configured working graph.

    Returns the working graph, a map from its compact ids back to the
    input file's original labels, and the seed ids (working-graph
    numbering) when the working set is a reachable closure.
    """
    if echo:
        print(f"graph: {graph.n} nodes, {graph.m} edges")
    if working_set == "as-is":
        return graph, node_map, None
    scc, scc_map = largest_scc(graph)
    if echo:
        print(f"LSCC: {scc.n} nodes, {scc.m} edges")
    if working_set == "lscc":
        return scc, scc_map.compose(node_map), None
    if seed_count < 1:
        raise ConfigError("seed_count must be at least 1")
    if seed_count > scc.n:
        raise ConfigError(f"seed_count {seed_count} exceeds component size {scc.n}")
    # Seeds are the component members with the smallest ids; closures
    # and id assignments are then reproducible across machines.
    seeds_parent = np.asarray(scc_map.original[:seed_count], dtype=np.int64)
    closure = reachable_set(graph, seeds_parent)
    work, work_map = induced_subgraph(graph, closure)
    seeds = np.searchsorted(work_map.original, seeds_parent).astype(np.int64)
    if echo:
        print(f"reachable: {work.n} nodes, {work.m} edges")
        print(f"seeds: {seeds.size}")
    return work, work_map.compose(node_map), seeds


def _load_working(
    cfg,
) -> tuple[DirectedGraph, NodeMap, Optional[np.ndarray]]:
    if not cfg.has_section("dataset"):
        raise ConfigError("config needs a [dataset] section")
    path = _existing_path(_get(cfg, "dataset", "path"), "dataset file")
    working_set = _get_choice(cfg, "dataset", "working_set", WORKING_SETS, "as-is")
    seed_count = _get_int(cfg, "dataset", "seed_count", 300)
    graph, node_map = load_edge_list(path)
    return _cut_working_set(graph, node_map, working_set, seed_count)


def _resolve_target(cfg, graph: DirectedGraph) -> TargetSpec:
    kind = _get_choice(cfg, "target", "kind", TARGET_KINDS, "uniform") \
        if cfg.has_section("target") else "uniform"
    if kind == "custom":
        path = _existing_path(_get(cfg, "target", "path"), "target file")
        return TargetSpec.custom(_read_target_csv(path, graph.n))
    if cfg.has_option("target", "path"):
        raise ConfigError("[target] path only applies to kind = custom")
    return getattr(TargetSpec, kind)()


def _resolve_chain(cfg, graph, derived_seeds, target: TargetSpec):
    kind = _get_choice(cfg, "proposal", "kind", ("srw", "teleport"), "srw") \
        if cfg.has_section("proposal") else "srw"
    if kind == "srw":
        for key in ("p_follow", "seeds_path"):
            if cfg.has_option("proposal", key):
                raise ConfigError(f"[proposal] {key} only applies to kind = teleport")
        return SimpleRandomWalk(graph)
    if target.kind == "evc":
        raise ConfigError(
            "eigenvector centrality needs the plain random-walk proposal"
        )
    if cfg.has_option("proposal", "seeds_path"):
        seeds = _read_id_file(_existing_path(_get(cfg, "proposal", "seeds_path"), "seeds file"))
    elif derived_seeds is not None:
        seeds = derived_seeds
    else:
        raise ConfigError(
            "teleport proposal needs seeds: set [proposal] seeds_path or "
            "[dataset] working_set = reachable"
        )
    p_follow = _get_float(cfg, "proposal", "p_follow", 0.95)
    try:
        return TeleportingWalk(graph, seeds, p_follow)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _resolve_schedule(cfg) -> WeightSchedule:
    if not cfg.has_section("schedule"):
        return WeightSchedule.constant()
    kind = _get_choice(cfg, "schedule", "kind", SCHEDULE_KINDS, "constant")
    if kind == "polynomial":
        return WeightSchedule.polynomial(_get_float(cfg, "schedule", "alpha", 1.0))
    if cfg.has_option("schedule", "alpha"):
        raise ConfigError("[schedule] alpha only applies to kind = polynomial")
    return getattr(WeightSchedule, kind)()


def _output_dir(cfg) -> Path:
    out = Path(_get(cfg, "output", "dir", ".") if cfg.has_section("output") else ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_prepare(args) -> int:
    src = _existing_path(args.input, "input edge list")
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph, node_map = load_edge_list(src)
    work, work_map, seeds = _cut_working_set(
        graph, node_map, args.working_set, args.seed_count, echo=True
    )
    write_edge_list(graph, out / "cleaned.txt", node_map=node_map)
    write_edge_list(work, out / "working.txt")
    with open(out / "nodes.txt", "w", encoding="utf-8") as fh:
        fh.write("# compact\toriginal\n")
        for compact, original in enumerate(work_map.original):
            fh.write(f"{compact}\t{original}\n")
    names = ["cleaned.txt", "working.txt", "nodes.txt"]
    if seeds is not None:
        with open(out / "seeds.txt", "w", encoding="utf-8") as fh:
            for s in seeds:
                fh.write(f"{s}\n")
        names.append("seeds.txt")
    print(f"wrote {', '.join(names)} to {out}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = _load_config(args.config)
    graph, _, derived_seeds = _load_working(cfg)
    target = _resolve_target(cfg, graph)
    chain = _resolve_chain(cfg, graph, derived_seeds, target)
    tol = _get_float(cfg, "oracle", "tol", 1e-12) if cfg.has_section("oracle") else 1e-12
    max_iter = (
        _get_int(cfg, "oracle", "max_iter", 1_000_000)
        if cfg.has_section("oracle")
        else 1_000_000
    )
    model = build_acceptance(chain, target)
    result = left_leading_eigen(transient_kernel(model), tol=tol, max_iter=max_iter)
    if cfg.has_option("oracle", "output"):
        path = Path(_get(cfg, "oracle", "output"))
        path.parent.mkdir(parents=True, exist_ok=True)
    else:
        path = _output_dir(cfg) / "oracle.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# eigenvalue = {result.eigenvalue:.17g}\n")
        fh.write(f"# c_true = {model.c_true:.17g}\n")
        for node, mass in enumerate(result.vector.tolist()):
            fh.write(f"{node},{mass!r}\n")
    print(f"eigenvalue = {result.eigenvalue:.17g}")
    print(f"c_true = {model.c_true:.17g}")
    print(f"iterations = {result.iterations} residual = {result.residual:.3g}")
    print(f"wrote {path}")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    graph, _, derived_seeds = _load_working(cfg)
    target = _resolve_target(cfg, graph)
    chain = _resolve_chain(cfg, graph, derived_seeds, target)
    schedule = _resolve_schedule(cfg)
    if not cfg.has_section("run"):
        raise ConfigError("config needs a [run] section")
    steps = _get_int(cfg, "run", "steps")
    agents = _get_int(cfg, "run", "agents", 1)
    mode = _get_choice(cfg, "run", "mode", MODES, "static")
    update_probability = _get_float(cfg, "run", "update_probability", 0.01)
    indegree = _get_choice(cfg, "run", "indegree", INDEGREE_MODES, "exact")
    base_seed = _get_int(cfg, "run", "seed", 0)
    repetitions = _get_int(cfg, "run", "repetitions", 1)
    if repetitions < 1:
        raise ConfigError("[run] repetitions must be at least 1")
    stride = _get_int(cfg, "run", "checkpoint_stride", 0)
    if stride < 0 or stride > steps:
        raise ConfigError("[run] checkpoint_stride must lie in [0, steps]")
    checkpoints = np.arange(stride, steps + 1, stride, dtype=np.int64) if stride else None
    shared_ceiling = _get_bool(cfg, "run", "shared_ceiling", False)
    merge = _get_choice(cfg, "run", "merge", MERGE_MODES, "pool")
    start_nodes = None
    if _get_bool(cfg, "run", "start_at_seeds", False):
        seeds = chain.seeds if isinstance(chain, TeleportingWalk) else derived_seeds
        if seeds is None:
            raise ConfigError("start_at_seeds needs a seed set")
        if agents > seeds.size:
            raise ConfigError(
                f"start_at_seeds: agents ({agents}) exceed seeds ({seeds.size})"
            )
        start_nodes = np.asarray(seeds[:agents], dtype=np.int64)
    out = _output_dir(cfg)

    try:
        base = RunConfig(
            chain=chain,
            target=target,
            schedule=schedule,
            steps=steps,
            agents=agents,
            mode=mode,
            update_probability=update_probability,
            indegree_mode=indegree,
            seed=base_seed,
            checkpoints=checkpoints,
            start_nodes=start_nodes,
            shared_ceiling=shared_ceiling,
            merge=merge,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    finals = []
    tvd_rows = None
    reference = None
    for rep in range(repetitions):
        config = base if rep == 0 else replace(base, seed=base_seed + rep)
        result = run(config)
        reference = result.reference
        result.log.to_csv(out / f"run_{rep:02d}.csv")
        finals.append(result.distribution)
        col = result.log.column("tvd")
        tvd_rows = col if tvd_rows is None else tvd_rows + col
        final_tvd = col[-1]
        uniq = int(result.unique_queries)
        pct = 100.0 * uniq / graph.n
        print(f"run {rep:02d}: seed={config.seed} tvd={final_tvd:.6g} "
              f"unique={uniq} ({pct:.1f}%)")

    steps_col = base.resolved_checkpoints()
    mean_tvd = tvd_rows / repetitions
    spread = nrmse(np.stack(finals), reference) if repetitions >= 2 else float("nan")
    with open(out / "aggregate.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# reps={repetitions} base_seed={base_seed}\n")
        fh.write("step,mean_tvd,nrmse\n")
        for i, step in enumerate(steps_col.tolist()):
            tail = repr(float(spread)) if i == steps_col.size - 1 else "nan"
            fh.write(f"{step},{float(mean_tvd[i])!r},{tail}\n")
    print(f"aggregate: mean tvd = {mean_tvd[-1]:.6g}")
    if repetitions >= 2:
        print(f"nrmse = {spread:.6g}")
    print(f"wrote {out / 'aggregate.csv'}")
    return 0


def _cmd_baseline(args) -> int:
    cfg = _load_config(args.config)
    graph, _, _ = _load_working(cfg)
    if not cfg.has_section("baseline"):
        raise ConfigError("config needs a [baseline] section")
    method = _get_choice(cfg, "baseline", "method", BASELINE_METHODS)
    steps = _get_int(cfg, "baseline", "steps", 10000)
    seed = _get_int(cfg, "baseline", "seed", 0)
    out = _output_dir(cfg)

    if method == "durw":
        if cfg.has_section("target") and _get(cfg, "target", "kind", "uniform") != "uniform":
            raise ConfigError("the crawl baseline estimates only the uniform target")
        for key in ("walkers", "target"):
            if cfg.has_option("baseline", key):
                raise ConfigError(f"[baseline] {key} does not apply to durw")
        result = durw_run(
            graph,
            jump_weight=_get_float(cfg, "baseline", "jump_weight", 1.0),
            jump_cost=_get_float(cfg, "baseline", "jump_cost", 1.0),
            steps=steps,
            seed=seed,
        )
        result.log.to_csv(out / "baseline.csv")
        final = result.log.column("tvd")[-1]
        print(f"durw: tvd={final:.6g} cost={result.query_cost:.6g} "
              f"jumps={result.jumps}")
        print(f"wrote {out / 'baseline.csv'}")
        walk_log = _get(cfg, "baseline", "walk_log", None)
        if walk_log is not None:
            _write_comparison(
                out / "comparison.csv",
                result.log,
                MetricsLog.from_csv(_existing_path(walk_log, "walk log")),
            )
            print(f"wrote {out / 'comparison.csv'}")
        return 0

    if cfg.has_option("baseline", "walk_log"):
        raise ConfigError("[baseline] walk_log only applies to durw")
    for key in ("jump_weight", "jump_cost"):
        if cfg.has_option("baseline", key):
            raise ConfigError(f"[baseline] {key} only applies to durw")
    variant = {"mh-max": "max", "mh-neighbor": "neighbor", "mh-srw": "neighbor"}[method]
    if cfg.has_option("baseline", "target"):
        kind = _get_choice(cfg, "baseline", "target", ("uniform", "indegree"))
        spec = getattr(TargetSpec, kind)()
    else:
        spec = _resolve_target(cfg, graph)
    weights = spec.weights(graph)
    walkers = _get_int(cfg, "baseline", "walkers", 1)
    _, log = mh_run(
        graph,
        weights / weights.sum(),
        variant=variant,
        walkers=walkers,
        steps=steps,
        seed=seed,
    )
    log.to_csv(out / "baseline.csv")
    print(f"mh-{variant}: tvd={log.column('tvd')[-1]:.6g}")
    print(f"wrote {out / 'baseline.csv'}")
    return 0


def _write_comparison(path: Path, durw_log: MetricsLog, walk_log: MetricsLog) -> None:
    """Align walk distance to the crawl's query budgets.

    Both logs carry cumulative query cost in ``unique_queries``; the
    walk's distance curve is interpolated onto the crawl's budget
    points so each row compares equal spend. Where a budget repeats
    across checkpoints the latest (best) distance is kept.
    """
    budgets = durw_log.column("unique_queries")
    walk_b = walk_log.column("unique_queries")
    walk_tvd = walk_log.column("tvd")
    # np.unique keeps first occurrences; reverse so "first" means the
    # final checkpoint at each distinct budget.
    uniq, first = np.unique(walk_b[::-1], return_index=True)
    best = walk_tvd[::-1][first]
    aligned = np.interp(budgets, uniq, best)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("budget,durw_tvd,walk_tvd\n")
        for b, d, w in zip(
            budgets.tolist(), durw_log.column("tvd").tolist(), aligned.tolist()
        ):
            fh.write(f"{b!r},{d!r},{w!r}\n")


def _read_csv_columns(path: Path) -> dict[str, np.ndarray]:
    """Generic numeric CSV with a header row and # comment lines."""
    with open(path, encoding="utf-8") as fh:
        header = None
        rows = []
        for line in fh:
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if header is None:
                header = text.split(",")
                continue
            rows.append([float(v) for v in text.split(",")])
    if header is None or not rows:
        raise ConfigError(f"{path}: no data rows")
    table = np.array(rows, dtype=np.float64)
    return {name: table[:, i] for i, name in enumerate(header)}


def _cmd_slope(args) -> int:
    columns = _read_csv_columns(_existing_path(args.csv, "metrics file"))
    if "step" not in columns:
        raise ConfigError(f"{args.csv}: no step column")
    if args.column not in columns:
        raise ConfigError(
            f"{args.csv}: no column {args.column!r} (has {', '.join(columns)})"
        )
    value = loglog_slope(
        columns["step"], columns[args.column], tail_fraction=args.tail_fraction
    )
    print(f"slope = {value:.6f}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsdwalk",
        description="Directed-graph sampling via reinforced random walks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="clean an edge list and cut a working graph")
    p.add_argument("--input", required=True, help="raw edge list (.txt or .txt.gz)")
    p.add_argument("--output-dir", required=True, help="directory for prepared files")
    p.add_argument(
        "--working-set",
        choices=WORKING_SETS,
        default="as-is",
        help="graph cut to work on (default: as-is)",
    )
    p.add_argument(
        "--seed-count",
        type=int,
        default=300,
        help="seeds for the reachable closure (default: 300)",
    )
    p.set_defaults(handler=_cmd_prepare)

    p = sub.add_parser("oracle", help="exact reference distribution by power iteration")
    p.add_argument("config", help="INI experiment config")
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("run", help="reinforced-walk sampling runs")
    p.add_argument("config", help="INI experiment config")
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("baseline", help="Metropolis-Hastings or crawl baselines")
    p.add_argument("config", help="INI experiment config")
    p.set_defaults(handler=_cmd_baseline)

    p = sub.add_parser("slope", help="log-log decay rate of a metrics column")
    p.add_argument("csv", help="metrics CSV with a step column")
    p.add_argument("--column", default="tvd", help="column to fit (default: tvd)")
    p.add_argument(
        "--tail-fraction",
        type=float,
        default=0.5,
        help="trailing fraction of rows to fit (default: 0.5)",
    )
    p.set_defaults(handler=_cmd_slope)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # single reporting point for runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
