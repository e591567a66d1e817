"""Command-line entry point: ``covopt {discover,covertime,learn,study,draw}``.

Each command reads an :class:`ExperimentConfig` (``--config``), computes
everything in memory and only then writes its outputs into ``--out``.
Shipped layouts are looked up in ``$COVOPT_DATA_DIR`` before the package's
own data directory.

Exit codes: 0 success, 2 configuration error, 3 layout error, 4 numerical or
graph error, 5 output error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..agent import (curves_to_csv, discover_options, offline_sampled_discovery,
                     option_count_sweep, run_method)
from ..cover_time import STUDY_COLUMNS, RandomWalk, correlation_study, estimate_cover_time
from ..envs import hanoi, load_grid, make_domain, race_track
from ..envs.grid import DATA_ENV
from ..exceptions import ConfigError, CovoptError, MalformedMap
from ..graph import graph_from_mdp, read_edge_list
from ..options import LOG_COLUMNS, discover
from ..spectral import algebraic_connectivity, spectral_drawing
from . import svg
from .config import ExperimentConfig

EXIT_OK, EXIT_CONFIG, EXIT_LAYOUT, EXIT_MATH, EXIT_IO = 0, 2, 3, 4, 5

COVERTIME_COLUMNS = (
    "method", "num_options", "laplacian", "lambda2", "lambda2_normalized",
    "lambda2_combinatorial", "cover_time", "cover_time_stderr", "metric",
    "cover_time_hitting", "cover_time_hitting_stderr", "cover_time_max",
    "cover_time_max_stderr", "cover_time_mean", "cover_time_mean_stderr",
    "trajectories_per_start", "seed",
)

log = logging.getLogger("covopt")


# -- loading ---------------------------------------------------------------


def load_domain(cfg: ExperimentConfig):
    """Return ``(mdp, graph)``; ``mdp`` is ``None`` for edge-list domains."""
    d = cfg.domain
    layout = cfg.resolve_layout()
    try:
        if d.name == "graph":
            return None, read_edge_list(layout)
        if d.name == "grid":
            mdp = load_grid(layout)
        elif d.name == "hanoi":
            mdp = hanoi(d.discs, gamma=cfg.learning.gamma)
        elif d.name == "race_track":
            mdp = race_track(layout or "race_track", v_max=d.v_max, gamma=cfg.learning.gamma)
        else:
            mdp = make_domain(d.name, layout)
    except FileNotFoundError as exc:
        raise MalformedMap(f"layout file not found: {exc.filename}") from None
    return mdp, graph_from_mdp(mdp)


def _options_for(cfg, mdp, g, method, seed):
    disc = cfg.discovery
    k = disc.options
    if method == "none":
        return None
    if mdp is None:
        return discover(method, g, k, None, laplacian=disc.laplacian)
    if disc.protocol == "offline-sampled":
        return offline_sampled_discovery(mdp, method, disc.trajectories, disc.steps_per_traj, k,
                                         seed, disc.laplacian)
    return discover_options(mdp, method, k, disc.laplacian, full_initiation=disc.full_initiation)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else _cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# -- commands ----------------------------------------------------------------


def cmd_discover(cfg: ExperimentConfig, plot: bool = False) -> dict:
    """OptionSet file and discovery log per method."""
    mdp, g = load_domain(cfg)
    out = {}
    for method in cfg.discovery.methods:
        if method == "none":
            continue
        opts = _options_for(cfg, mdp, g, method, cfg.seed)
        out[f"options_{method}.txt"] = opts.to_text()
        out[f"discovery_log_{method}.csv"] = _csv(LOG_COLUMNS, opts.discovery_log)
    return out


def cmd_covertime(cfg: ExperimentConfig, plot: bool = False) -> dict:
    """One row per method: lambda2 and the estimated cover time."""
    mdp, g = load_domain(cfg)
    ct = cfg.covertime
    rows = []
    for method in cfg.discovery.methods:
        opts = _options_for(cfg, mdp, g, method, cfg.seed)
        options = [] if opts is None else list(opts.options)
        aug = g.with_edges([(o.initiation, o.termination) for o in options])
        if mdp is None:
            walk = RandomWalk.from_graph(aug)
        else:
            walk = RandomWalk.from_mdp(mdp, options)
        est = estimate_cover_time(walk, ct.trajectories_per_start, seed=cfg.seed)
        lam = {k: algebraic_connectivity(aug, k) for k in ("normalized", "combinatorial")}
        stats = {
            "hitting": (est.hitting_cover_time, est.hitting_cover_time_stderr),
            "max": (est.max_over_starts, est.max_over_starts_stderr),
            "mean": (est.mean_over_starts, est.mean_over_starts_stderr),
        }
        rows.append({
            "method": method, "num_options": len(options), "laplacian": cfg.discovery.laplacian,
            "lambda2": lam[cfg.discovery.laplacian], "lambda2_normalized": lam["normalized"],
            "lambda2_combinatorial": lam["combinatorial"],
            "cover_time": stats[ct.metric][0], "cover_time_stderr": stats[ct.metric][1],
            "metric": ct.metric,
            "cover_time_hitting": stats["hitting"][0], "cover_time_hitting_stderr": stats["hitting"][1],
            "cover_time_max": stats["max"][0], "cover_time_max_stderr": stats["max"][1],
            "cover_time_mean": stats["mean"][0], "cover_time_mean_stderr": stats["mean"][1],
            "trajectories_per_start": ct.trajectories_per_start, "seed": cfg.seed,
        })
    return {"covertime.csv": _csv(COVERTIME_COLUMNS, rows)}


def cmd_learn(cfg: ExperimentConfig, plot: bool = False) -> dict:
    """Learning curves of every configured method, optionally plotted."""
    mdp, _ = load_domain(cfg)
    if mdp is None:
        raise ConfigError("learning needs an MDP domain, not a bare graph")
    lr, disc = cfg.learning, cfg.discovery
    kwargs = dict(runs=lr.runs, episodes=lr.episodes, max_steps=lr.max_steps, alpha=lr.alpha,
                  gamma=lr.gamma, epsilon=lr.epsilon, seed=cfg.seed, laplacian=disc.laplacian,
                  protocol=disc.protocol, trajectories=disc.trajectories,
                  steps_per_traj=disc.steps_per_traj, interval_steps=lr.interval_steps,
                  full_initiation=disc.full_initiation, batch=lr.batch)
    if disc.option_counts:
        sweep = option_count_sweep(mdp, disc.option_counts, disc.methods[0], **kwargs)
        curves = list(sweep.values())
    else:
        curves = []
        for method in disc.methods:
            k = lr.max_options if disc.protocol == "online" else disc.options
            curves.append(run_method(mdp, method, k, **kwargs))
    out = {"learning_curves.csv": curves_to_csv(curves)}
    if plot:
        episodes = np.arange(1, lr.episodes + 1)
        series = {c.method: (episodes, c.mean_cumulative) for c in curves}
        bands = None
        if lr.runs > 1:
            bands = {c.method: (c.cumulative.min(axis=0), c.cumulative.max(axis=0)) for c in curves}
        out["learning_curves.svg"] = svg.line_plot(
            series, f"{cfg.domain.name}: cumulative reward", "episode", "cumulative reward", bands)
    return out


def cmd_study(cfg: ExperimentConfig, plot: bool = False) -> dict:
    """Random-graph study of connectivity, cover time and random-policy cost."""
    st = cfg.study
    rows, summary = correlation_study(st.num_graphs, st.n, st.density, st.trajectories, cfg.seed)
    out = {"study.csv": _csv(STUDY_COLUMNS, rows),
           "study_summary.json": json.dumps(summary, indent=2, sort_keys=True) + "\n"}
    if plot:
        out["study_lambda2.svg"] = svg.scatter_plot(
            [r["lambda2_combinatorial"] for r in rows], [r["cover_time_max"] for r in rows],
            "algebraic connectivity vs cover time", "lambda2 (combinatorial)", "expected cover time")
        out["study_cost.svg"] = svg.scatter_plot(
            [r["cover_time_max"] for r in rows], [r["random_policy_cost"] for r in rows],
            "cover time vs random-policy cost", "expected cover time", "random-policy cost")
    return out


def cmd_draw(cfg: ExperimentConfig, plot: bool = True) -> dict:
    """Spectral drawing coordinates, with covering-option edges highlighted."""
    mdp, g = load_domain(cfg)
    g.require_connected()
    coords = spectral_drawing(g, cfg.discovery.laplacian)
    highlight = []
    if "covering" in cfg.discovery.methods and cfg.discovery.options:
        opts = discover("covering", g, cfg.discovery.options, None, laplacian=cfg.discovery.laplacian)
        highlight = opts.edges
    rows = [{"node": u, "label": str(mdp.label(u)) if mdp is not None else str(u),
             "x": float(coords[u, 0]), "y": float(coords[u, 1])} for u in range(g.n)]
    return {
        "drawing.csv": _csv(("node", "label", "x", "y"), rows),
        "drawing_edges.csv": _csv(("u", "v", "kind"),
                                  [{"u": u, "v": v, "kind": "graph"} for u, v in g.sorted_edges()]
                                  + [{"u": u, "v": v, "kind": "option"} for u, v in highlight]),
        "drawing.svg": svg.graph_drawing(coords, g.sorted_edges(), highlight,
                                         f"{cfg.domain.name}: spectral drawing"),
    }


COMMANDS = {"discover": cmd_discover, "covertime": cmd_covertime, "learn": cmd_learn,
            "study": cmd_study, "draw": cmd_draw}


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="covopt",
        description="Covering-option discovery, cover-time estimation and learning experiments.",
        epilog=f"Layout names are resolved in ${DATA_ENV} before the shipped data directory.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        sp.add_argument("--config", metavar="PATH", help="YAML experiment config")
        sp.add_argument("--seed", type=int, metavar="N", help="override the master seed")
        sp.add_argument("--out", metavar="DIR", help="override the output directory")
        sp.add_argument("--plot", action="store_true", help="also write SVG plots")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def run(command: str, cfg: ExperimentConfig, plot: bool = False) -> list[Path]:
    """Run a command and write its outputs; returns the written paths."""
    outputs = COMMANDS[command](cfg, plot)
    out_dir = Path(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in outputs.items():
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.output = args.out
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = run(args.command, cfg, plot=args.plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MalformedMap as exc:
        print(f"layout error: {exc}", file=sys.stderr)
        return EXIT_LAYOUT
    except CovoptError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
