"""Command-line interface covering the full pipeline.

Subcommands: gen, samples, decode, plan, eval-plan, eval-rg, eval-det,
aggregate, ablate-k, mixture, blockage. All randomness sits behind --seed;
every subcommand is byte-reproducible given fixed inputs and seed. A JSON
config file (--config) supplies defaults; explicit flags win.

Exit codes: 0 success, 1 evaluation/data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .aggregation import CandidateSet, kmeans_representatives, median_trajectory, sampling_ablation
from .codec import (
    RoadgraphCodecConfig,
    decode_boxes,
    decode_roadgraph,
    decode_trajectory,
)
from .errors import DriveTextError, ParseError
from .geometry import Trajectory
from .mixture import empirical_ratios, plan as mixture_plan, sample_stream
from .perception import DEFAULT_ROI, LetConfig, Rect, detection_pr, lane_pr, raster_pr
from .planning import NUSCENES_HORIZONS, WOMD_HORIZONS, planning_report
from .synth import (
    BlockageConfig,
    GeneratorConfig,
    ScenarioLog,
    blockage_label,
    constant_velocity_planner,
    gen_scenario,
    noisy_candidate_set,
)
from .tasks import (
    TaskKind,
    TaskSample,
    build_blockage_sample,
    build_detection_sample,
    build_planning_sample,
    build_roadgraph_sample,
    split_cot_target,
)

# ---------------------------------------------------------------------------
# small IO and coercion helpers
# ---------------------------------------------------------------------------


def _open_in(path: str):
    return sys.stdin if path == "-" else open(path, "r", encoding="utf-8")


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", encoding="utf-8")


def read_jsonl(path: str) -> list[dict]:
    out = []
    with _open_in(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{ln}: malformed JSON: {exc.msg}") from None
    return out


def write_jsonl(path: str, records) -> None:
    with _open_out(path) as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _int_list(v) -> list[int]:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    return [int(x) for x in str(v).split(",") if x.strip()]


def _float_list(v) -> list[float]:
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).split(",") if x.strip()]


def _str_list(v) -> list[str]:
    if isinstance(v, (list, tuple)):
        return [str(x) for x in v]
    return [x.strip() for x in str(v).split(",") if x.strip()]


def _traj_from_record(rec: dict) -> Trajectory:
    return Trajectory.from_xy(rec["dt"], rec["points"])


def _pair_by_id(pred_recs, gt_recs, what: str):
    preds = {r["scenario_id"]: r for r in pred_recs}
    gts = {r["scenario_id"]: r for r in gt_recs}
    missing = sorted(set(gts) ^ set(preds))
    if missing:
        raise ParseError(f"{what}: ids not present on both sides: {', '.join(missing[:5])}")
    return [(preds[k], gts[k]) for k in sorted(preds)]


def _pr_table(rows: dict) -> str:
    header = f"{'metric':<14}{'precision':>10}{'recall':>10}{'f1':>10}{'tp':>6}{'fp':>6}{'fn':>6}"
    lines = [header]
    for name, r in rows.items():
        lines.append(
            f"{name:<14}{r.precision:>10.4f}{r.recall:>10.4f}{r.f1:>10.4f}"
            f"{r.tp:>6d}{r.fp:>6d}{r.fn:>6d}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = GeneratorConfig.preset(args.preset)
    overrides = {}
    if args.agents is not None:
        lo, hi = _int_list(args.agents)
        overrides["agent_count_range"] = (lo, hi)
    if args.lane_counts is not None:
        lo, hi = _int_list(args.lane_counts)
        overrides["lane_count_range"] = (lo, hi)
    if args.speeds is not None:
        lo, hi = _float_list(args.speeds)
        overrides["speed_range"] = (lo, hi)
    if args.maneuvers is not None:
        overrides["maneuvers"] = tuple(_str_list(args.maneuvers))
    if args.profiles is not None:
        overrides["speed_profiles"] = tuple(_str_list(args.profiles))
    if args.blockage_rate is not None:
        overrides["blockage_rate"] = args.blockage_rate
    if args.history_steps is not None:
        overrides["history_steps"] = args.history_steps
    if args.future_steps is not None:
        overrides["future_steps"] = args.future_steps
    if overrides:
        cfg = replace(cfg, **overrides)
    records = (gen_scenario(cfg, args.seed + i).to_json_dict() for i in range(args.count))
    write_jsonl(args.output, records)
    return 0


_SAMPLE_TASKS = ("planning", "planning_cot", "detection", "roadgraph", "blockage", "all")


def _samples_for(scenario: ScenarioLog, task: str, args, index: int) -> list[TaskSample]:
    rg_cfg = RoadgraphCodecConfig()
    out = []
    if task in ("planning", "all"):
        out.append(build_planning_sample(scenario))
    if task in ("planning_cot", "all"):
        out.append(
            build_planning_sample(
                scenario, with_rationale=True, rationale_first=not args.waypoints_first
            )
        )
    if task in ("detection", "all"):
        out.append(build_detection_sample(scenario))
    if task in ("roadgraph", "all"):
        out.append(
            build_roadgraph_sample(
                scenario, rg_cfg, seed=args.seed + index, training_mode=args.train_mode
            )
        )
    if task in ("blockage", "all"):
        out.append(build_blockage_sample(scenario))
    return out


def cmd_samples(args) -> int:
    task = args.task
    if task == "planning" and args.cot:
        task = "planning_cot"
    records = []
    for i, rec in enumerate(read_jsonl(args.input)):
        scenario = ScenarioLog.from_json_dict(rec)
        for sample in _samples_for(scenario, task, args, i):
            d = sample.to_json_dict()
            records.append(d)
    write_jsonl(args.output, records)
    return 0


def _decode_record(rec: dict, dt: float, rationale_first: bool) -> dict:
    kind = TaskKind(rec["kind"])
    target = rec["target"]
    out: dict = {"scenario_id": rec["scenario_id"], "kind": kind.value}
    if kind is TaskKind.PLANNING:
        t = decode_trajectory(target, dt)
        out.update(dt=dt, points=t.coords())
    elif kind is TaskKind.PLANNING_COT:
        rationale_text, traj_text = split_cot_target(target, rationale_first)
        sections = rationale_text.split("\n")
        if len(sections) != 4:
            raise ParseError(f"rationale must have 4 sections, got {len(sections)}")
        t = decode_trajectory(traj_text, dt)
        out.update(dt=dt, points=t.coords(), rationale_sections=sections)
    elif kind is TaskKind.DETECTION_3D:
        out["boxes"] = [b.to_json_dict() for b in decode_boxes(target)]
    elif kind is TaskKind.ROADGRAPH:
        rg = decode_roadgraph(target)
        out["polylines"] = [pl.coords() for pl in rg.polylines]
    elif kind is TaskKind.BLOCKAGE:
        if target not in ("yes", "no"):
            raise ParseError(f"blockage target must be yes/no, got {target!r}")
        out["blocked"] = target == "yes"
    return out


_TASK_TO_KIND = {
    "planning": TaskKind.PLANNING.value,
    "planning_cot": TaskKind.PLANNING_COT.value,
    "detection": TaskKind.DETECTION_3D.value,
    "roadgraph": TaskKind.ROADGRAPH.value,
    "blockage": TaskKind.BLOCKAGE.value,
}


def cmd_decode(args) -> int:
    want = None if args.task in (None, "all") else _TASK_TO_KIND[args.task]
    records = []
    for rec in read_jsonl(args.input):
        kind = rec.get("kind")
        if want is not None and kind != want:
            continue
        records.append(_decode_record(rec, args.dt, not args.waypoints_first))
    write_jsonl(args.output, records)
    return 0


def cmd_plan(args) -> int:
    records = []
    for i, rec in enumerate(read_jsonl(args.input)):
        scenario = ScenarioLog.from_json_dict(rec)
        if args.planner == "cv":
            pred = constant_velocity_planner(scenario.ego_history, len(scenario.ego_future))
            records.append(
                {"scenario_id": scenario.id, "dt": pred.dt, "points": pred.coords()}
            )
        else:  # noisy-oracle
            cs = noisy_candidate_set(
                scenario.ego_future, args.candidates, args.sigma, args.seed + i * 100003
            )
            records.append(
                {
                    "scenario_id": scenario.id,
                    "dt": scenario.ego_future.dt,
                    "candidates": [c.coords() for c in cs.candidates],
                }
            )
    write_jsonl(args.output, records)
    return 0


def cmd_eval_plan(args) -> int:
    if args.preset == "nuscenes":
        ade_h = l2_h = NUSCENES_HORIZONS
    else:
        ade_h = l2_h = WOMD_HORIZONS
    if args.ade_horizons is not None:
        ade_h = tuple(_float_list(args.ade_horizons))
    if args.l2_horizons is not None:
        l2_h = tuple(_float_list(args.l2_horizons))
    pairs = [
        (_traj_from_record(p), _traj_from_record(g))
        for p, g in _pair_by_id(read_jsonl(args.preds), read_jsonl(args.gts), "eval-plan")
    ]
    report = planning_report(pairs, ade_h, l2_h)
    payload = report.to_json_dict()
    print(_dump_json(payload) if args.json else report.to_table())
    if args.output:
        with _open_out(args.output) as fh:
            fh.write(_dump_json(payload) + "\n")
    if args.fig:
        from .report import save_planning_figure

        save_planning_figure(report, args.fig)
    return 0


def _roadgraph_from_record(rec: dict):
    from .codec import RoadGraph
    from .geometry import Polyline

    return RoadGraph(tuple(Polyline.from_xy(pl) for pl in rec["polylines"]))


def cmd_eval_rg(args) -> int:
    roi = Rect(*_float_list(args.roi)) if args.roi is not None else DEFAULT_ROI
    lane_tp = lane_fp = lane_fn = 0
    cell_tp = cell_fp = cell_fn = 0
    for p_rec, g_rec in _pair_by_id(read_jsonl(args.preds), read_jsonl(args.gts), "eval-rg"):
        preds = _roadgraph_from_record(p_rec)
        gts = _roadgraph_from_record(g_rec)
        lr = lane_pr(preds, gts, args.threshold)
        lane_tp += lr.tp
        lane_fp += lr.fp
        lane_fn += lr.fn
        rr = raster_pr(preds, gts, roi, args.resolution)
        cell_tp += rr.tp
        cell_fp += rr.fp
        cell_fn += rr.fn
    from .perception import PRReport

    rows = {
        "lane-level": PRReport.from_counts(lane_tp, lane_fp, lane_fn),
        "pixel-level": PRReport.from_counts(cell_tp, cell_fp, cell_fn),
    }
    payload = {name: r.to_json_dict() for name, r in rows.items()}
    print(_dump_json(payload) if args.json else _pr_table(rows))
    if args.output:
        with _open_out(args.output) as fh:
            fh.write(_dump_json(payload) + "\n")
    if args.fig:
        from .report import save_pr_figure

        save_pr_figure(rows, args.fig)
    return 0


def cmd_eval_det(args) -> int:
    cfg = LetConfig(
        longitudinal_tolerance_pct=args.let_pct,
        min_longitudinal_tolerance=args.let_min,
        lateral_tolerance=args.lat_tol,
    )
    tp = fp = fn = 0
    for p_rec, g_rec in _pair_by_id(read_jsonl(args.preds), read_jsonl(args.gts), "eval-det"):
        preds = [_box_from(b) for b in p_rec["boxes"]]
        gts = [_box_from(b) for b in g_rec["boxes"]]
        r = detection_pr(preds, gts, cfg)
        tp += r.tp
        fp += r.fp
        fn += r.fn
    from .perception import PRReport

    rows = {"detection": PRReport.from_counts(tp, fp, fn)}
    payload = {name: r.to_json_dict() for name, r in rows.items()}
    print(_dump_json(payload) if args.json else _pr_table(rows))
    if args.output:
        with _open_out(args.output) as fh:
            fh.write(_dump_json(payload) + "\n")
    if args.fig:
        from .report import save_pr_figure

        save_pr_figure(rows, args.fig)
    return 0


def _box_from(d: dict):
    from .codec import Box3D

    return Box3D.from_json_dict(d)


def cmd_aggregate(args) -> int:
    records = []
    for rec in read_jsonl(args.input):
        cs = CandidateSet(
            tuple(Trajectory.from_xy(rec["dt"], c) for c in rec["candidates"])
        )
        if args.method == "median":
            idx, traj = median_trajectory(cs)
            records.append(
                {
                    "scenario_id": rec["scenario_id"],
                    "dt": rec["dt"],
                    "index": idx,
                    "points": traj.coords(),
                }
            )
        else:  # kmeans
            reps = kmeans_representatives(cs, args.k, seed=args.seed)
            records.append(
                {
                    "scenario_id": rec["scenario_id"],
                    "dt": rec["dt"],
                    "representatives": [
                        {"points": t.coords(), "probability": p} for t, p in reps
                    ],
                }
            )
    write_jsonl(args.output, records)
    return 0


def cmd_ablate_k(args) -> int:
    ks = _int_list(args.ks)
    sets = []
    gts = []
    for i, rec in enumerate(read_jsonl(args.input)):
        scenario = ScenarioLog.from_json_dict(rec)
        gts.append(scenario.ego_future)
        sets.append(
            noisy_candidate_set(
                scenario.ego_future, args.candidates, args.sigma, args.seed + i * 100003
            )
        )
    curve = sampling_ablation(sets, gts, ks)
    lines = ["k,ade"] + [f"{k},{curve[k]:.6f}" for k in sorted(curve)]
    csv_text = "\n".join(lines) + "\n"
    if args.output:
        with _open_out(args.output) as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    from .report import sparkline

    ordered = [curve[k] for k in sorted(curve)]
    print(f"ADE by k: {sparkline(ordered)}  (k={min(curve)}..{max(curve)})")
    if args.fig:
        from .report import save_ablation_figure

        save_ablation_figure(curve, args.fig)
    return 0


def cmd_mixture(args) -> int:
    p = mixture_plan(_int_list(args.sizes), args.epochs)
    draws = list(sample_stream(p, args.seed))
    audit_n = min(args.draws, len(draws)) if args.draws else len(draws)
    payload = p.to_json_dict()
    if audit_n > 0:
        payload["audit"] = {
            "draws": audit_n,
            "empirical": empirical_ratios(draws[:audit_n], len(p.sizes)),
            "seed": args.seed,
        }
    print(_dump_json(payload))
    return 0


def cmd_blockage(args) -> int:
    cfg = BlockageConfig(
        lookahead=args.lookahead,
        coverage_fraction=args.coverage,
        stationary_speed=args.stationary_speed,
    )
    records = []
    for rec in read_jsonl(args.input):
        scenario = ScenarioLog.from_json_dict(rec)
        records.append(
            {"scenario_id": scenario.id, "blocked": blockage_label(scenario, cfg)}
        )
    write_jsonl(args.output, records)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="drivetext", description="task-as-text driving toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    submap = {}

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--config", default=None, help="JSON file with flag defaults")
        submap[name] = p
        return p

    p = add("gen", cmd_gen, help="generate synthetic scenarios as JSON lines")
    p.add_argument("-n", "--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=("womd", "nuscenes"), default="womd")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--agents", default=None, help="min,max agent count")
    p.add_argument("--lane-counts", default=None, help="min,max lane count")
    p.add_argument("--speeds", default=None, help="min,max ego speed (m/s)")
    p.add_argument("--maneuvers", default=None, help="comma list of maneuvers")
    p.add_argument("--profiles", default=None, help="comma list of speed profiles")
    p.add_argument("--blockage-rate", type=float, default=None)
    p.add_argument("--history-steps", type=int, default=None)
    p.add_argument("--future-steps", type=int, default=None)

    p = add("samples", cmd_samples, help="scenarios to (prompt, target) task samples")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--task", choices=_SAMPLE_TASKS, default="planning")
    p.add_argument("--cot", action="store_true", help="planning with rationale target")
    p.add_argument("--train-mode", action="store_true", help="shuffle roadgraph bins")
    p.add_argument("--waypoints-first", action="store_true",
                   help="emit the trajectory before the rationale in CoT targets")
    p.add_argument("--seed", type=int, default=0)

    p = add("decode", cmd_decode, help="decode task-sample targets back to JSON")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--task", choices=_SAMPLE_TASKS, default=None)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--waypoints-first", action="store_true")

    p = add("plan", cmd_plan, help="run a baseline planner over scenarios")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--planner", choices=("cv", "noisy-oracle"), default="cv")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--candidates", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)

    p = add("eval-plan", cmd_eval_plan, help="ADE / L2 planning report")
    p.add_argument("--preds", required=True)
    p.add_argument("--gts", required=True)
    p.add_argument("--preset", choices=("womd", "nuscenes"), default="womd")
    p.add_argument("--ade-horizons", default=None, help="comma list of seconds")
    p.add_argument("--l2-horizons", default=None, help="comma list of seconds")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default=None, help="also write the JSON report here")
    p.add_argument("--fig", default=None, help="write a matplotlib figure here")

    p = add("eval-rg", cmd_eval_rg, help="lane-level and pixel-level roadgraph PR")
    p.add_argument("--preds", required=True)
    p.add_argument("--gts", required=True)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--roi", default=None, help="xmin,ymin,xmax,ymax")
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--fig", default=None)

    p = add("eval-det", cmd_eval_det, help="detection PR with LET-style matching")
    p.add_argument("--preds", required=True)
    p.add_argument("--gts", required=True)
    p.add_argument("--let-pct", type=float, default=0.10)
    p.add_argument("--let-min", type=float, default=0.5)
    p.add_argument("--lat-tol", type=float, default=1.0)
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--fig", default=None)

    p = add("aggregate", cmd_aggregate, help="reduce candidate sets to final trajectories")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--method", choices=("median", "kmeans"), default="median")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)

    p = add("ablate-k", cmd_ablate_k, help="ADE vs sample count ablation curve (CSV)")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--candidates", type=int, default=24)
    p.add_argument("--ks", default="1,2,4,6,8,12,16,20,24")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fig", default=None)

    p = add("mixture", cmd_mixture, help="mixture plan and frequency audit as JSON")
    p.add_argument("--sizes", required=True, help="comma list of dataset sizes")
    p.add_argument("--epochs", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=None,
                   help="audit only the first N draws (default: whole stream)")

    p = add("blockage", cmd_blockage, help="temporary-blockage labels for scenarios")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--lookahead", type=float, default=40.0)
    p.add_argument("--coverage", type=float, default=0.6)
    p.add_argument("--stationary-speed", type=float, default=0.2)

    return parser, submap


def main(argv=None) -> int:
    parser, submap = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return 1
        valid = {a.dest for a in submap[args.command]._actions}
        unknown = set(cfg) - valid
        if unknown:
            parser.error(f"unknown config keys for {args.command}: {', '.join(sorted(unknown))}")
        submap[args.command].set_defaults(**cfg)
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DriveTextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
