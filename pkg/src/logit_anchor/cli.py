"""Command-line interface.

Subcommands: simulate, evaluate, sweep, bench, ablate. All file outputs are
deterministic for a fixed configuration: reports are JSON with sorted keys
(plus CSV mirrors), traces are JSONL, and nothing timestamped or
machine-specific is ever written, so repeated invocations produce identical
bytes regardless of --jobs.

Exit codes: 0 success, 2 configuration error, 3 input-data error,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from itertools import product
from pathlib import Path

from .bench import CostModel, run_bench
from .config import (
    DEFAULT_BIN_WIDTH,
    build_run_config,
    env_seed_override,
    load_json_file,
    parse_seed_list,
    parse_strategies,
    resolve_scene,
)
from .data import load_captions_jsonl
from .errors import ConfigError, ContractError, ExclusionError, InputError, LogitAnchorError
from .metrics import (
    Annotation,
    ObjectLexicon,
    TraceLexicon,
    article_stats,
    corpus_metrics,
    entropy_stats,
    hal_noun_rate,
    positional_curves,
    read_trace,
    sentence_initial_stats,
    simulated_corpus,
    write_trace,
)
from .runner import run_many
from .simulator import scene_from_dict, scene_to_dict
from .strategies import FlbConfig, Strategy, parse_strategy
from .weighting import WeightSchedule

REPORT_COLUMNS = (
    "strategy", "chair_i", "chair_s", "cover", "cog", "recall", "object_score",
    "hal_noun_rate", "sentence_initial_the", "provider_calls_per_token", "tokens",
)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _formats(args) -> set[str]:
    return {args.format} if args.format else {"csv", "json"}


def sanitize_label(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._,()=-]", "_", label)


def _trace_report(stats_by_label, lexicon, scene, bin_width):
    """The per-strategy report block shared by simulate and evaluate --traces."""
    strategies = {}
    curves = {}
    for label, runs in stats_by_label.items():
        captions, annotations, identity = simulated_corpus(
            runs, lexicon, scene.gt_objects, scene.cognition_objects
        )
        corpus = corpus_metrics(captions, annotations, identity)
        tokens = sum(len(run.steps) for run in runs)
        calls = sum(step.provider_calls for run in runs for step in run.steps)
        initial = sentence_initial_stats(runs)
        strategies[label] = {
            "corpus": corpus.to_dict(),
            "traces": {
                "tokens": tokens,
                "provider_calls_per_token": calls / tokens if tokens else 0.0,
                "hal_noun_rate": hal_noun_rate(runs, lexicon),
                "sentence_initial_the": {
                    "fraction": initial.the_fraction,
                    "count": initial.the_count,
                    "runs": initial.n_runs,
                },
                "entropy": {
                    name: {"mean": cell.mean_entropy, "count": cell.count}
                    for name, cell in entropy_stats(runs, lexicon).items()
                },
                "article": article_stats(runs, lexicon).to_dict(),
            },
        }
        curves[label] = [
            {"lo": b.lo, "hi": b.hi, "gt_mass": b.gt_mass,
             "hal_mass": b.hal_mass, "slots": b.slots}
            for b in positional_curves(runs, lexicon, bin_width)
        ]
    return {"strategies": strategies, "curves": curves}


def _report_rows(report):
    rows = []
    for label, block in report["strategies"].items():
        corpus = block["corpus"]
        traces = block["traces"]
        rows.append([
            label,
            corpus["chair_i"], corpus["chair_s"], corpus["cover"],
            corpus["cog"], corpus["recall"], corpus["object_score"],
            traces["hal_noun_rate"],
            traces["sentence_initial_the"]["fraction"],
            traces["provider_calls_per_token"],
            traces["tokens"],
        ])
    rows.sort(key=lambda row: row[0])
    return rows


def _curve_rows(report):
    rows = []
    for label in sorted(report["curves"]):
        for b in report["curves"][label]:
            rows.append([label, b["lo"], b["hi"], b["gt_mass"], b["hal_mass"], b["slots"]])
    return rows


def _write_trace_report(out: Path, report, formats) -> None:
    if "json" in formats:
        _write_json(out / "report.json", report)
    if "csv" in formats:
        _write_csv(out / "report.csv", REPORT_COLUMNS, _report_rows(report))
        _write_csv(
            out / "curves.csv",
            ("strategy", "lo", "hi", "gt_mass", "hal_mass", "slots"),
            _curve_rows(report),
        )


def _print_strategy_summary(report) -> None:
    for row in _report_rows(report):
        label, chair, _, cover_value, _, _, score, rate = row[:8]
        print(
            f"{label:<56} chair_i={chair:.4f} cover={cover_value:.4f} "
            f"score={score:.4f} hal_rate={rate:.4f}"
        )


# -- simulate ---------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = build_run_config(
        config_path=args.config,
        scene=args.scene,
        strategies=args.strategies,
        seeds=args.seeds,
        max_steps=args.max_steps,
        temperature=args.temperature,
        bin_width=args.bin_width,
    )
    records = run_many(
        cfg.scene, cfg.strategies, cfg.seeds,
        max_steps=cfg.max_steps, temperature=cfg.temperature,
        prompt_id=cfg.scene_name, jobs=args.jobs,
    )
    lexicon = TraceLexicon.from_scene(cfg.scene)
    out = Path(args.out)
    trace_root = out / "traces"
    trace_root.mkdir(parents=True, exist_ok=True)

    labels = [s.label() for s in cfg.strategies]
    stats_by_label = {label: [] for label in labels}
    for record in records:
        strategy_dir = trace_root / sanitize_label(record.strategy)
        strategy_dir.mkdir(parents=True, exist_ok=True)
        stats = write_trace(
            strategy_dir / f"{record.seed}.jsonl",
            record, lexicon, full_dist=args.full_dist,
        )
        stats_by_label[record.strategy].append(stats)

    report = {
        "scene": cfg.scene_name,
        "scene_spec": scene_to_dict(cfg.scene),
        "seeds": list(cfg.seeds),
        "max_steps": cfg.max_steps,
        "temperature": cfg.temperature,
        "bin_width": cfg.bin_width,
        **_trace_report(stats_by_label, lexicon, cfg.scene, cfg.bin_width),
    }
    manifest = {
        "command": "simulate",
        "scene": cfg.scene_name,
        "scene_spec": scene_to_dict(cfg.scene),
        "strategies": labels,
        "seeds": list(cfg.seeds),
        "max_steps": cfg.max_steps,
        "temperature": cfg.temperature,
        "bin_width": cfg.bin_width,
        "full_dist": bool(args.full_dist),
    }
    _write_json(out / "manifest.json", manifest)
    _write_trace_report(out, report, _formats(args))
    print(f"simulated {len(records)} runs over {len(cfg.seeds)} seeds -> {out}")
    _print_strategy_summary(report)
    return 0


# -- evaluate ---------------------------------------------------------------------


def _load_annotations_file(path: str) -> list[Annotation]:
    data = load_json_file(path)
    if not isinstance(data, list):
        raise InputError(f"{path}: annotations must be a JSON array")
    return [Annotation.from_dict(item) for item in data]


def _evaluate_corpus(args) -> int:
    missing = [
        flag for flag, value in (
            ("--captions", args.captions),
            ("--annotations", args.annotations),
            ("--lexicon", args.lexicon),
        ) if value is None
    ]
    if missing:
        raise ConfigError(
            "evaluate needs --traces, or all of --captions/--annotations/--lexicon "
            f"(missing {', '.join(missing)})"
        )
    captions_path = Path(args.captions)
    try:
        captions_text = captions_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {captions_path}: {exc}") from exc
    captions = load_captions_jsonl(captions_text, source=str(captions_path))
    annotations = _load_annotations_file(args.annotations)
    lexicon_data = load_json_file(args.lexicon)
    try:
        lexicon = ObjectLexicon.from_dict(lexicon_data)
    except ConfigError as exc:
        raise InputError(f"{args.lexicon}: {exc}") from exc

    report_obj = corpus_metrics(captions, annotations, lexicon)
    for warning in report_obj.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    report = {"corpus": report_obj.to_dict()}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        formats = _formats(args)
        if "json" in formats:
            _write_json(out / "report.json", report)
        if "csv" in formats:
            counts = report["corpus"]["counts"]
            _write_csv(
                out / "report.csv",
                ("chair_i", "chair_s", "cover", "cog", "recall", "object_score",
                 "captions", "matched", "mentions", "hallucinated",
                 "gt", "covered", "hal_captions", "cognition_hits"),
                [[
                    report_obj.chair_i, report_obj.chair_s, report_obj.cover,
                    report_obj.cog, report_obj.recall, report_obj.object_score,
                    counts["captions"], counts["matched"], counts["mentions"],
                    counts["hallucinated"], counts["gt"], counts["covered"],
                    counts["hal_captions"], counts["cognition_hits"],
                ]],
            )
    print(
        f"captions={report_obj.n_matched}/{report_obj.n_captions} "
        f"chair_i={report_obj.chair_i:.4f} chair_s={report_obj.chair_s:.4f} "
        f"cover={report_obj.cover:.4f} cog={report_obj.cog:.4f} "
        f"object_score={report_obj.object_score:.4f}"
    )
    return 0


def read_trace_dir(traces_dir: Path):
    """Load a simulate output directory: manifest, scene, grouped run stats."""
    manifest_path = traces_dir / "manifest.json"
    if not manifest_path.exists():
        raise InputError(f"{traces_dir}: no manifest.json; not a simulate output")
    manifest = load_json_file(manifest_path)
    scene = scene_from_dict(manifest["scene_spec"])
    stats_by_label = {}
    for label in manifest["strategies"]:
        strategy_dir = traces_dir / "traces" / sanitize_label(label)
        if not strategy_dir.is_dir():
            raise InputError(f"{traces_dir}: missing trace directory for {label!r}")
        files = sorted(strategy_dir.glob("*.jsonl"), key=lambda p: int(p.stem))
        if not files:
            raise InputError(f"{traces_dir}: no traces for {label!r}")
        stats_by_label[label] = [read_trace(path) for path in files]
    return manifest, scene, stats_by_label


def _evaluate_traces(args) -> int:
    manifest, scene, stats_by_label = read_trace_dir(Path(args.traces))
    lexicon = TraceLexicon.from_scene(scene)
    bin_width = int(manifest.get("bin_width", DEFAULT_BIN_WIDTH))
    report = {
        "scene": manifest.get("scene", "custom"),
        "scene_spec": scene_to_dict(scene),
        "seeds": manifest.get("seeds", []),
        "max_steps": manifest.get("max_steps"),
        "temperature": manifest.get("temperature"),
        "bin_width": bin_width,
        **_trace_report(stats_by_label, lexicon, scene, bin_width),
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_trace_report(out, report, _formats(args))
    n_runs = sum(len(v) for v in stats_by_label.values())
    print(f"evaluated {n_runs} stored runs from {args.traces}")
    _print_strategy_summary(report)
    return 0


def cmd_evaluate(args) -> int:
    if args.traces:
        return _evaluate_traces(args)
    return _evaluate_corpus(args)


# -- sweep ------------------------------------------------------------------------


def _parse_float_list(text: str, name: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ConfigError(f"{name}: empty list")
    return values


_SWEEP_KEYS = {
    "scene", "gammas", "lams", "betas", "schedules", "mask",
    "seeds", "max_steps", "temperature",
}


def cmd_sweep(args) -> int:
    file_cfg = {}
    if args.config:
        file_cfg = load_json_file(args.config)
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"{args.config}: top-level config must be an object")
        unknown = set(file_cfg) - _SWEEP_KEYS
        if unknown:
            raise ConfigError(f"{args.config}: unknown config keys {sorted(unknown)}")

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return file_cfg.get(key, default)

    scene, scene_name = resolve_scene(pick(args.scene, "scene", None))
    gammas = pick(args.gammas, "gammas", "0.1,0.3,0.5,0.7")
    lams = pick(args.lams, "lams", "0.01,0.05,0.1")
    betas = pick(args.betas, "betas", "0.1")
    schedules = pick(args.schedules, "schedules", "increasing")
    if isinstance(gammas, str):
        gammas = _parse_float_list(gammas, "gammas")
    if isinstance(lams, str):
        lams = _parse_float_list(lams, "lams")
    if isinstance(betas, str):
        betas = _parse_float_list(betas, "betas")
    if isinstance(schedules, str):
        schedules = tuple(s.strip() for s in schedules.split(",") if s.strip())
    mask = pick(args.mask, "mask", "full")
    seeds_value = pick(args.seeds, "seeds", None)
    if seeds_value is None:
        seeds = tuple(range(20))
    elif isinstance(seeds_value, str):
        seeds = parse_seed_list(seeds_value)
    else:
        seeds = tuple(int(s) for s in seeds_value)
    env_seeds = env_seed_override()
    if env_seeds is not None:
        seeds = env_seeds
    max_steps = int(pick(args.max_steps, "max_steps", 60))
    temperature = float(pick(args.temperature, "temperature", 1.0))

    lexicon = TraceLexicon.from_scene(scene)
    rows = []
    for schedule_kind, gamma, lam, beta in product(schedules, gammas, lams, betas):
        strategy = Strategy(
            kind="flb",
            flb=FlbConfig(
                schedule=WeightSchedule(schedule_kind, gamma, lam),
                beta=beta,
                l0_mask=mask,
            ),
        )
        records = run_many(
            scene, [strategy], seeds,
            max_steps=max_steps, temperature=temperature,
            prompt_id=scene_name, jobs=args.jobs,
        )
        from .metrics import summarize_record

        runs = [summarize_record(r, lexicon) for r in records]
        captions, annotations, identity = simulated_corpus(
            runs, lexicon, scene.gt_objects, scene.cognition_objects
        )
        corpus = corpus_metrics(captions, annotations, identity)
        rows.append({
            "schedule": schedule_kind,
            "gamma": gamma,
            "lam": lam,
            "beta": beta,
            "label": strategy.label(),
            "chair_i": corpus.chair_i,
            "chair_s": corpus.chair_s,
            "cover": corpus.cover,
            "cog": corpus.cog,
            "object_score": corpus.object_score,
            "hal_noun_rate": hal_noun_rate(runs, lexicon),
        })

    rows.sort(key=lambda r: (-r["object_score"], r["chair_i"], r["label"]))
    for rank, row in enumerate(rows, start=1):
        row["rank"] = rank
        row["best"] = rank == 1

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats = _formats(args)
    result = {
        "scene": scene_name,
        "seeds": list(seeds),
        "max_steps": max_steps,
        "temperature": temperature,
        "mask": mask,
        "rows": rows,
    }
    if "json" in formats:
        _write_json(out / "sweep.json", result)
    if "csv" in formats:
        header = ("rank", "best", "schedule", "gamma", "lam", "beta",
                  "chair_i", "chair_s", "cover", "cog", "object_score",
                  "hal_noun_rate", "label")
        _write_csv(out / "sweep.csv", header,
                   [[row[k] for k in header] for row in rows])
    print(f"swept {len(rows)} cells over {len(seeds)} seeds -> {out}")
    for row in rows[: min(5, len(rows))]:
        marker = "*" if row["best"] else " "
        print(
            f"{marker} rank={row['rank']:<3} {row['schedule']:<10} "
            f"gamma={row['gamma']:<5g} lam={row['lam']:<5g} beta={row['beta']:<5g} "
            f"score={row['object_score']:.4f}"
        )
    return 0


# -- bench ------------------------------------------------------------------------


def cmd_bench(args) -> int:
    scene, scene_name = resolve_scene(args.scene)
    strategies = parse_strategies(
        args.strategies if args.strategies is not None
        else "baseline;greedy;vcd;icd;m3id;flb"
    )
    seeds = parse_seed_list(args.seeds) if args.seeds else tuple(range(40))
    env_seeds = env_seed_override()
    if env_seeds is not None:
        seeds = env_seeds
    cost_model = CostModel.parse(args.cost_model)
    report = run_bench(
        scene, strategies, seeds, cost_model,
        max_steps=args.max_steps, min_tokens=args.min_tokens,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats = _formats(args)
    payload = {"scene": scene_name, "seeds": list(seeds), **report.to_dict()}
    if "json" in formats:
        _write_json(out / "bench.json", payload)
    if "csv" in formats:
        header = ("strategy", "runs", "tokens_measured", "provider_calls",
                  "provider_calls_per_token", "wall_ms_per_token",
                  "overhead_ms_per_token")
        _write_csv(out / "bench.csv", header,
                   [[row.to_dict()[k] for k in header] for row in report.rows])
    print(f"bench ({cost_model.kind}, pad={cost_model.pad_us:g}us) -> {out}")
    for row in report.rows:
        print(
            f"{row.strategy:<56} calls/token={row.provider_calls_per_token:.3f} "
            f"wall_ms/token={row.wall_ms_per_token:.4f} tokens={row.tokens_measured}"
        )
    return 0


# -- ablate -----------------------------------------------------------------------


def cmd_ablate(args) -> int:
    scene, scene_name = resolve_scene(args.scene)
    seeds = parse_seed_list(args.seeds) if args.seeds else tuple(range(100))
    env_seeds = env_seed_override()
    if env_seeds is not None:
        seeds = env_seeds

    def flb_strategy(mask: str) -> Strategy:
        return Strategy(
            kind="flb",
            flb=FlbConfig(
                schedule=WeightSchedule("increasing", args.gamma, args.lam),
                beta=args.beta,
                l0_mask=mask,
            ),
        )

    variants = [
        ("baseline", Strategy(kind="baseline")),
        ("nouns_only", flb_strategy("nouns_only")),
        ("the_only", flb_strategy("the_only")),
        ("full", flb_strategy("full")),
    ]
    lexicon = TraceLexicon.from_scene(scene)
    records = run_many(
        scene, [s for _, s in variants], seeds,
        max_steps=args.max_steps, prompt_id=scene_name, jobs=args.jobs,
    )
    from .metrics import summarize_record

    by_label: dict[str, list] = {}
    for record in records:
        by_label.setdefault(record.strategy, []).append(
            summarize_record(record, lexicon)
        )

    rows = []
    for variant, strategy in variants:
        runs = by_label[strategy.label()]
        captions, annotations, identity = simulated_corpus(
            runs, lexicon, scene.gt_objects, scene.cognition_objects
        )
        corpus = corpus_metrics(captions, annotations, identity)
        initial = sentence_initial_stats(runs)
        rows.append({
            "variant": variant,
            "label": strategy.label(),
            "chair_i": corpus.chair_i,
            "chair_s": corpus.chair_s,
            "cover": corpus.cover,
            "cog": corpus.cog,
            "object_score": corpus.object_score,
            "hal_noun_rate": hal_noun_rate(runs, lexicon),
            "sentence_initial_the": initial.the_fraction,
        })

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats = _formats(args)
    payload = {
        "scene": scene_name,
        "seeds": list(seeds),
        "max_steps": args.max_steps,
        "gamma": args.gamma,
        "lam": args.lam,
        "beta": args.beta,
        "rows": rows,
    }
    if "json" in formats:
        _write_json(out / "ablate.json", payload)
    if "csv" in formats:
        header = ("variant", "chair_i", "chair_s", "cover", "cog", "object_score",
                  "hal_noun_rate", "sentence_initial_the", "label")
        _write_csv(out / "ablate.csv", header,
                   [[row[k] for k in header] for row in rows])
    print(f"ablation over {len(seeds)} seeds -> {out}")
    for row in rows:
        print(
            f"{row['variant']:<12} hal_rate={row['hal_noun_rate']:.4f} "
            f"chair_i={row['chair_i']:.4f} the_start={row['sentence_initial_the']:.4f}"
        )
    return 0


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logit-anchor",
        description="Decoding-strategy engine and hallucination benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_output(p, default_out):
        p.add_argument("--out", default=default_out, help="output directory")
        p.add_argument("--format", choices=("csv", "json"),
                       help="restrict report format (default: both)")

    p = sub.add_parser("simulate", help="run strategies on a scene, write traces and reports")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--scene", help="preset name or scene JSON path")
    p.add_argument("--strategies",
                   help="semicolon-separated strategy descriptors, "
                        "e.g. 'baseline;vcd;flb:gamma=0.3,lambda=0.05'")
    p.add_argument("--seeds", help="comma-separated seeds; ranges like 0:50 allowed")
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--temperature", type=float)
    p.add_argument("--bin-width", type=int, dest="bin_width")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--full-dist", action="store_true", dest="full_dist",
                   help="store full per-step distributions in traces")
    common_output(p, "out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score captions against annotations, or re-score stored traces")
    p.add_argument("--captions", help="captions JSONL ({'id','text'} per line)")
    p.add_argument("--annotations", help="annotations JSON array")
    p.add_argument("--lexicon", help="object lexicon JSON")
    p.add_argument("--traces", help="a simulate output directory to re-score")
    p.add_argument("--out", help="output directory (optional)")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="grid-search boost schedules")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--scene")
    p.add_argument("--gammas", help="comma-separated gamma values")
    p.add_argument("--lams", help="comma-separated lambda values")
    p.add_argument("--betas", help="comma-separated beta values")
    p.add_argument("--schedules", help="comma-separated schedule kinds")
    p.add_argument("--mask", choices=("full", "nouns_only", "the_only"))
    p.add_argument("--seeds")
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--temperature", type=float)
    p.add_argument("--jobs", type=int, default=1)
    common_output(p, "sweep_out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="account provider calls and wall time per strategy")
    p.add_argument("--scene")
    p.add_argument("--strategies", help="semicolon-separated strategy descriptors")
    p.add_argument("--seeds")
    p.add_argument("--cost-model", default="cheap", dest="cost_model",
                   help="'cheap' or 'padded:<microseconds>'")
    p.add_argument("--min-tokens", type=int, default=1000, dest="min_tokens")
    p.add_argument("--max-steps", type=int, default=60, dest="max_steps")
    common_output(p, "bench_out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate", help="compare first-logit contribution masks")
    p.add_argument("--scene")
    p.add_argument("--seeds")
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--lam", "--lambda", type=float, default=0.05, dest="lam")
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--max-steps", type=int, default=60, dest="max_steps")
    p.add_argument("--jobs", type=int, default=1)
    common_output(p, "ablate_out")
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ContractError, ExclusionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4
    except LogitAnchorError as exc:  # any future subclass
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
