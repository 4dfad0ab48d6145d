"""Command-line entry points.

    outfox serve      --config deploy.json
    outfox simulate   --spec campaign.json --out runs/demo
    outfox stats      --data runs/demo --round 1 --out reports/
    outfox export     --data runs/demo --round 1 --split dev --out dev.jsonl
    outfox ingest     FILES... [--report counts.json]
    outfox train-model --corpus corpus.jsonl --out model.bin
    outfox tag        --input dev.jsonl [--out profile.json]

OUTFOX_DATA_DIR supplies --data when omitted; OUTFOX_LISTEN ("host:port")
overrides the serve address.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .adversary import train_builtin, save_model
from .analytics import (
    canonical_stats_json,
    label_distribution,
    RoundStats,
    tag_incidence,
    tag_sentence,
)
from .assembly import ingest, ingest_file, Split
from .config import load_deployment_config
from .domain import Annotator, LABEL_ORDER, Role
from .errors import OutfoxError
from .service import Platform
from .simulation import CampaignSpec, parse_campaign_spec, run_campaign_from_spec
from .store import EventStore


def _data_dir(value: str | None) -> Path:
    if value:
        return Path(value)
    env = os.environ.get("OUTFOX_DATA_DIR")
    if env:
        return Path(env)
    raise SystemExit("no data directory: pass --data or set OUTFOX_DATA_DIR")


def _load_roster(data_dir: Path) -> dict[str, Annotator]:
    roster_path = data_dir / "roster.json"
    if not roster_path.exists():
        return {}
    roster = {}
    for entry in json.loads(roster_path.read_text(encoding="utf-8")):
        roster[entry["id"]] = Annotator(
            id=entry["id"], role=Role(entry.get("role", "both")),
            exclusive=bool(entry.get("exclusive", False)),
        )
    return roster


def _offline_platform(data_dir: Path) -> Platform:
    store = EventStore(data_dir / "events.log")
    return Platform(store=store, roster=_load_roster(data_dir), implicit_roster=True)


def _print_stats_table(stats: RoundStats) -> None:
    def fmt(x: float | None) -> str:
        return "-" if x is None else f"{x:.2f}"

    print(f"round {stats.round_number}")
    print(f"  sessions            {stats.n_sessions}")
    print(f"  attempts            {stats.total_attempts}")
    print(f"  collected examples  {stats.n_collected}")
    print(f"  error rate          unverified {100 * stats.unverified_error_rate:.2f}%"
          f"  verified {100 * stats.verified_error_rate:.2f}%")
    print(f"  tries (mean/median) {fmt(stats.tries_mean)} / {fmt(stats.tries_median)}")
    print(f"  secs  (mean/median) {fmt(stats.seconds_mean)} / {fmt(stats.seconds_median)}")
    fates = "  ".join(f"{k}={stats.fate_counts.get(k, 0)}" for k in ("A", "B1", "B2", "C", "D"))
    print(f"  fates               {fates}")


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    config = load_deployment_config(args.config)
    listen = os.environ.get("OUTFOX_LISTEN")
    host, port = config.host, config.port
    if listen:
        host, _, port_text = listen.partition(":")
        port = int(port_text or port)
    if args.host:
        host = args.host
    if args.port:
        port = args.port

    config.data_dir.mkdir(parents=True, exist_ok=True)
    store = EventStore(config.data_dir / "events.log")
    platform = Platform(
        store=store,
        roster=config.annotator_map(),
        registry=config.build_registry(),
    )
    for round_config in config.rounds:
        if round_config.round_number not in platform.rounds:
            platform.open_round(round_config)
    app = create_app(platform, config)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    from .figures import render_campaign_figures, render_round_figures

    spec_data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    spec = parse_campaign_spec(spec_data)
    if args.seed is not None:
        spec = CampaignSpec(**{**spec.__dict__, "seed": args.seed, "genres": spec.genres})
    result = run_campaign_from_spec(spec)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stats_lines = []
    all_stats = []
    for outcome in result.rounds:
        n = outcome.round_number
        round_dir = out / f"round{n}"
        round_dir.mkdir(parents=True, exist_ok=True)
        (round_dir / "events.log").write_bytes(outcome.platform.store.raw_bytes())
        roster = outcome.platform.roster
        (round_dir / "roster.json").write_text(
            json.dumps(
                [
                    {"id": a.id, "role": a.role.value, "exclusive": a.exclusive}
                    for a in sorted(roster.values(), key=lambda a: a.id)
                ],
                indent=2,
            ),
            encoding="utf-8",
        )
        for split in (Split.TRAIN, Split.DEV, Split.TEST):
            text = outcome.platform.export_round_text(n, split, allow_empty=True)
            (round_dir / f"{split.value}.jsonl").write_text(text, encoding="utf-8")
        stats_lines.append(canonical_stats_json(outcome.stats))
        all_stats.append(outcome.stats)
        render_round_figures(outcome.stats, out / "figures")
        _print_stats_table(outcome.stats)
    (out / "stats.jsonl").write_text("\n".join(stats_lines) + "\n", encoding="utf-8")
    render_campaign_figures(all_stats, out / "figures")
    print(f"wrote {len(result.rounds)} rounds to {out}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    from .figures import render_round_figures

    platform = _offline_platform(_data_dir(args.data))
    stats = platform.round_stats(args.round, allow_pending=args.allow_pending)
    _print_stats_table(stats)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stats_path = out / f"round{args.round}_stats.json"
        stats_path.write_text(canonical_stats_json(stats), encoding="utf-8")
        figure_paths = render_round_figures(stats, out)
        print(f"wrote {stats_path}")
        for path in figure_paths:
            print(f"wrote {path}")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    platform = _offline_platform(_data_dir(args.data))
    text = platform.export_round_text(args.round, Split(args.split), allow_empty=args.allow_empty)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out} ({text.count(chr(10))} records)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    dataset = ingest(args.files)
    report: dict[str, dict[str, int]] = {}
    for split in sorted(dataset.splits):
        records = dataset.splits[split]
        dist = label_distribution(records)
        report[split] = {lab.short: dist[lab] for lab in LABEL_ORDER}
        counts = " / ".join(f"{dist[lab]}" for lab in LABEL_ORDER)
        print(f"{split:10s} {len(records):8d} records   e/n/c = {counts}")
    if args.report:
        Path(args.report).write_text(
            json.dumps(report, sort_keys=True, indent=2), encoding="utf-8"
        )
        print(f"wrote {args.report}")
    return 0


def cmd_train_model(args: argparse.Namespace) -> int:
    records = ingest_file(args.corpus)
    corpus = [(rec.premise, rec.hypothesis, rec.label) for rec in records]
    spec = train_builtin(corpus, seed=args.seed)
    save_model(spec, args.out)
    print(f"trained {spec.id} on {len(corpus)} examples -> {args.out}")
    return 0


def cmd_tag(args: argparse.Namespace) -> int:
    if args.plain:
        lines = [
            line for line in Path(args.input).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        for line in lines:
            print(f"{sorted(tag_sentence(line))}\t{line}")
        return 0
    records = ingest_file(args.input)
    profile = tag_incidence(records)
    print(f"{'tag':>14s} {'%context':>9s} {'%hypothesis':>12s}")
    for tag in profile.context_pct:
        print(f"{tag:>14s} {profile.context_pct[tag]:9.1f} {profile.hypothesis_pct[tag]:12.1f}")
    if args.out:
        Path(args.out).write_text(
            json.dumps(profile.as_dict(), sort_keys=True, indent=2), encoding="utf-8"
        )
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="outfox", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--config", required=True, help="deployment config (JSON)")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="run a scripted campaign")
    p.add_argument("--spec", required=True, help="campaign spec (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="round statistics from an event log")
    p.add_argument("--data", default=None, help="data directory with events.log")
    p.add_argument("--round", type=int, required=True)
    p.add_argument("--out", default=None, help="write canonical JSON and figures here")
    p.add_argument("--allow-pending", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="export one split of one round")
    p.add_argument("--data", default=None)
    p.add_argument("--round", type=int, required=True)
    p.add_argument("--split", default="dev", choices=[s.value for s in Split])
    p.add_argument("--out", default=None, help="output file (stdout when omitted)")
    p.add_argument("--allow-empty", action="store_true")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("ingest", help="load dataset files and report label counts")
    p.add_argument("files", nargs="+")
    p.add_argument("--report", default=None, help="write counts as JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-model", help="train the builtin classifier")
    p.add_argument("--corpus", required=True, help="JSONL with premise/hypothesis/label")
    p.add_argument("--out", required=True, help="weights file to write")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_model)

    p = sub.add_parser("tag", help="surface-cue tags for a dataset or plain text")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None, help="write the profile as JSON")
    p.add_argument("--plain", action="store_true", help="treat input as plain text lines")
    p.set_defaults(func=cmd_tag)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OutfoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
