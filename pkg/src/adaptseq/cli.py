"""Command-line interface.

Exit statuses:
  0 ok; 1 validation violations; 2 unreadable input, bad config or usage;
  3 not found; 4 empty candidate pool; 5 no content; 6 result/plan mismatch;
  7 lock contention; 8 session-index conflict; 9 already exists;
  10 invalid input; 11 corrupt record.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import errors
from .engine import Engine, EngineConfig, human_mastery, load_result_file, read_text, resolve_config_path
from .graph import parse_model, validate
from .lexicon import check_lexicon, parse_lexicon
from .sim import CohortSpec, run_cohort

EXIT_CODES = {
    errors.ConfigError: 2,
    errors.NotFound: 3,
    errors.EmptyPool: 4,
    errors.NoContent: 5,
    errors.PlanResultMismatch: 6,
    errors.LockContention: 7,
    errors.SessionIndexMismatch: 8,
    errors.AlreadyExists: 9,
    errors.InvalidResult: 10,
    errors.InvalidYear: 10,
    errors.UnknownFeature: 10,
    errors.OutOfRange: 10,
    errors.CorruptRecord: 11,
}


def exit_code(exc: errors.EngineError) -> int:
    for cls in type(exc).__mro__:
        if cls in EXIT_CODES:
            return EXIT_CODES[cls]
    return 1


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def cmd_validate(args) -> int:
    try:
        model_text = read_text(args.model)
        lexicon_text = read_text(args.lexicon)
    except errors.ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    try:
        model = parse_model(model_text)
    except errors.ModelError as exc:
        print(f"error: {exc.code}: {exc}")
        return 1
    violations = validate(model)
    try:
        lexicon = parse_lexicon(lexicon_text, model.language)
    except errors.MalformedDocument as exc:
        print(f"error: {exc.code}: lexicon: {exc}")
        return 1
    violations = violations + check_lexicon(lexicon, model)
    if args.json:
        _emit([v.to_dict() for v in violations])
    else:
        for v in violations:
            print(v)
    return 1 if any(v.severity == "error" for v in violations) else 0


def _engine(args) -> Engine:
    path = resolve_config_path(args.config)
    if path is None:
        raise errors.ConfigError("no configuration: pass --config or set ADAPTSEQ_CONFIG")
    config = EngineConfig.from_file(path)
    if args.data_dir:
        config.data_dir = Path(args.data_dir)
    return Engine.from_config(config)


def cmd_init(args) -> int:
    engine = _engine(args)
    profile = engine.create_student(args.student_id, args.year)
    if args.json:
        _emit(engine.profile_view(profile))
    else:
        opened = [fid for fid, st in profile.states.items() if st.status.value != "locked"]
        print(f"created {profile.student_id} (year {profile.year}); available: {', '.join(opened) or '-'}")
    return 0


def cmd_plan(args) -> int:
    engine = _engine(args)
    _emit(engine.plan(args.student_id, args.seed).to_dict())
    return 0


def cmd_submit(args) -> int:
    engine = _engine(args)
    result = load_result_file(args.result)
    _emit(engine.submit(args.student_id, result).to_dict())
    return 0


def cmd_inspect(args) -> int:
    engine = _engine(args)
    profile = engine.load(args.student_id)
    if args.json:
        _emit(engine.profile_view(profile))
        return 0
    print(f"student {profile.student_id}  year {profile.year}  sessions {profile.session_counter}")
    for fid, st in profile.states.items():
        last = "-" if st.last_used_session is None else str(st.last_used_session)
        print(
            f"  {fid:<16} {st.status.value:<9} {human_mastery(st.mastery):>12}"
            f"  played {st.times_played:<3} last {last:<4} streak {st.non_improving_streak}"
        )
    return 0


def cmd_simulate(args) -> int:
    engine = _engine(args)
    try:
        doc = json.loads(read_text(args.cohort))
    except json.JSONDecodeError as exc:
        raise errors.ConfigError(f"{args.cohort}: {exc}") from None
    spec = CohortSpec.from_dict(doc)
    seed = args.seed if args.seed is not None else int(doc.get("master_seed", 0))
    report = run_cohort(engine.model, engine.lexicon, spec, spec.n_sessions, engine.params, seed)
    paths = report.write(args.out)
    if args.json:
        _emit({k: str(v) for k, v in paths.items()})
    else:
        agg = report.aggregates()
        print(f"{spec.size} students x {spec.n_sessions} sessions; starvation {report.starvation_count}; "
              f"demotions {agg['total_demotions']}")
        for name, p in paths.items():
            print(f"  {name}: {p}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    path = resolve_config_path(args.config)
    if path is None:
        raise errors.ConfigError("no configuration: pass --config or set ADAPTSEQ_CONFIG")
    config = EngineConfig.from_file(path)
    if args.data_dir:
        config.data_dir = Path(args.data_dir)
    if args.listen:
        config.listen = args.listen
    server = serve(config)
    host, port = server.server_address[:2]
    print(f"listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="engine config file (default: $ADAPTSEQ_CONFIG)")
    common.add_argument("--data-dir", help="override the config's data directory")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="adaptseq", description="Adaptive feature sequencing engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a model and lexicon")
    p.add_argument("model")
    p.add_argument("lexicon")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("init", parents=[common], help="create a student profile")
    p.add_argument("student_id")
    p.add_argument("year", type=int)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("plan", parents=[common], help="plan the next session")
    p.add_argument("student_id")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("submit", parents=[common], help="apply a game result ('-' reads stdin)")
    p.add_argument("student_id")
    p.add_argument("result")
    p.set_defaults(func=cmd_submit)

    p = sub.add_parser("inspect", parents=[common], help="show a student profile")
    p.add_argument("student_id")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("simulate", parents=[common], help="run a synthetic cohort")
    p.add_argument("cohort")
    p.add_argument("--seed", type=int, help="master seed (default: cohort file's master_seed or 0)")
    p.add_argument("--out", default="cohort-report")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--listen", help="host:port (default from config)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.EngineError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
