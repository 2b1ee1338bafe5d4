"""Command-line entry point.

Subcommands:

    gen       write a synthetic trace corpus (CSV + profile sidecar)
    replay    run the engine over a corpus, write per-model outcomes CSV
    baseline  write baseline stop epochs CSV for a corpus
    metrics   score outcomes vs baseline vs ground truth, emit a report
    fit       one-shot curve fit over an x,y points file
    serve     speak the streaming protocol over stdio or TCP

Exit codes: 0 success, 2 validation error (bad flags or input files),
1 runtime error.  All commands are deterministic given flags and inputs.
"""

from __future__ import annotations

import argparse
import socket
import sys
from typing import Optional

import numpy as np

from .analyzer import AnalyzerConfig, DatasetProfile
from .curve import A_UPPER, ParamBox, default_box
from .engine import Engine, handle_line
from .errors import (
    CorpusFormatError,
    CorpusInvariantError,
    CurvecastError,
    InvalidSpecError,
    NonFiniteInputError,
    TooFewPointsError,
)
from .fitting import FitConfig, fit
from .kv import load_kv
from .metrics import epochs_saved, format_histogram_csv, format_report
from .replay import (
    baseline_corpus,
    build_outcomes,
    read_baseline,
    read_outcomes,
    replay_corpus,
    write_baseline,
    write_outcomes,
)
from .synth import (
    DEFAULT_E_FULL,
    DEFAULT_POPULATION,
    DEFAULT_PROFILE,
    DEFAULT_STEP,
    generate_corpus,
    load_population,
)
from .traces import load_corpus, load_profile, save_corpus

_CONFIG_KEYS = {
    "window": int,
    "tolerance": float,
    "e_max": float,
    "loss_patience": float,
    "loss_check": str,
    "margin": float,
    "c_min": int,
    "max_iterations": int,
    "multi_start": str,
}


def _parse_tristate(value: str, what: str) -> Optional[bool]:
    if value == "auto":
        return None
    if value in ("true", "false"):
        return value == "true"
    raise CorpusFormatError(f"{what} must be auto, true, or false, got {value!r}")


def _parse_bool(value: str, what: str) -> bool:
    if value in ("true", "false"):
        return value == "true"
    raise CorpusFormatError(f"{what} must be true or false, got {value!r}")


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value file with engine parameters")
    parser.add_argument("--window", type=int, help="predictions that must agree")
    parser.add_argument("--tolerance", type=float, help="allowed spread around the window mean")
    parser.add_argument("--e-max", type=float, dest="e_max", help="epoch budget")
    parser.add_argument("--loss-patience", type=float, dest="loss_patience",
                        help="epochs the loss minimum may stay flat")
    parser.add_argument("--loss-check", choices=("auto", "true", "false"),
                        dest="loss_check", help="enable the loss-plateau condition")
    parser.add_argument("--margin", type=float, help="never-learn threshold margin")
    parser.add_argument("--c-min", type=int, dest="c_min", help="points before fitting starts")
    parser.add_argument("--max-iterations", type=int, dest="max_iterations")
    parser.add_argument("--multi-start", choices=("true", "false"), dest="multi_start")


def _engine_configs(args: argparse.Namespace) -> tuple[AnalyzerConfig, FitConfig]:
    """Defaults, overridden by the config file, overridden by flags."""
    pairs = load_kv(args.config) if args.config else {}
    unknown = set(pairs) - set(_CONFIG_KEYS)
    if unknown:
        raise CorpusFormatError(f"{args.config}: unknown keys: {', '.join(sorted(unknown))}")

    values: dict = {}
    for key, conv in _CONFIG_KEYS.items():
        if key in pairs:
            try:
                values[key] = conv(pairs[key])
            except ValueError as exc:
                raise CorpusFormatError(f"{args.config}: bad {key}: {exc}") from exc
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    if "loss_check" in values and isinstance(values["loss_check"], str):
        values["loss_check"] = _parse_tristate(values["loss_check"], "loss_check")
    if "multi_start" in values and isinstance(values["multi_start"], str):
        values["multi_start"] = _parse_bool(values["multi_start"], "multi_start")

    analyzer_keys = ("window", "tolerance", "e_max", "loss_patience", "loss_check", "margin")
    fit_keys = ("c_min", "max_iterations", "multi_start")
    analyzer = AnalyzerConfig(**{k: values[k] for k in analyzer_keys if k in values})
    fitter = FitConfig(**{k: values[k] for k in fit_keys if k in values})
    return analyzer, fitter


def _cmd_gen(args: argparse.Namespace) -> int:
    population, step, e_full = DEFAULT_POPULATION, DEFAULT_STEP, DEFAULT_E_FULL
    if args.population:
        population, step, e_full = load_population(args.population)
    profile = load_profile(args.profile) if args.profile else DEFAULT_PROFILE
    corpus = generate_corpus(
        population=population, n=args.n, profile=profile, seed=args.seed,
        step=step, e_full=e_full,
    )
    save_corpus(corpus, args.out)
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    analyzer, fitter = _engine_configs(args)
    corpus = load_corpus(args.corpus)
    outcomes = replay_corpus(corpus, config=analyzer, fit_config=fitter)
    write_outcomes(args.out, outcomes)
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    stops = baseline_corpus(corpus, patience=args.patience, e_max=args.e_max)
    write_baseline(args.out, stops)
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    try:
        tops = tuple(float(t) for t in args.top.split(",") if t.strip())
    except ValueError as exc:
        raise CorpusFormatError(f"bad --top value: {exc}") from exc
    if not tops:
        raise CorpusFormatError("--top lists no percentages")
    engine_outcomes = read_outcomes(args.outcomes)
    baseline_stops = read_baseline(args.baseline)
    corpus = load_corpus(args.corpus)
    outcomes = build_outcomes(engine_outcomes, baseline_stops, corpus)
    report = format_report(outcomes, tops=tops)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    if args.histogram:
        savings = list(epochs_saved(outcomes).per_model.values())
        with open(args.histogram, "w", encoding="utf-8") as fh:
            fh.write(format_histogram_csv(savings))
    return 0


def _read_points(path: str) -> list[tuple[float, float]]:
    points = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise CorpusFormatError(f"{path}:{lineno}: expected x,y")
            try:
                points.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
    return points


def _cmd_fit(args: argparse.Namespace) -> int:
    points = _read_points(args.points)
    base = default_box()
    lower = (args.a_lower, 1.0, 0.0)
    upper = (args.a_upper, args.b_upper, args.c_upper)
    init = tuple(float(v) for v in np.clip(base.init, lower, upper))
    box = ParamBox(lower=lower, upper=upper, init=init)
    cfg = FitConfig(multi_start=args.multi_start == "true")
    result = fit(points, box=box, cfg=cfg)
    lines = [
        f"a = {result.params.a!r}",
        f"b = {result.params.b!r}",
        f"c = {result.params.c!r}",
        f"converged = {'true' if result.converged else 'false'}",
        f"iterations = {result.iterations}",
        f"final_cost = {result.final_cost!r}",
        f"status = {result.status.value}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _serve_stdio(engine: Engine) -> int:
    for raw in sys.stdin:
        line = raw.strip()
        if not line:
            continue
        sys.stdout.write(handle_line(engine, line) + "\n")
        sys.stdout.flush()
    return 0


def _serve_tcp(engine: Engine, host: str, port: int) -> int:
    with socket.create_server((host, port)) as server:
        bound_host, bound_port = server.getsockname()[:2]
        sys.stdout.write(f"listening = {bound_host}:{bound_port}\n")
        sys.stdout.flush()
        while True:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("r", encoding="utf-8")
                for raw in reader:
                    line = raw.strip()
                    if not line:
                        continue
                    conn.sendall((handle_line(engine, line) + "\n").encode("utf-8"))


def _cmd_serve(args: argparse.Namespace) -> int:
    analyzer, fitter = _engine_configs(args)
    profile: Optional[DatasetProfile] = None
    if args.profile:
        profile = load_profile(args.profile)
    engine = Engine(config=analyzer, profile=profile, fit_config=fitter)
    if args.transport == "stdio":
        return _serve_stdio(engine)
    return _serve_tcp(engine, args.host, args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvecast",
        description="Early final-accuracy estimation for training runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic trace corpus")
    gen.add_argument("--population", help="population definition file")
    gen.add_argument("--n", type=int, default=200, help="number of traces")
    gen.add_argument("--profile", help="dataset profile file")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="corpus CSV path")
    gen.set_defaults(func=_cmd_gen)

    replay = sub.add_parser("replay", help="run the engine over a corpus")
    replay.add_argument("--corpus", required=True)
    replay.add_argument("--out", required=True, help="outcomes CSV path")
    _add_engine_flags(replay)
    replay.set_defaults(func=_cmd_replay)

    baseline = sub.add_parser("baseline", help="baseline stop epochs for a corpus")
    baseline.add_argument("--corpus", required=True)
    baseline.add_argument("--patience", type=float, default=10.0)
    baseline.add_argument("--e-max", type=float, dest="e_max", default=20.0)
    baseline.add_argument("--out", required=True, help="baseline CSV path")
    baseline.set_defaults(func=_cmd_baseline)

    metrics = sub.add_parser("metrics", help="score outcomes against the baseline")
    metrics.add_argument("--outcomes", required=True, help="replay outcomes CSV")
    metrics.add_argument("--baseline", required=True, help="baseline stops CSV")
    metrics.add_argument("--corpus", required=True,
                         help="corpus the outcomes came from (ground truth)")
    metrics.add_argument("--top", default="10,20,30",
                         help="comma-separated top-x%% selections")
    metrics.add_argument("--out", help="report path (default: stdout)")
    metrics.add_argument("--histogram", help="optional savings histogram CSV path")
    metrics.set_defaults(func=_cmd_metrics)

    fit_cmd = sub.add_parser("fit", help="fit the curve to an x,y points file")
    fit_cmd.add_argument("--points", required=True, help="file of 'x,y' lines")
    fit_cmd.add_argument("--a-lower", type=float, dest="a_lower", default=0.5)
    fit_cmd.add_argument("--a-upper", type=float, dest="a_upper", default=A_UPPER)
    fit_cmd.add_argument("--b-upper", type=float, dest="b_upper", default=1e12)
    fit_cmd.add_argument("--c-upper", type=float, dest="c_upper", default=1e12)
    fit_cmd.add_argument("--multi-start", choices=("true", "false"),
                         dest="multi_start", default="false")
    fit_cmd.set_defaults(func=_cmd_fit)

    serve = sub.add_parser("serve", help="live engine over the streaming protocol")
    serve.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0,
                       help="TCP port (0 picks a free one, printed on start)")
    serve.add_argument("--profile", help="dataset profile file")
    _add_engine_flags(serve)
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        CorpusFormatError,
        CorpusInvariantError,
        InvalidSpecError,
        TooFewPointsError,
        NonFiniteInputError,
        FileNotFoundError,
        IsADirectoryError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CurvecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
