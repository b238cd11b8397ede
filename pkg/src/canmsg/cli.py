"""Command-line entry point: ``canmsg <subcommand> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
import warnings
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .can_log import SkippedLineWarning, dumps_log, load_log, windowize
from .detect import (
    DEFAULT_STRENGTH_THRESHOLD,
    DEFAULT_THRESHOLD,
    CpdConfig,
    calibrate_threshold,
    change_point_detect,
    threshold_detect,
)
from .errors import CanMsgError, CheckpointError, IntervalOutOfRange, IoFailure, WindowTooSmall
from .evaluation import format_p, score, welch_t_test, write_sweep_csv
from .inject import (
    ALIEN_PID,
    InjectionSpec,
    SyntheticTrafficSpec,
    default_pids,
    generate_benign,
    inject_frames,
    payload_from_hex,
    read_labels,
    schedule_matrix,
    write_labels,
)
from .msg_graph import compute_msg, to_dot
from .seq_model import LstmModel, ModelConfig, build_constructed_dataset, predict, train, write_history_csv
from .similarity import Metric, SimilaritySeries, series_from_pids
from .svg import series_svg

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

# library errors that mean the invocation, not the input data, is wrong
_CONFIG_ERRORS = (IntervalOutOfRange, WindowTooSmall, CheckpointError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# --------------------------------------------------------------------------
# loading


def _read_frames(path: str, args) -> tuple[list, list[int] | None]:
    """Frames of the configured channel plus their labels, if a sidecar was given."""
    if not Path(path).exists():
        raise IoFailure(f"no such file: {path}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SkippedLineWarning)
        frames = load_log(path, strict=args.strict)
    for w in caught:
        if isinstance(w.message, SkippedLineWarning):
            _warn(f"{path}: {w.message}")
    labels = None
    label_path = getattr(args, "labels", None)
    if label_path:
        if not Path(label_path).exists():
            raise IoFailure(f"no such file: {label_path}")
        with open(label_path, encoding="utf-8") as fh:
            labels = read_labels(fh)
        if len(labels) != len(frames):
            raise CanMsgError(f"{label_path}: {len(labels)} labels for {len(frames)} frames in {path}")
    if args.channel:
        keep = [f.bus == args.channel for f in frames]
        frames = [f for f, k in zip(frames, keep) if k]
        if labels is not None:
            labels = [lab for lab, k in zip(labels, keep) if k]
    return frames, labels


def _series_for_log(frames, labels, window_size: int, stride: int | None, metric: Metric, path: str = "") -> SimilaritySeries:
    stride = window_size if stride is None else stride
    if window_size < 2 or stride < 1:
        raise WindowTooSmall(f"window size must be >= 2 and stride >= 1, got {window_size} and {stride}")
    n = len(frames)
    n_win = 0 if n < window_size else (n - window_size) // stride + 1
    used = (n_win - 1) * stride + window_size if n_win else 0
    if n - used:
        _warn(f"{path or 'log'}: {n - used} trailing frames discarded (window {window_size})")
    if n_win < 2:
        _warn(f"{path or 'log'}: {n_win} window(s), no similarity pairs")
        lab = None if labels is None else np.zeros(0, dtype=bool)
        return SimilaritySeries(metric, np.zeros(0), window_size, stride, lab)
    return series_from_pids([f.pid for f in frames], window_size, metric, stride, labels)


def _load_series(path: str, args, metric: Metric | None = None) -> SimilaritySeries:
    """A similarity CSV is read as is; anything else is treated as a candump log."""
    metric = Metric(metric or args.metric)
    if path.lower().endswith(".csv"):
        if not Path(path).exists():
            raise IoFailure(f"no such file: {path}")
        with open(path, encoding="utf-8") as fh:
            series = SimilaritySeries.from_csv(fh)
        return series
    frames, labels = _read_frames(path, args)
    return _series_for_log(frames, labels, args.window_size, args.stride, metric, path)


# --------------------------------------------------------------------------
# subcommands


def cmd_similarity(args) -> int:
    series = _load_series(args.input, args)
    with _output(args.output) as fh:
        series.to_csv(fh)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(series_svg(series.values, f"{series.metric.value} similarity, window {series.window_size}", labels=series.labels))
    return EXIT_OK


def cmd_detect_threshold(args) -> int:
    series = _load_series(args.input, args)
    threshold = args.threshold
    cal_acc = None
    if args.calibrate:
        if series.labels is None:
            raise UsageError("--calibrate needs labelled data (--labels or a labelled CSV)")
        threshold, cal_acc = calibrate_threshold(series)
    verdicts = threshold_detect(series, threshold)
    params = {"threshold": threshold, "window_size": series.window_size, "calibrated": bool(args.calibrate)}
    if series.labels is not None:
        report = score(verdicts.verdicts, series.labels, detector="threshold", metric=series.metric.value, parameters=params)
        doc = report.summary()
        line = report.one_line()
    else:
        n_attack = int(verdicts.verdicts.sum())
        doc = {"detector": "threshold", "metric": series.metric.value, "parameters": params, "total": len(series), "attack": n_attack}
        line = f"threshold: {n_attack}/{len(series)} pairs below {threshold:g}"
    if cal_acc is not None:
        doc["calibration_accuracy"] = cal_acc
    with _output(args.output) as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    if args.verdicts_csv:
        with open(args.verdicts_csv, "w", encoding="utf-8", newline="") as fh:
            verdicts.to_csv(fh, series.labels)
    print(line, file=sys.stderr)
    return EXIT_OK


def _cpd_config(args) -> CpdConfig:
    return CpdConfig(samples=args.samples, burn_in=args.burn_in, seed=args.seed, strength_threshold=args.strength)


def cmd_detect_cpd(args) -> int:
    series = _load_series(args.input, args)
    est = change_point_detect(series, _cpd_config(args))
    with _output(args.output) as fh:
        fh.write(est.to_json() + "\n")
    if args.posterior_csv:
        with open(args.posterior_csv, "w", encoding="utf-8", newline="") as fh:
            est.posterior_csv(fh)
    print(
        f"cpd: tau={est.tau_point} strength={est.strength_of_change:.2f}% changed={str(est.changed).lower()} "
        f"mu_before={est.mu_before:.4f} mu_after={est.mu_after:.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


def _model_config(args) -> ModelConfig:
    return ModelConfig(
        input_units=args.input_units,
        hidden_units=args.hidden_units,
        dropout_rate=args.dropout,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        train_fraction=args.train_fraction,
        lookback=args.lookback,
        seed=args.seed,
    )


def _metrics(args) -> list[Metric]:
    if args.features == "both":
        return [Metric.COSINE, Metric.PEARSON]
    return [Metric(args.metric)]


def _constructed(args):
    metrics = _metrics(args)
    ben_args = argparse.Namespace(**{**vars(args), "labels": args.benign_labels})
    inj_args = argparse.Namespace(**{**vars(args), "labels": args.injected_labels})
    ben = [_load_series(args.benign, ben_args, m) for m in metrics]
    inj = [_load_series(args.injected, inj_args, m) for m in metrics]
    return build_constructed_dataset(ben, inj, args.lookback, args.train_fraction)


def cmd_train_lstm(args) -> int:
    ds = _constructed(args)
    model, history = train(ds, _model_config(args))
    model.save(args.checkpoint)
    if args.history:
        with open(args.history, "w", encoding="utf-8", newline="") as fh:
            write_history_csv(history, fh)
    pred = predict(model, ds)
    print(
        f"lstm: train_acc={history[-1].train_acc:.4f} test_acc={pred.accuracy:.4f} "
        f"(train={ds.n_train} test={len(ds) - ds.n_train})",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_predict_lstm(args) -> int:
    if not args.checkpoint and not args.train:
        raise UsageError("predict-lstm needs --checkpoint, or --train to fit a model first")
    ds = _constructed(args)
    if args.checkpoint and not args.train:
        model = LstmModel.load(args.checkpoint)
        if model.config.lookback != ds.lookback or model.config.n_features != ds.X.shape[2]:
            raise UsageError("checkpoint lookback/features do not match the data")
    else:
        model, _ = train(ds, _model_config(args))
        if args.checkpoint:
            model.save(args.checkpoint)
    pred = predict(model, ds)
    report = score(pred.verdicts.astype(bool), ds.test[1].astype(bool), detector="lstm",
                   metric="+".join(ds.provenance["metrics"]), parameters={"lookback": ds.lookback, **ds.provenance})
    with _output(args.output) as fh:
        fh.write(report.to_json() + "\n")
    print(report.one_line(), file=sys.stderr)
    return EXIT_OK


def _cpd_verdicts(series: SimilaritySeries, est) -> np.ndarray:
    """Flag the segment with the lower mean similarity once a change is accepted."""
    v = np.zeros(len(series), dtype=bool)
    if est.changed:
        if est.mu_after <= est.mu_before:
            v[est.tau_point :] = True
        else:
            v[: est.tau_point] = True
    return v


def cmd_eval(args) -> int:
    frames, labels = _read_frames(args.input, args)
    if labels is None:
        raise UsageError("eval needs --labels")
    sweep = []
    doc = {"input": args.input, "runs": []}
    model = LstmModel.load(args.checkpoint) if args.checkpoint else None
    for w in args.window_sizes:
        for metric in args.metrics:
            series = _series_for_log(frames, labels, w, None, Metric(metric), args.input)
            if len(series) < 2:
                continue
            run = {"window_size": w, "metric": metric}
            valid = ~series.degenerate
            a = series.values[valid & series.labels]
            b = series.values[valid & ~series.labels]
            try:
                tt = welch_t_test(a, b)
                run["t_test"] = {"t": tt.statistic, "p": tt.pvalue, "p_formatted": format_p(tt.pvalue), "df": tt.df}
            except CanMsgError as exc:
                run["t_test"] = {"error": str(exc)}
            if "threshold" in args.detectors:
                threshold = args.threshold
                if args.calibrate and series.labels.any() and not series.labels.all():
                    threshold, _ = calibrate_threshold(series)
                v = threshold_detect(series, threshold)
                rep = score(v.verdicts, series.labels, detector="threshold", metric=metric, parameters={"threshold": threshold})
                sweep.append((w, metric, rep))
                run["threshold"] = rep.summary()
            if "cpd" in args.detectors and len(series) >= 8:
                est = change_point_detect(series, _cpd_config(args))
                rep = score(_cpd_verdicts(series, est), series.labels, detector="cpd", metric=metric,
                            parameters={"tau_point": est.tau_point, "strength_of_change": est.strength_of_change})
                sweep.append((w, metric, rep))
                run["cpd"] = {**est.summary(), "report": rep.summary()}
                run["cpd"].pop("tau_posterior")
            if model is not None and "lstm" in args.detectors and len(series) >= model.config.lookback:
                lb = model.config.lookback
                idx = np.arange(len(series) - lb + 1)[:, None] + np.arange(lb)[None, :]
                pred = predict(model, series.values[idx])
                rep = score(pred.verdicts.astype(bool), series.labels[lb - 1 :], detector="lstm", metric=metric)
                sweep.append((w, metric, rep))
                run["lstm"] = rep.summary()
            doc["runs"].append(run)
    if args.sweep_csv:
        with open(args.sweep_csv, "w", encoding="utf-8", newline="") as fh:
            write_sweep_csv(sweep, fh)
    with _output(args.output) as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    for w, metric, rep in sweep:
        print(f"window={w} metric={metric} {rep.one_line()}", file=sys.stderr)
    return EXIT_OK


def cmd_generate(args) -> int:
    pids = default_pids(args.n_pids)
    matrix = schedule_matrix(args.n_pids, args.dominant, args.alternatives, seed=args.seed)
    spec = SyntheticTrafficSpec(pids, matrix, args.inter_arrival, args.length, args.seed, args.channel or "can0")
    frames = generate_benign(spec)
    header = (
        f"canmsg generate seed={args.seed} n_pids={args.n_pids} length={args.length} "
        f"dominant={args.dominant} alternatives={args.alternatives} inter_arrival={args.inter_arrival}"
    )
    with _output(args.output) as fh:
        fh.write(dumps_log(frames, header))
    if args.labels_out:
        with open(args.labels_out, "w", encoding="utf-8") as fh:
            write_labels([0] * len(frames), fh)
    return EXIT_OK


def cmd_inject(args) -> int:
    frames, labels = _read_frames(args.input, args)
    spec = InjectionSpec(
        target_pid=args.target_pid.upper(),
        payload=payload_from_hex(args.payload),
        rate=args.rate,
        start_frame=args.start,
        end_frame=args.end,
        seed=args.seed,
        jitter=args.jitter,
    )
    out, new_labels = inject_frames(frames, spec)
    if labels is not None:
        # carry earlier ground truth over to the original frames
        it = iter(labels)
        new_labels = [lab if lab else next(it) for lab in new_labels]
    header = (
        f"canmsg inject seed={args.seed} target_pid={spec.target_pid} payload={spec.payload.hex().upper()} "
        f"rate={args.rate} start={args.start} end={args.end if args.end is not None else len(frames)}"
    )
    with _output(args.output) as fh:
        fh.write(dumps_log(out, header))
    if args.labels_out:
        with open(args.labels_out, "w", encoding="utf-8") as fh:
            write_labels(new_labels, fh)
    print(f"inject: {sum(new_labels)} injected of {len(out)} frames", file=sys.stderr)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    frames, _ = _read_frames(args.input, args)
    win = windowize(frames, args.window_size, args.stride)
    if not 0 <= args.window_index < len(win.windows):
        raise UsageError(f"window index {args.window_index} out of range (log has {len(win.windows)} windows)")
    with _output(args.output) as fh:
        fh.write(to_dot(compute_msg(win.windows[args.window_index]), f"msg_{args.window_index}"))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_log_opts(p, labels: bool = True):
    p.add_argument("--channel", default="can0", help="only use frames from this CAN channel")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", help="abort on the first malformed line")
    mode.add_argument("--lenient", dest="strict", action="store_false", help="skip malformed lines with a warning")
    p.set_defaults(strict=False)
    if labels:
        p.add_argument("--labels", default=None, help="0/1 label sidecar aligned with the log's frames")


def _add_window_opts(p):
    p.add_argument("--window-size", type=int, default=100, help="messages per graph window")
    p.add_argument("--stride", type=int, default=None, help="window stride (default: window size)")
    p.add_argument("--metric", choices=[m.value for m in Metric], default="pearson", help="similarity metric")


def _add_cpd_opts(p):
    p.add_argument("--samples", type=int, default=20_000, help="MCMC draws kept after burn-in")
    p.add_argument("--burn-in", type=int, default=5_000, help="MCMC burn-in iterations")
    p.add_argument("--strength", type=float, default=DEFAULT_STRENGTH_THRESHOLD, help="strength-of-change threshold, percent")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")


def _add_model_opts(p):
    d = ModelConfig()
    p.add_argument("--benign", required=True, help="benign log or similarity CSV")
    p.add_argument("--injected", required=True, help="injected log or similarity CSV")
    p.add_argument("--benign-labels", default=None, help="label sidecar for --benign")
    p.add_argument("--injected-labels", default=None, help="label sidecar for --injected")
    p.add_argument("--features", choices=["metric", "both"], default="metric",
                   help="'metric' feeds --metric only; 'both' feeds cosine and pearson")
    p.add_argument("--input-units", type=int, default=d.input_units, help="units of the first LSTM layer")
    p.add_argument("--hidden-units", type=int, default=d.hidden_units, help="units of the second LSTM layer")
    p.add_argument("--dropout", type=float, default=d.dropout_rate, help="dropout rate")
    p.add_argument("--learning-rate", type=float, default=d.learning_rate, help="Adam learning rate")
    p.add_argument("--batch-size", type=int, default=d.batch_size, help="mini-batch size")
    p.add_argument("--epochs", type=int, default=d.epochs, help="training epochs")
    p.add_argument("--train-fraction", type=_fraction, default="2/3", help="chronological training share")
    p.add_argument("--lookback", type=int, default=d.lookback, help="similarity values per sample")
    p.add_argument("--seed", type=int, default=d.seed, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="canmsg", description="Message-sequence graph intrusion detection for CAN logs.", formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("similarity", help="similarity series of a log as CSV", formatter_class=fmt)
    p.add_argument("input", help="candump log")
    _add_log_opts(p)
    _add_window_opts(p)
    p.add_argument("-o", "--output", default=None, help="CSV path (default: stdout)")
    p.add_argument("--svg", default=None, help="also write a line chart to this SVG path")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("detect-threshold", help="flag pairs below a similarity threshold", formatter_class=fmt)
    p.add_argument("input", help="candump log or similarity CSV")
    _add_log_opts(p)
    _add_window_opts(p)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="similarity cutoff (strict <)")
    p.add_argument("--calibrate", action="store_true", help="pick the most accurate threshold from the labels")
    p.add_argument("-o", "--output", default=None, help="JSON report path (default: stdout)")
    p.add_argument("--verdicts-csv", default=None, help="per-pair verdict CSV path")
    p.set_defaults(func=cmd_detect_threshold)

    p = sub.add_parser("detect-cpd", help="Bayesian change-point detection", formatter_class=fmt)
    p.add_argument("input", help="candump log or similarity CSV")
    _add_log_opts(p)
    _add_window_opts(p)
    _add_cpd_opts(p)
    p.add_argument("-o", "--output", default=None, help="JSON summary path (default: stdout)")
    p.add_argument("--posterior-csv", default=None, help="change-index posterior histogram CSV path")
    p.set_defaults(func=cmd_detect_cpd)

    p = sub.add_parser("train-lstm", help="train the LSTM on a constructed dataset", formatter_class=fmt)
    _add_model_opts(p)
    _add_log_opts(p, labels=False)
    _add_window_opts(p)
    p.add_argument("--checkpoint", required=True, help="where to write the model JSON")
    p.add_argument("--history", default=None, help="per-epoch CSV path")
    p.set_defaults(func=cmd_train_lstm)

    p = sub.add_parser("predict-lstm", help="score the LSTM on a constructed dataset's test split", formatter_class=fmt)
    _add_model_opts(p)
    _add_log_opts(p, labels=False)
    _add_window_opts(p)
    p.add_argument("--checkpoint", default=None, help="model JSON to load (or to write with --train)")
    p.add_argument("--train", action="store_true", help="train a model first")
    p.add_argument("-o", "--output", default=None, help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_predict_lstm)

    p = sub.add_parser("eval", help="sweep window sizes, metrics and detectors over a labelled log", formatter_class=fmt)
    p.add_argument("input", help="candump log")
    _add_log_opts(p)
    p.add_argument("--window-sizes", type=lambda s: [int(x) for x in s.split(",")], default=[100],
                   help="comma-separated window sizes")
    p.add_argument("--metrics", type=lambda s: s.split(","), default=["cosine", "pearson"], help="comma-separated metrics")
    p.add_argument("--detectors", type=lambda s: s.split(","), default=["threshold", "cpd"],
                   help="comma-separated detectors: threshold, cpd, lstm")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="similarity cutoff")
    p.add_argument("--calibrate", action="store_true", help="calibrate the threshold per run")
    p.add_argument("--checkpoint", default=None, help="LSTM model JSON for the lstm detector")
    _add_cpd_opts(p)
    p.add_argument("-o", "--output", default=None, help="JSON report path (default: stdout)")
    p.add_argument("--sweep-csv", default=None, help="window x metric x detector CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", help="synthesize a benign Markov log", formatter_class=fmt)
    p.add_argument("--n-pids", type=int, default=10, help="PID alphabet size")
    p.add_argument("--length", type=int, default=10_000, help="frames to emit")
    p.add_argument("--dominant", type=float, default=0.995, help="probability of the scheduled next PID")
    p.add_argument("--alternatives", type=int, default=2, help="deviation targets per PID")
    p.add_argument("--inter-arrival", type=float, default=0.001, help="mean seconds between frames")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--channel", default="can0", help="channel name written to the log")
    p.add_argument("-o", "--output", default=None, help="log path (default: stdout)")
    p.add_argument("--labels-out", default=None, help="write an all-zero label sidecar here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("inject", help="insert fabricated frames into a log", formatter_class=fmt)
    p.add_argument("input", help="candump log")
    _add_log_opts(p)
    p.add_argument("--target-pid", default=ALIEN_PID, help="PID of the fabricated frames")
    p.add_argument("--payload", default="FFFF", help="payload hex; odd lengths are left-padded")
    p.add_argument("--rate", type=int, default=1, help="one fabricated frame after every RATE legitimate frames")
    p.add_argument("--start", type=int, default=0, help="first frame ordinal of the injection interval")
    p.add_argument("--end", type=int, default=None, help="end of the interval, exclusive (default: end of log)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for timestamp jitter")
    p.add_argument("--jitter", action="store_true", help="random timestamps inside each gap instead of midpoints")
    p.add_argument("-o", "--output", default=None, help="log path (default: stdout)")
    p.add_argument("--labels-out", default=None, help="label sidecar path")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("export-dot", help="one window's graph in DOT format", formatter_class=fmt)
    p.add_argument("input", help="candump log")
    _add_log_opts(p, labels=False)
    p.add_argument("--window-size", type=int, default=100, help="messages per graph window")
    p.add_argument("--stride", type=int, default=None, help="window stride (default: window size)")
    p.add_argument("--window-index", type=int, default=0, help="which window to export")
    p.add_argument("-o", "--output", default=None, help="DOT path (default: stdout)")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, *_CONFIG_ERRORS) as exc:
        print(f"canmsg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CanMsgError, OSError) as exc:
        print(f"canmsg {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # bad option values rejected by a constructor (rate < 1, threshold outside [-1, 1], ...)
        print(f"canmsg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

if __name__ == "__main__":
    sys.exit(main())
