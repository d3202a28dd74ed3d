"""Operator commands: gaze9 gen-data | train | eval | simulate | type | serve.

Every command takes explicit paths and seeds, so two runs with the same
flags produce the same artifacts (timestamps only appear in dedicated
log fields).  Exit codes: 0 success, 2 usage, 3 missing input path,
4 malformed input file, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_MALFORMED = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaze9",
        description="eye-typing toolkit: data, training, filtering, typing, serving")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="render a synthetic eye-strip dataset")
    p.add_argument("--dataset", required=True, help="output directory")
    p.add_argument("--train", type=int, default=200, metavar="N",
                   help="training images per class (default 200)")
    p.add_argument("--val", type=int, default=50, metavar="N")
    p.add_argument("--test-known", type=int, default=50, metavar="N")
    p.add_argument("--test-unknown", type=int, default=50, metavar="N")
    p.add_argument("--width", type=int, default=128, choices=(64, 128))
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="fit the classifier on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True, help="output weight file")
    p.add_argument("--history", help="training-history CSV "
                                     "(default: alongside the weights)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--steps-per-epoch", type=int,
                   help="batches per epoch (default: the full expanded pool)")
    p.add_argument("--no-augment", action="store_true",
                   help="train on raw strips only")

    p = sub.add_parser("eval", help="report top-1/top-2 accuracy per split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--split", action="append",
                   help="split to evaluate (repeatable; default: every split)")
    p.add_argument("--report", help="also write the reports as JSON")

    p = sub.add_parser("simulate", help="run a noisy gaze script through the filter")
    p.add_argument("--script", help="script JSON (default: the 10-state sweep)")
    p.add_argument("--out", required=True, help="trace CSV (frame, raw, filtered)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity", type=int, default=16)

    p = sub.add_parser("type", help="replay a filtered stream into the keyboard")
    p.add_argument("--script", required=True,
                   help="replay CSV (frame, state) or a session log (.jsonl)")
    p.add_argument("--reference", default="", help="intended text for error rate")
    p.add_argument("--fps", type=float, default=29.0)

    p = sub.add_parser("serve", help="run the typing service over TCP")
    p.add_argument("--listen", default="127.0.0.1:7910", metavar="HOST:PORT")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--weights", help="classifier weights (enables frame input)")
    p.add_argument("--log-dir", help="write per-connection session logs here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"gaze9 {args.command}: missing path: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"gaze9 {args.command}: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


def _cmd_gen_data(args) -> int:
    from .synth import default_params, generate_dataset, unknown_params

    counts = {"train": args.train, "val": args.val,
              "test-known": args.test_known, "test-unknown": args.test_unknown}
    counts = {split: n for split, n in counts.items() if n > 0}
    manifest = generate_dataset(args.dataset, counts,
                                params=default_params(args.width),
                                unknown=unknown_params(args.width),
                                master_seed=args.seed)
    for split in counts:
        n = len(manifest.split(split))
        print(f"{split}: {n} images")
    print(f"dataset written to {args.dataset}")
    return EXIT_OK


def _cmd_train(args) -> int:
    from .augment import AugmentConfig
    from .estimator import GazeDirectionClassifier, write_history_csv
    from .synth import load_manifest, load_split

    manifest = load_manifest(Path(args.dataset) / "manifest.jsonl")
    X_train, y_train = load_split(manifest, "train")
    validation = None
    if manifest.split("val"):
        validation = load_split(manifest, "val")

    clf = GazeDirectionClassifier(
        width=X_train.shape[2],
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        augment=None if args.no_augment else AugmentConfig(),
        steps_per_epoch=args.steps_per_epoch,
        seed=args.seed,
        verbose=1)
    clf.fit(X_train, y_train, validation=validation)

    weights = Path(args.weights)
    weights.parent.mkdir(parents=True, exist_ok=True)
    clf.save_weights(weights)
    history = Path(args.history) if args.history \
        else weights.with_name(weights.stem + "-history.csv")
    write_history_csv(clf.history_, history)
    last = clf.history_[-1]
    best = max((h.get("val_top1", 0.0) for h in clf.history_), default=0.0)
    print(f"trained {len(clf.history_)} epochs; final loss {last['loss']:.4f}"
          + (f"; best val top-1 {best:.4f}" if validation else ""))
    print(f"weights written to {weights}")
    print(f"history written to {history}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .estimator import GazeDirectionClassifier, evaluate
    from .synth import load_manifest, load_split

    manifest = load_manifest(Path(args.dataset) / "manifest.jsonl")
    clf = GazeDirectionClassifier.from_weights(args.weights)
    splits = args.split or sorted({r.split for r in manifest.records})
    reports = {}
    print(f"{'split':<14} {'top1 acc.':>9} {'top2 acc.':>9} {'images':>7}")
    for split in splits:
        X, y = load_split(manifest, split)
        report = evaluate(clf, X, y)
        reports[split] = report
        print(f"{split:<14} {report.top1:>8.2f}% {report.top2:>8.2f}% "
              f"{sum(report.counts):>7}")
    if args.report:
        payload = {split: json.loads(r.to_json()) for split, r in reports.items()}
        Path(args.report).write_text(json.dumps(payload, indent=2))
        print(f"report written to {args.report}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    from .filtering import (NoiseScript, filter_stream, simulate_sequence,
                            sweep_script, write_trace_csv)

    if args.script:
        script = NoiseScript.from_json(Path(args.script).read_text())
    else:
        script = sweep_script(dwell_frames=40)
    raw = simulate_sequence(script, args.seed)
    filtered = list(filter_stream(raw, args.capacity))
    write_trace_csv(args.out, raw, filtered)
    distinct = sorted({f for f in filtered if f is not None})
    print(f"{len(raw)} frames, filtered states {distinct}")
    print(f"trace written to {args.out}")
    return EXIT_OK


def _read_replay(path) -> list[int | None]:
    path = Path(path)
    if path.suffix == ".jsonl":
        from .service import read_log
        _, records = read_log(path)
        return [r["filtered"] for r in records]
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty replay file")
    header, body = rows[0], rows[1:]
    for column in ("filtered", "state"):
        if column in header:
            idx = header.index(column)
            return [None if row[idx] == "" else int(row[idx]) for row in body]
    raise ValueError(f"{path}: no 'state' or 'filtered' column in the header")


def _cmd_type(args) -> int:
    from .t9 import Keyboard, compute_metrics, type_script

    stream = _read_replay(args.script)
    text = type_script(Keyboard(), stream)
    print(f"text: {text!r}")
    if stream:
        metrics = compute_metrics(text, args.reference, len(stream) / args.fps)
        print(f"letters: {metrics.letters}")
        print(f"letters per minute: {metrics.letters_per_minute:.2f}")
        print(f"error rate: {metrics.error_rate:.4f}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import KeyboardService, SessionConfig

    if args.config:
        config = SessionConfig.from_file(args.config)
    else:
        config = SessionConfig()
    if args.weights:
        from dataclasses import replace
        config = replace(config, weights=args.weights)
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"--listen wants HOST:PORT, got {args.listen!r}")
    server = KeyboardService((host, int(port)), config, log_dir=args.log_dir)
    actual = server.server_address
    print(f"listening on {actual[0]}:{actual[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


_COMMANDS = {"gen-data": _cmd_gen_data, "train": _cmd_train, "eval": _cmd_eval,
             "simulate": _cmd_simulate, "type": _cmd_type, "serve": _cmd_serve}


if __name__ == "__main__":
    sys.exit(main())
