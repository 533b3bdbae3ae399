"""Command-line entry point: gen | train | eval | classify | serve."""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import classifiers, evaluation
from .errors import (AirPenError, InvalidArgumentError, ModelError,
                     NumericError, ParseError)
from .gestures import Dataset, NoiseParams, generate_dataset, load_dataset, save_dataset
from .streaming import DEFAULT_THRESHOLD

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3
EXIT_MODEL = 4

MODEL_KINDS = ("dtw_knn", "svm", "lstm", "bilstm", "fingertip")

log = logging.getLogger("airpen")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airpen",
                                     description="fingertip gesture recognition toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded synthetic dataset")
    gen.add_argument("--out", required=True, help="output dataset directory")
    gen.add_argument("--per-class-train", type=int, default=100)
    gen.add_argument("--per-class-test", type=int, default=24)
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--jitter", type=float, default=None, help="override jitter sigma")

    train = sub.add_parser("train", help="train a model on a dataset directory")
    train.add_argument("--model", required=True, choices=MODEL_KINDS)
    train.add_argument("--data", help="dataset directory (classifier kinds)")
    train.add_argument("--out", required=True, help="model file to write")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--epochs", type=int, default=None)
    train.add_argument("--n-train", type=int, default=2000,
                       help="render count for --model fingertip")

    ev = sub.add_parser("eval", help="evaluate trained models against a dataset")
    ev.add_argument("--data", required=True)
    ev.add_argument("--models", required=True, nargs="+",
                    help="model files to compare")
    ev.add_argument("--out", help="report directory (tsv/json/figures)")
    ev.add_argument("--repeats", type=int, default=30)

    cls = sub.add_parser("classify", help="classify one trajectory file")
    cls.add_argument("--model", required=True, help="trained model file")
    cls.add_argument("--input", required=True, help="trajectory text file (first line used)")
    cls.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)

    serve = sub.add_parser("serve", help="run the streaming service")
    serve.add_argument("--model", required=True, help="trained model file")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    serve.add_argument("--mode", choices=("manual", "dwell"), default="manual")
    return parser


def _load_data(path: str) -> Dataset:
    if not os.path.isdir(path):
        raise FileNotFoundError(f"dataset directory not found: {path}")
    return load_dataset(path)


def cmd_gen(args) -> int:
    noise = NoiseParams() if args.jitter is None else NoiseParams(jitter_sigma=args.jitter)
    ds = generate_dataset(args.per_class_train, args.per_class_test, args.seed, noise)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds.train)} train / {len(ds.test)} test samples to {args.out}")
    return 0


def cmd_train(args) -> int:
    if args.model == "fingertip":
        from .fingertip import FingertipTrainConfig, save_fingertip, fingertip_train
        cfg = FingertipTrainConfig()
        if args.epochs:
            cfg.epochs = args.epochs
        net, history = fingertip_train(
            cfg, args.n_train, args.seed,
            log=lambda e, l: print(f"epoch {e}: loss {l:.3f}"))
        save_fingertip(net, history, args.out)
    else:
        if not args.data:
            raise InvalidArgumentError("--data is required for classifier kinds")
        ds = _load_data(args.data)
        cfg = classifiers.TrainConfig(kind=args.model, seed=args.seed)
        if args.epochs:
            cfg.epochs = args.epochs
        model = classifiers.train_model(cfg, ds)
        history = getattr(model, "loss_history", [])
        for epoch, loss in enumerate(history):
            print(f"epoch {epoch}: loss {loss:.4f}")
        classifiers.save_model(model, args.out)
    print(f"wrote model to {args.out}")
    return 0


def cmd_eval(args) -> int:
    ds = _load_data(args.data)
    models = {}
    for path in args.models:
        if not os.path.exists(path):
            raise FileNotFoundError(f"model file not found: {path}")
        model = classifiers.load_model(path)
        models[model.kind] = model
    text, _ = evaluation.compare_report(models, ds, args.out, args.repeats)
    print(text)
    if args.out:
        print(f"report written to {args.out}")
    return 0


def cmd_classify(args) -> int:
    from .streaming import decide
    from .trajectory import parse_trajectory_line
    if not os.path.exists(args.input):
        raise FileNotFoundError(f"trajectory file not found: {args.input}")
    model = classifiers.load_model(args.model)
    with open(args.input) as fh:
        line = fh.readline()
    raw, label = parse_trajectory_line(line, 1)
    pred = model.predict(raw)
    decision = decide(pred, args.threshold)
    name = decision.name if decision is not None else "Unclassified"
    print(f"decision: {name}")
    print(f"confidence: {pred.confidence:.4f} (threshold {args.threshold})")
    print(f"latency_ms: {model.last_predict_ms:.2f}")
    top = np.argsort(pred.probs)[::-1][:3]
    from .gestures import CLASS_NAMES
    print("top: " + ", ".join(f"{CLASS_NAMES[i]}={pred.probs[i]:.3f}" for i in top))
    if label:
        print(f"true label: {label}")
    return 0


def cmd_serve(args) -> int:
    from .service import run_service
    run_service(args.host, args.port, args.model, threshold=args.threshold,
                mode=args.mode)
    return 0


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "eval": cmd_eval,
            "classify": cmd_classify, "serve": cmd_serve}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("AIRPEN_LOG", "WARNING").upper(),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return COMMANDS[args.command](args)
    except (FileNotFoundError, OSError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except NumericError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except AirPenError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
