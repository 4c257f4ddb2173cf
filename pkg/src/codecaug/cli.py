"""Command-line entry point.

One binary, subcommand style: one-shot operations take flags, the
experiment runners take a JSON config. Exit codes: 0 success, 1 usage
error (bad flags or codec specs), 2 runtime error. stdout carries
progress lines; machine-readable artifacts go to files.
"""

import argparse
import os
import sys

import numpy as np

from .audio.manifest import build_synthetic_dataset, load_manifest
from .audio.wavio import read_wav, write_wav
from .classifier import (
    ModelConfig,
    TrainConfig,
    evaluate,
    init_model,
    load_model,
    save_model,
    train,
)
from .codecs import parse_codec_spec, transcode
from .errors import CodecSpecError, CodecaugError
from .features import FeatureCache, FeatureParams, log_mel
from .pipeline import (
    load_experiment_config,
    render_report,
    report_from_json,
    run_experiment_a_multiseed,
    run_experiment_b,
    write_report,
)
from .quality import odg_proxy


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_feature_flags(sub):
    sub.add_argument("--n-fft", type=int, default=2048)
    sub.add_argument("--hop", type=int, default=1024)
    sub.add_argument("--n-mels", type=int, default=64)
    sub.add_argument("--sample-rate", type=int, default=44100)


def _feature_params(args) -> FeatureParams:
    params = FeatureParams(
        sample_rate=args.sample_rate,
        n_fft=args.n_fft,
        hop=args.hop,
        n_mels=args.n_mels,
        fmax=args.sample_rate / 2.0,
    )
    params.validate()
    return params


def build_parser() -> _Parser:
    parser = _Parser(prog="codecaug", description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker budget for parallel stages (advisory)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth-data", help="render a balanced synthetic scene dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--train-per-class", type=int, default=100)
    p.add_argument("--eval-per-class", type=int, default=40)
    p.add_argument("--duration", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--sample-rate", type=int, default=44100)

    p = sub.add_parser("transcode", help="encode+decode a WAV through a codec")
    p.add_argument("--codec", required=True, metavar="SPEC",
                   help='codec spec, e.g. "ptc-mp3@32" or "sbc@64;bitpool=20"')
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("features", help="extract log-mel features to an .npz")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_feature_flags(p)

    p = sub.add_parser("train", help="train a classifier on a dataset manifest")
    p.add_argument("--data", required=True, metavar="META_TSV")
    p.add_argument("--audio-root", default=None)
    p.add_argument("--out", required=True, metavar="MODEL")
    p.add_argument("--outputs", type=int, choices=(3, 10), default=10)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--crop-frames", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache", default=None, help="feature cache directory")
    _add_feature_flags(p)

    p = sub.add_parser("eval", help="evaluate a model on a manifest's eval split")
    p.add_argument("--model", required=True)
    p.add_argument("--model3", default=None, help="optional 3-category model for fusion")
    p.add_argument("--data", required=True, metavar="META_TSV")
    p.add_argument("--audio-root", default=None)
    p.add_argument("--codec", default=None, metavar="SPEC")
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--confusion", default=None, help="write the confusion matrix CSV here")
    _add_feature_flags(p)

    p = sub.add_parser("quality", help="score a test clip against a reference")
    p.add_argument("reference")
    p.add_argument("test", nargs="?", default=None)
    p.add_argument("--codec", default=None, metavar="SPEC",
                   help="transcode the reference instead of reading a test file")

    p = sub.add_parser("exp-a", help="run Experiment A from a JSON config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("exp-b", help="run Experiment B from a JSON config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("report", help="re-render a report.json")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=("csv", "json", "markdown"), default="markdown")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    return parser


def _cmd_synth_data(args) -> int:
    manifest = build_synthetic_dataset(
        args.train_per_class, args.eval_per_class, args.duration, args.seed,
        args.out, sample_rate=args.sample_rate,
    )
    print(f"wrote {len(manifest.items)} clips under {args.out}")
    return 0


def _cmd_transcode(args) -> int:
    spec = parse_codec_spec(args.codec)
    clip = transcode(spec, read_wav(args.input))
    write_wav(args.output, clip)
    print(f"{args.input} -> {args.output} via {spec}")
    return 0


def _cmd_features(args) -> int:
    params = _feature_params(args)
    feats = log_mel(read_wav(args.input), params)
    np.savez(args.out, values=feats.values,
             params=np.array(str(params), dtype=object))
    print(f"{feats.values.shape[0]} frames x {feats.values.shape[1]} bands -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    params = _feature_params(args)
    manifest = load_manifest(args.data, audio_root=args.audio_root)
    config = ModelConfig(input_bands=params.n_mels, n_outputs=args.outputs, seed=args.seed)
    tc = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                     learning_rate=args.learning_rate, seed=args.seed,
                     crop_frames=args.crop_frames)
    cache = FeatureCache(args.cache) if args.cache else None
    model = init_model(config)

    def progress(epoch, loss, acc):
        print(f"epoch {epoch + 1}/{tc.epochs}: loss {loss:.4f} acc {acc:.3f}")

    train(model, manifest, params, tc, cache=cache, progress=progress)
    save_model(model, args.out)
    print(f"saved model to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    params = _feature_params(args)
    manifest = load_manifest(args.data, audio_root=args.audio_root)
    model10 = load_model(args.model)
    model3 = load_model(args.model3, expect_outputs=3) if args.model3 else None
    spec = parse_codec_spec(args.codec) if args.codec else None
    result = evaluate(model10, manifest, params, codec_condition=spec,
                      model3=model3, alpha=args.alpha)
    print(f"accuracy {result.accuracy:.4f} over {int(result.confusion.sum())} clips")
    if args.confusion:
        lines = ["truth\\predicted," + ",".join(result.labels)]
        for label, row in zip(result.labels, result.confusion):
            lines.append(label + "," + ",".join(str(int(v)) for v in row))
        with open(args.confusion, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"confusion matrix -> {args.confusion}")
    return 0


def _cmd_quality(args) -> int:
    ref = read_wav(args.reference)
    if (args.test is None) == (args.codec is None):
        raise CodecSpecError("quality needs exactly one of: a test file, or --codec")
    if args.codec:
        test = transcode(parse_codec_spec(args.codec), ref)
    else:
        test = read_wav(args.test)
    score = odg_proxy(ref, test)
    print(f"nmr_db {score.nmr_db:.3f}  odg {score.odg:.3f}")
    return 0


def _cmd_exp_a(args) -> int:
    cfg = load_experiment_config(args.config)
    report = run_experiment_a_multiseed(
        cfg["manifest"], cfg["eval_codecs"], cfg["feature_params"], cfg["train_config"],
        cfg["seeds"], model_config=cfg["model_config"], alpha=cfg["alpha"],
        with_category_model=cfg["with_category_model"], work_dir=cfg["work_dir"],
        progress=print,
    )
    write_report(report, cfg["out_dir"])
    print(f"report written under {cfg['out_dir']}")
    return 0


def _cmd_exp_b(args) -> int:
    cfg = load_experiment_config(args.config)
    report = run_experiment_b(
        cfg["conditions"], cfg["eval_codecs"], cfg["manifest"], cfg["feature_params"],
        cfg["train_config"], cfg["seeds"], model_config=cfg["model_config"],
        reference=cfg["reference"], alpha=cfg["alpha"],
        with_category_model=cfg["with_category_model"], work_dir=cfg["work_dir"],
        progress=print,
    )
    write_report(report, cfg["out_dir"])
    print(f"report written under {cfg['out_dir']}")
    return 0


def _cmd_report(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        report = report_from_json(fh.read())
    text = render_report(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {args.format} report to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "synth-data": _cmd_synth_data,
    "transcode": _cmd_transcode,
    "features": _cmd_features,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "quality": _cmd_quality,
    "exp-a": _cmd_exp_a,
    "exp-b": _cmd_exp_b,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except CodecSpecError as exc:
        # bad spec strings are argument mistakes, not runtime failures
        print(f"codecaug {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except CodecaugError as exc:
        print(f"codecaug {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"codecaug {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
