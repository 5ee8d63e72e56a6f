"""Command-line entry point: ``disentext <command> [flags]``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from . import checkpoint as ckpt_io
from .config import ConfigError, load_config
from .corpus import CorpusError, read_corpus

log = logging.getLogger("disentext")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _existing(flag):
    def check(value):
        if not Path(value).exists():
            raise argparse.ArgumentTypeError(f"{flag}: no such file: {value}")
        return value

    return check


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="disentext", description="Disentangled style/content text autoencoder.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--seed", type=int, default=None,
                        help="master random seed (train: overrides the config value; default 0 elsewhere)")
        return sp

    sp = add("train", "Train a model from a config file.")
    sp.add_argument("--config", required=True, type=_existing("--config"), help="config file (key = value lines)")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--resume", type=_existing("--resume"), help="checkpoint to continue training from")
    sp.add_argument("--epochs", type=int, help="override the configured epoch budget")

    sp = add("transfer", "Transfer sentences to a target style.")
    sp.add_argument("--model", required=True, type=_existing("--model"), help="model checkpoint")
    sp.add_argument("--input", required=True, type=_existing("--input"),
                    help="sentences: label<TAB>text lines, or plain lines")
    sp.add_argument("--target-style", required=True, choices=["0", "1", "flip"],
                    help="target label, or 'flip' to use the opposite of each input label")
    sp.add_argument("--out", required=True, help="output TSV (source, target, generated)")

    sp = add("eval", "Score transferred sentences.")
    sp.add_argument("--model", required=True, type=_existing("--model"), help="model checkpoint")
    sp.add_argument("--test", required=True, type=_existing("--test"),
                    help="transfer TSV, or a labelled corpus (transferred to the opposite label first)")
    sp.add_argument("--metrics", default="all",
                    help="all, or a comma list of overlap, cosine, fluency, accuracy")
    sp.add_argument("--classifier", choices=["cnn", "lexicon"], default="cnn",
                    help="style classifier for accuracy")
    sp.add_argument("--train-corpus", type=_existing("--train-corpus"),
                    help="corpus for the language model and classifier (default: the model's)")
    sp.add_argument("--out", required=True, help="report TSV; per-sentence scores go next to it")

    sp = add("probe", "Linear probes of style information in each latent subspace.")
    sp.add_argument("--model", required=True, type=_existing("--model"), help="model checkpoint")
    sp.add_argument("--corpus", required=True, type=_existing("--corpus"), help="labelled corpus")
    sp.add_argument("--out", help="also write the table to this TSV")

    sp = add("export", "Export latent vectors and 2-D projections.")
    sp.add_argument("--model", required=True, type=_existing("--model"), help="model checkpoint")
    sp.add_argument("--corpus", type=_existing("--corpus"), help="labelled corpus (default: the model's)")
    sp.add_argument("--out", required=True, help="output TSV")

    sp = add("gen-toy", "Write a synthetic style-marked corpus and a matching config.")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--templates", type=int, default=4, help="number of content templates")
    sp.add_argument("--per-label", type=int, default=100, help="sentences per template and label")
    sp.add_argument("--name", default="toy", help="file name stem")
    return p


def _read_input(path):
    """Labelled TSV if every line has a label column, else plain sentences."""
    try:
        return read_corpus(path)
    except CorpusError:
        lines = [l.rstrip("\n") for l in open(path, encoding="utf-8")]
        texts = [l for l in lines if l.strip()]
        if not texts:
            raise
        return texts, None


def cmd_train(args):
    from .pipeline import final_checkpoint, write_style_estimates
    from .training import train

    overrides = {"seed": args.seed} if args.seed is not None else None
    cfg = load_config(args.config, overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trainer = train(cfg, out_dir=out, resume=args.resume, epochs=args.epochs)
    ck, estimates = final_checkpoint(trainer)
    ckpt_io.save(ck, out / "model.ckpt")
    write_style_estimates(out / "style-estimates.tsv", estimates)
    print(f"trained {trainer.epoch} epochs; model written to {out / 'model.ckpt'}")


def cmd_transfer(args):
    from .pipeline import load_bundle, run_transfer, write_transfer

    bundle = load_bundle(args.model)
    texts, labels = _read_input(args.input)
    if args.target_style == "flip":
        if labels is None:
            raise UsageError("--target-style flip needs a labelled --input")
        targets = [1 - y for y in labels]
    else:
        targets = [int(args.target_style)] * len(texts)
    generated = run_transfer(bundle, texts, targets)
    write_transfer(args.out, texts, targets, generated)
    print(f"wrote {len(generated)} sentences to {args.out}")


def cmd_eval(args):
    from .pipeline import (METRICS, evaluate, is_transfer_file, load_bundle, read_transfer,
                           run_transfer, write_report)

    metrics = METRICS if args.metrics == "all" else tuple(m.strip() for m in args.metrics.split(","))
    bad = set(metrics) - set(METRICS)
    if bad:
        raise UsageError(f"--metrics: unknown metric(s) {', '.join(sorted(bad))}")
    bundle = load_bundle(args.model)
    if is_transfer_file(args.test):
        sources, targets, generated = read_transfer(args.test)
    else:
        sources, labels = read_corpus(args.test)
        targets = [1 - y for y in labels]
        generated = run_transfer(bundle, sources, targets)
    train_corpus = read_corpus(args.train_corpus) if args.train_corpus else None
    report, rows = evaluate(bundle, sources, targets, generated, metrics, args.classifier,
                            seed=args.seed or 0, train_corpus=train_corpus)
    per = write_report(args.out, report, rows)
    for k, v in report.items():
        print(f"{k}\t{v:.6f}")
    print(f"per-sentence scores: {per}")


def cmd_probe(args):
    from .pipeline import load_bundle, probe_model

    bundle = load_bundle(args.model)
    texts, labels = read_corpus(args.corpus)
    results = probe_model(bundle, texts, labels, seed=args.seed or 0)
    lines = ["subspace\ttrain_accuracy\ttest_accuracy\tmajority"]
    lines += [f"{r.subspace}\t{r.train_accuracy:.4f}\t{r.test_accuracy:.4f}\t{r.majority:.4f}"
              for r in results.values()]
    print("\n".join(lines))
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_export(args):
    from .pipeline import export_model_latents, load_bundle

    bundle = load_bundle(args.model)
    texts, labels = read_corpus(args.corpus) if args.corpus else bundle.training_corpus()
    export_model_latents(bundle, texts, labels, args.out)
    print(f"wrote {args.out}")


def cmd_gen_toy(args):
    from .toy import ToyCorpusSpec, write_toy_config, write_toy_corpus

    seed = args.seed or 0
    spec = ToyCorpusSpec(n_templates=args.templates, per_label=args.per_label, seed=seed)
    paths = write_toy_corpus(spec, args.out, args.name)
    cfg = write_toy_config(paths, Path(args.out) / f"{args.name}.cfg", seed=seed)
    print(f"wrote {paths['corpus']} and {cfg}")


COMMANDS = {
    "train": cmd_train,
    "transfer": cmd_transfer,
    "eval": cmd_eval,
    "probe": cmd_probe,
    "export": cmd_export,
    "gen-toy": cmd_gen_toy,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {args.command}: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"error: {args.command}: config: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - reported as a structured runtime failure
        log.debug("traceback", exc_info=True)
        print(f"error: {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
