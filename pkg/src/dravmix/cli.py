"""``dravmix`` command-line entry point."""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

from .corpus import (Language, Split, VariantId, build_variant, corpus_stats,
                     dump_tsv, load_tsv, preprocess_for_translit, read_tsv, write_tsv)
from .errors import DravmixError

log = logging.getLogger("dravmix")


def _out_stream(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


def _read_input(path, lang, header, split="train"):
    if path in (None, "-"):
        return load_tsv(sys.stdin.buffer, lang, Split(split), header=header)
    return read_tsv(path, lang, Split(split), header=header)


def cmd_ingest(args):
    corpus = _read_input(args.input, args.lang, args.header, args.split)
    if args.preprocess:
        corpus = preprocess_for_translit(corpus)
    stats = corpus_stats(corpus)
    summary = {"language": corpus.language.value, "split": corpus.split.value,
               "total": stats.total,
               "per_class": {label.spelling(corpus.language): n for label, n in stats.per_class.items()}}
    print(json.dumps(summary, ensure_ascii=False), file=sys.stderr if args.out == "-" else sys.stdout)
    if args.out:
        with _out_stream(args.out) as fh:
            dump_tsv(corpus, fh)


def cmd_script_tag(args):
    from .script import tag_tokens

    for line in sys.stdin:
        for tok in tag_tokens(line):
            sys.stdout.write(f"{tok.token}\t{tok.tag.value}\n")


def cmd_translit(args):
    from .translit import RuleTable, Transliterator, native_lines, transliterate_corpus
    from .translit.lm import CharLM
    from .translit.rules import SCRIPT_OF

    lang = Language.parse(args.lang)
    corpus = _read_input(args.input, lang, args.header)
    if not args.no_preprocess:
        corpus = preprocess_for_translit(corpus)
    rules = RuleTable.from_file(args.rules, lang) if args.rules else None
    model = Transliterator(lang, rules=rules, order=args.order, alpha=args.alpha,
                           beam=args.beam, k=args.k)
    if args.lm and args.lm.endswith(".json"):
        model.fit(None)
        model.lm_ = CharLM.load(args.lm)
    elif args.lm:
        model.fit(Path(args.lm).read_text(encoding="utf-8").splitlines())
    else:
        model.fit(native_lines(corpus.texts, SCRIPT_OF[lang]) or None)
    with _out_stream(args.output) as fh:
        dump_tsv(transliterate_corpus(corpus, model), fh)


def cmd_translate(args):
    from .translate import TranslationCache, TranslatorSpec, translate_corpus

    corpus = _read_input(args.input, args.lang, args.header)
    spec = TranslatorSpec.from_config(
        {"kind": args.kind, "command": args.command, "dictionary": args.dictionary,
         "timeout": args.timeout})
    cache = TranslationCache(args.cache) if args.cache else None
    out = translate_corpus(corpus, spec, cache)
    with _out_stream(args.output) as fh:
        dump_tsv(out, fh)


def cmd_build_variants(args):
    lang = Language.parse(args.lang)
    base = read_tsv(args.base, lang, header=args.header)
    translit = read_tsv(args.translit, lang) if args.translit else None
    translated = read_tsv(args.translated, lang) if args.translated else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for var in VariantId:
        if var in (VariantId.TRAI, VariantId.MERGED) and translit is None:
            continue
        if var in (VariantId.TRAA, VariantId.MERGED) and translated is None:
            continue
        corpus = build_variant(var, base, translit, translated)
        write_tsv(corpus, out / f"{var.value}.tsv")
        print(f"{var.value}\t{len(corpus)}")


def _space_and_params(args, kind):
    from .learn import FeatureSpace
    from .runner import ExperimentConfig

    space, params = FeatureSpace(), {}
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        space = cfg.features
        params = dict(cfg.nb if kind == "nb" else cfg.mlp)
        if kind == "mlp":
            params["random_state"] = cfg.seed
    return space, params


def cmd_train(args):
    from .learn import MLPClassifier, NaiveBayesClassifier, featurize_many, save_model

    data = Path(args.data)
    if data.is_dir():
        data = data / f"{VariantId(args.variant).value}.tsv"
    corpus = read_tsv(data, args.lang, header=args.header)
    space, params = _space_and_params(args, args.model)
    if args.model == "nb":
        if args.alpha is not None:
            params["alpha"] = args.alpha
        model = NaiveBayesClassifier(**params)
    else:
        overrides = {"random_state": args.seed, "epochs": args.epochs, "lr": args.lr,
                     "stlr_ratio": args.stlr_ratio, "cut_frac": args.cut_frac,
                     "decay": args.decay, "weight_decay": args.weight_decay}
        params.update({k: v for k, v in overrides.items() if v is not None})
        model = MLPClassifier(**params)
    model.fit(featurize_many(corpus.texts, space), [int(s.label) for s in corpus.samples])
    save_model(args.output, model, space)
    print(f"trained {args.model} on {len(corpus)} samples ({data}) -> {args.output}")


def cmd_evaluate(args):
    from .learn import featurize_many, load_model
    from .metrics import confusion_matrix, per_class_metrics, weighted_average

    model, space = load_model(args.model)
    corpus = read_tsv(args.test, args.lang, Split.TEST, header=args.header)
    pred = model.predict(featurize_many(corpus.texts, space))
    per_class = per_class_metrics(confusion_matrix(corpus.labels, pred))
    p, r, f1 = weighted_average(per_class)
    print(f"{'class':<16}{'P':>8}{'R':>8}{'F1':>8}{'support':>9}")
    for c in per_class:
        print(f"{c.label.spelling(corpus.language):<16}{c.precision:8.4f}{c.recall:8.4f}"
              f"{c.f1:8.4f}{c.support:9d}")
    print(f"{'weighted':<16}{p:8.4f}{r:8.4f}{f1:8.4f}{len(corpus):9d}")


def cmd_grid(args):
    from .metrics import render_report
    from .runner import ExperimentConfig, run_grid

    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output_dir = Path(args.out)
    if args.jobs:
        cfg.jobs = args.jobs
    report, manifest = run_grid(cfg)
    print(render_report(report))
    cached = sum(s.cached for s in manifest.stages)
    log.info("wrote %s (%d stages, %d cached)", Path(cfg.output_dir) / "manifest.json",
             len(manifest.stages), cached)


def cmd_report(args):
    from .metrics import Report, render_report

    text = Path(args.metrics).read_text(encoding="utf-8")
    print(render_report(Report.from_csv(text)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dravmix", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def corpus_args(p, lang_required=True):
        p.add_argument("--lang", required=lang_required, help="Kannada, Tamil or Malayalam")
        p.add_argument("--header", action="store_true", help="skip the first line of input TSVs")

    p = sub.add_parser("ingest", help="validate a corpus TSV and print class counts")
    p.add_argument("input", nargs="?")
    corpus_args(p)
    p.add_argument("--split", choices=[s.value for s in Split], default="train")
    p.add_argument("--preprocess", action="store_true", help="drop not-language rows, strip tags")
    p.add_argument("--out", help="write the normalised corpus TSV here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("script-tag", help="tag stdin tokens by writing system")
    p.set_defaults(func=cmd_script_tag)

    p = sub.add_parser("translit", help="transliterate Roman-script tokens of a corpus")
    p.add_argument("input", nargs="?")
    corpus_args(p)
    p.add_argument("--rules", help="rule table file (default: built-in table)")
    p.add_argument("--lm", help="native-script text for the reranking LM, or a saved .json LM")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--beam", type=int, default=16)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--no-preprocess", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_translit)

    p = sub.add_parser("translate", help="translate a corpus through a translator")
    p.add_argument("input", nargs="?")
    corpus_args(p)
    p.add_argument("--kind", choices=["identity", "dictionary", "external"], default="identity")
    p.add_argument("--command", help="external translator command line")
    p.add_argument("--dictionary", help="source<TAB>target dictionary file")
    p.add_argument("--timeout", type=float)
    p.add_argument("--cache", help="translation cache file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("build-variants", help="write TRA/TRAI/TRAA/MERGED corpora")
    corpus_args(p)
    p.add_argument("--base", required=True)
    p.add_argument("--translit")
    p.add_argument("--translated")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_variants)

    p = sub.add_parser("train", help="train one classifier")
    corpus_args(p)
    p.add_argument("--model", choices=["nb", "mlp"], required=True)
    p.add_argument("--data", required=True, help="variant TSV, or a build-variants directory")
    p.add_argument("--variant", default="TRA", choices=[v.value for v in VariantId])
    p.add_argument("--config", help="take feature space and model params from a grid config")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--stlr-ratio", type=float)
    p.add_argument("--cut-frac", type=float)
    p.add_argument("--decay", type=float)
    p.add_argument("--weight-decay", type=float, help="decoupled weight decay (AdamW)")
    p.add_argument("--alpha", type=float, help="naive Bayes smoothing")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="per-class and weighted P/R/F1 of a saved model")
    corpus_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("test")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("grid", help="run the full language x model x variant grid")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", help="render a metrics.csv as the results table")
    p.add_argument("metrics")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    """Run one subcommand; returns 0 on success, 1 on a pipeline error."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DravmixError, ValueError, OSError) as exc:
        print(f"dravmix {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
