"""Experiment grid: languages x {nb, mlp} x {TRA, TRAI, TRAA, MERGED}.

Every stage writes its artifact under ``<output_dir>/cache`` at a path derived
from a content hash of its inputs, so an identical rerun reuses them. The run
manifest records each stage's input hashes, which is how test-set hygiene is
checked: the test file's hash may only appear in evaluation stages.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import platform
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml

from . import __version__
from .corpus import (Corpus, Language, Provenance, Split, VariantId, build_variant, dumps_tsv,
                     preprocess_for_translit, read_tsv, write_tsv)
from .errors import ConfigurationError, DravmixError, RunError
from .learn import FeatureSpace, MLPClassifier, NaiveBayesClassifier, featurize_many, load_model, save_model
from .metrics import Cell, Report, evaluate, render_report
from .translate import TranslationCache, TranslatorSpec, translate_corpus
from .translit import Transliterator, native_lines
from .translit.rules import SCRIPT_OF, RuleTable

log = logging.getLogger(__name__)

MODEL_KINDS = ("nb", "mlp")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    with open(path, "rb") as fh:
        return sha256_bytes(fh.read())


def _key(*parts) -> str:
    blob = json.dumps(parts, sort_keys=True, ensure_ascii=False, default=str).encode("utf-8")
    return sha256_bytes(blob)[:20]


@dataclass
class LanguageData:
    train: Path
    dev: Optional[Path]
    test: Path
    header: bool = False
    rules: Optional[Path] = None
    lm: Optional[Path] = None
    translator: Optional[TranslatorSpec] = None


@dataclass
class ExperimentConfig:
    languages: Dict[Language, LanguageData]
    output_dir: Path
    seed: int = 0
    translator: TranslatorSpec = field(default_factory=TranslatorSpec.identity)
    translit: dict = field(default_factory=lambda: {"k": 4, "beam": 16, "order": 3, "alpha": 0.1})
    features: FeatureSpace = field(default_factory=FeatureSpace)
    nb: dict = field(default_factory=lambda: {"alpha": 1.0})
    mlp: dict = field(default_factory=lambda: {"lr": 1e-2, "epochs": 5})
    models: Tuple[str, ...] = MODEL_KINDS
    jobs: int = 1

    def validate(self) -> None:
        if not self.languages:
            raise ConfigurationError("config lists no languages")
        for lang, data in self.languages.items():
            for name in ("train", "dev", "test", "rules", "lm"):
                path = getattr(data, name)
                if path is not None and not Path(path).is_file():
                    raise ConfigurationError(f"{lang.value}: {name} file not found: {path}")
        unknown = set(self.models) - set(MODEL_KINDS)
        if unknown:
            raise ConfigurationError(f"unknown model kinds {sorted(unknown)}")

    def translator_for(self, lang: Language) -> TranslatorSpec:
        return self.languages[lang].translator or self.translator

    def fingerprint(self) -> str:
        langs = {}
        for lang, d in self.languages.items():
            langs[lang.value] = {
                "train": sha256_file(d.train), "test": sha256_file(d.test),
                "dev": sha256_file(d.dev) if d.dev else None, "header": d.header,
                "rules": sha256_file(d.rules) if d.rules else None,
                "lm": sha256_file(d.lm) if d.lm else None,
                "translator": self.translator_for(lang).id,
            }
        return _key(langs, self.seed, self.translit, self.features.to_dict(), self.nb,
                    self.mlp, list(self.models))

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "ExperimentConfig":
        base = Path(base_dir)

        def path(value):
            if value is None:
                return None
            p = Path(value).expanduser()
            return p if p.is_absolute() else base / p

        def translator(spec):
            if spec is None:
                return None
            spec = dict(spec)
            if spec.get("dictionary"):
                spec["dictionary"] = str(path(spec["dictionary"]))
            return TranslatorSpec.from_config(spec)

        if "languages" not in d:
            raise ConfigurationError("config needs a 'languages' mapping")
        languages = {}
        for name, ld in d["languages"].items():
            try:
                lang = Language.parse(name)
            except ValueError as exc:
                raise ConfigurationError(str(exc)) from None
            for required in ("train", "test"):
                if required not in ld:
                    raise ConfigurationError(f"{lang.value}: missing '{required}' path")
            languages[lang] = LanguageData(
                train=path(ld["train"]), dev=path(ld.get("dev")), test=path(ld["test"]),
                header=bool(ld.get("header", False)), rules=path(ld.get("rules")),
                lm=path(ld.get("lm")), translator=translator(ld.get("translator")))
        defaults = cls(languages, Path("."))
        feats = d.get("features") or {}
        return cls(
            languages=languages,
            output_dir=path(d.get("output_dir", "runs")),
            seed=int(d.get("seed", 0)),
            translator=translator(d.get("translator")) or TranslatorSpec.identity(),
            translit={**defaults.translit, **(d.get("translit") or {})},
            features=FeatureSpace.from_dict({**FeatureSpace().to_dict(), **feats}),
            nb={**defaults.nb, **(d.get("nb") or {})},
            mlp={**defaults.mlp, **(d.get("mlp") or {})},
            models=tuple(d.get("models", MODEL_KINDS)),
            jobs=int(d.get("jobs", 1)),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                d = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(d, base_dir=path.parent)


@dataclass
class StageRecord:
    stage: str
    language: str
    key: str
    inputs: Dict[str, str]
    outputs: List[str]
    cached: bool
    seconds: float
    model: Optional[str] = None
    variant: Optional[str] = None


@dataclass
class RunManifest:
    config_hash: str
    output_dir: str
    started: str = ""
    finished: str = ""
    versions: dict = field(default_factory=dict)
    stages: List[StageRecord] = field(default_factory=list)
    files: List[str] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, rec: StageRecord) -> None:
        with self._lock:
            self.stages.append(rec)
            for p in rec.outputs:
                if p not in self.files:
                    self.files.append(p)

    def add_file(self, path: str) -> None:
        with self._lock:
            if path not in self.files:
                self.files.append(path)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash, "output_dir": self.output_dir,
            "started": self.started, "finished": self.finished, "versions": self.versions,
            "stages": [vars(s) for s in self.stages], "files": sorted(self.files),
        }

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, ensure_ascii=False)
            fh.write("\n")


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def _versions() -> dict:
    import scipy
    import sklearn
    return {"dravmix": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "sklearn": sklearn.__version__}


class _Grid:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.cache_dir = self.out / "cache"
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.translations = TranslationCache(self.cache_dir / "translations.tsv")
        self.manifest = RunManifest(config.fingerprint(), str(self.out), started=_now(),
                                    versions=_versions())

    def rel(self, p: Path) -> str:
        return os.path.relpath(p, self.out)

    def cached_stage(self, stage, lang, key, inputs, target: Path, build, **extra):
        """Run ``build(target)`` unless ``target`` already exists; record either way."""
        t0 = time.perf_counter()
        cached = target.exists()
        if not cached:
            target.parent.mkdir(parents=True, exist_ok=True)
            tmp = target.with_name(target.name + ".tmp")
            build(tmp)
            os.replace(tmp, target)
        self.manifest.record(StageRecord(stage, lang.value, key, inputs, [self.rel(target)],
                                         cached, round(time.perf_counter() - t0, 4), **extra))
        return target

    # -- per-language data stages -------------------------------------------------

    def language_data(self, lang: Language) -> Dict[VariantId, Tuple[Path, str]]:
        cfg = self.config
        data = cfg.languages[lang]
        train_hash = sha256_file(data.train)
        try:
            train = read_tsv(data.train, lang, Split.TRAIN, header=data.header)
        except DravmixError as exc:
            raise RunError("ingest", f"{data.train}: {exc}") from exc

        prep = preprocess_for_translit(train)
        prep_bytes = dumps_tsv(prep).encode("utf-8")
        prep_key = _key("preprocess", train_hash, data.header)
        self.cached_stage(
            "preprocess", lang, prep_key, {"train": train_hash},
            self.cache_dir / "preprocess" / f"{prep_key}.tsv",
            lambda p: p.write_bytes(prep_bytes))

        rules_text = data.rules.read_text(encoding="utf-8") if data.rules else None
        lm_hash = sha256_file(data.lm) if data.lm else None
        tl_key = _key("translit", sha256_bytes(prep_bytes), rules_text, lm_hash, cfg.translit)

        def do_translit(target):
            model = self._transliterator(lang, data, train, rules_text)
            samples = []
            for s in prep.samples:
                try:
                    text = model.transform([s.text])[0]
                except Exception as exc:
                    raise RunError("translit", str(exc), sample_id=s.id) from exc
                samples.append(replace(s, text=text, provenance=Provenance.TRANSLITERATED))
            write_tsv(Corpus(samples, lang), target)

        tl_path = self.cached_stage(
            "translit", lang, tl_key, {"preprocessed": sha256_bytes(prep_bytes)},
            self.cache_dir / "translit" / f"{tl_key}.tsv", do_translit)
        translit = read_tsv(tl_path, lang)

        spec = cfg.translator_for(lang)
        tl_hash = sha256_file(tl_path)
        tr_key = _key("translate", tl_hash, spec.id)

        def do_translate(target):
            try:
                write_tsv(translate_corpus(translit, spec, self.translations), target)
            except DravmixError as exc:
                raise RunError("translate", str(exc)) from exc

        tr_path = self.cached_stage(
            "translate", lang, tr_key, {"transliterated": tl_hash},
            self.cache_dir / "translate" / f"{tr_key}.tsv", do_translate)
        translated = read_tsv(tr_path, lang)
        self.manifest.add_file(self.rel(self.cache_dir / "translations.tsv"))

        variants = {}
        vdir = self.out / lang.value.lower() / "variants"
        vdir.mkdir(parents=True, exist_ok=True)
        for var in VariantId:
            try:
                corpus = build_variant(var, train, translit, translated)
            except DravmixError as exc:
                raise RunError("build-variants", str(exc)) from exc
            body = dumps_tsv(corpus).encode("utf-8")
            target = vdir / f"{var.value}.tsv"
            t0 = time.perf_counter()
            target.write_bytes(body)
            digest = sha256_bytes(body)
            self.manifest.record(StageRecord(
                "build-variant", lang.value, digest[:20],
                {"train": train_hash, "transliterated": tl_hash, "translated": sha256_file(tr_path)},
                [self.rel(target)], False, round(time.perf_counter() - t0, 4), variant=var.value))
            variants[var] = (target, digest)
        return variants

    def _transliterator(self, lang, data, train: Corpus, rules_text) -> Transliterator:
        t = self.config.translit
        rules = RuleTable.parse(rules_text, lang) if rules_text is not None else None
        model = Transliterator(lang, rules=rules, order=t["order"], alpha=t["alpha"],
                               beam=t["beam"], k=t["k"])
        if data.lm:
            lines = data.lm.read_text(encoding="utf-8").splitlines()
        else:
            # native-script words already present in the training comments
            lines = native_lines(train.texts, SCRIPT_OF[lang])
        return model.fit(lines or None)

    # -- model cells ------------------------------------------------------------------

    def make_model(self, kind: str):
        if kind == "nb":
            return NaiveBayesClassifier(**self.config.nb)
        return MLPClassifier(**{**self.config.mlp, "random_state": self.config.seed})

    def train_cell(self, lang, kind, var, vpath: Path, vhash: str) -> Path:
        cfg = self.config
        model = self.make_model(kind)
        # nb is deterministic, so its key ignores the seed
        key = _key("train", kind, vhash, model.get_params(), cfg.features.to_dict(),
                   cfg.seed if kind == "mlp" else None)

        def build(target):
            corpus = read_tsv(vpath, lang)
            X = featurize_many(corpus.texts, cfg.features)
            y = [int(s.label) for s in corpus.samples]
            try:
                model.fit(X, y)
            except DravmixError as exc:
                raise RunError("train", f"{kind}/{var.value}: {exc}") from exc
            save_model(target, model, cfg.features)

        return self.cached_stage("train", lang, key, {"variant": vhash},
                                 self.cache_dir / "models" / f"{key}.npz", build,
                                 model=kind, variant=var.value)

    def evaluate_cell(self, lang, kind, var, model_path, split_name, split_path) -> Cell:
        t0 = time.perf_counter()
        data = self.config.languages[lang]
        corpus = read_tsv(split_path, lang, Split(split_name), header=data.header)
        model, space = load_model(model_path)
        pred = model.predict(featurize_many(corpus.texts, space))
        p, r, f1 = evaluate(corpus.labels, pred)
        self.manifest.record(StageRecord(
            f"evaluate-{split_name}", lang.value, sha256_file(model_path)[:20],
            {split_name: sha256_file(split_path), "model": sha256_file(model_path)}, [],
            False, round(time.perf_counter() - t0, 4), model=kind, variant=var.value))
        return Cell(p, r, f1, len(corpus))

    def run(self) -> Tuple[Report, Optional[Report], RunManifest]:
        cfg = self.config
        langs = list(cfg.languages)
        test_report = Report(langs, list(cfg.models))
        has_dev = all(d.dev for d in cfg.languages.values())
        dev_report = Report(langs, list(cfg.models)) if has_dev else None

        jobs = []
        for lang in langs:
            log.info("%s: building variants", lang.value)
            variants = self.language_data(lang)
            for kind in cfg.models:
                for var in VariantId:
                    jobs.append((lang, kind, var) + variants[var])

        def cell(job):
            lang, kind, var, vpath, vhash = job
            log.info("%s: %s on %s", lang.value, kind, var.value)
            model_path = self.train_cell(lang, kind, var, vpath, vhash)
            data = cfg.languages[lang]
            test = self.evaluate_cell(lang, kind, var, model_path, "test", data.test)
            dev = self.evaluate_cell(lang, kind, var, model_path, "dev", data.dev) if has_dev else None
            return job, test, dev

        if cfg.jobs > 1:
            with ThreadPoolExecutor(cfg.jobs) as pool:
                results = list(pool.map(cell, jobs))
        else:
            results = [cell(j) for j in jobs]
        for (lang, kind, var, _, _), test, dev in results:
            test_report.add(lang, kind, var, test)
            if dev_report is not None:
                dev_report.add(lang, kind, var, dev)
        test_report.check_complete()

        self._write(test_report, "metrics.csv", "report.txt")
        if dev_report is not None:
            self._write(dev_report, "metrics_dev.csv", "report_dev.txt")
        self.manifest.finished = _now()
        self.manifest.add_file("manifest.json")
        self.manifest.write(self.out / "manifest.json")
        return test_report, dev_report, self.manifest

    def _write(self, report: Report, csv_name: str, txt_name: str) -> None:
        (self.out / csv_name).write_text(report.to_csv(), encoding="utf-8")
        (self.out / txt_name).write_text(render_report(report), encoding="utf-8")
        self.manifest.add_file(csv_name)
        self.manifest.add_file(txt_name)


def run_grid(config: ExperimentConfig) -> Tuple[Report, RunManifest]:
    """Run the whole grid; the dev-split report is written to disk alongside."""
    config.validate()
    report, _, manifest = _Grid(config).run()
    return report, manifest
