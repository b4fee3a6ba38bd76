"""Per-class and support-weighted precision/recall/F1, and the results grid."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .corpus import Label, Language, VariantId
from .errors import ContractError, ReportError

N_CLASSES = len(Label)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are gold labels, columns predictions, both in ``Label`` order."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class ClassMetrics:
    label: Label
    precision: float
    recall: float
    f1: float
    support: int


def confusion_matrix(gold: Sequence, pred: Sequence) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise ContractError(f"gold has {len(gold)} labels, pred has {len(pred)}")
    if not len(gold):
        raise ContractError("cannot build a confusion matrix from zero samples")
    g = np.fromiter((int(v) for v in gold), dtype=np.int64)
    p = np.fromiter((int(v) for v in pred), dtype=np.int64)
    m = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(m, (g, p), 1)
    return ConfusionMatrix(m)


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def per_class_metrics(m: ConfusionMatrix) -> List[ClassMetrics]:
    """Undefined precision/recall (zero denominator) is reported as 0."""
    out = []
    for k, label in enumerate(Label):
        tp = int(m.counts[k, k])
        predicted = int(m.counts[:, k].sum())
        support = int(m.counts[k, :].sum())
        p = _ratio(tp, predicted)
        r = _ratio(tp, support)
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        out.append(ClassMetrics(label, p, r, f1, support))
    return out


def weighted_average(metrics: Iterable[ClassMetrics]) -> Tuple[float, float, float]:
    metrics = list(metrics)
    total = sum(c.support for c in metrics)
    if total <= 0:
        raise ContractError("weighted average needs positive total support")
    p = sum(c.precision * c.support for c in metrics) / total
    r = sum(c.recall * c.support for c in metrics) / total
    f1 = sum(c.f1 * c.support for c in metrics) / total
    return p, r, f1


def evaluate(gold: Sequence, pred: Sequence) -> Tuple[float, float, float]:
    return weighted_average(per_class_metrics(confusion_matrix(gold, pred)))


@dataclass(frozen=True)
class Cell:
    precision: float
    recall: float
    f1: float
    support: int


MODEL_TITLES = {"nb": "Naive Bayes", "mlp": "MLP (STLR)"}
CSV_HEADER = ["language", "model", "variant", "precision", "recall", "f1", "support"]


@dataclass
class Report:
    languages: List[Language]
    models: List[str] = field(default_factory=lambda: ["nb", "mlp"])
    variants: List[VariantId] = field(default_factory=lambda: list(VariantId))
    cells: Dict[Tuple[Language, str, VariantId], Cell] = field(default_factory=dict)

    def add(self, language, model: str, variant, cell: Cell) -> None:
        self.cells[(Language.parse(language), model, VariantId(variant))] = cell

    def missing(self) -> List[Tuple[Language, str, VariantId]]:
        return [(lang, model, var) for lang in self.languages for model in self.models
                for var in self.variants if (lang, model, var) not in self.cells]

    def check_complete(self) -> None:
        missing = self.missing()
        if missing:
            names = ", ".join(f"({l.value}, {m}, {v.value})" for l, m, v in missing)
            raise ReportError(f"report grid is missing {len(missing)} cells: {names}", missing)

    def rows(self):
        for lang in self.languages:
            for model in self.models:
                for var in self.variants:
                    yield lang, model, var, self.cells[(lang, model, var)]

    def to_csv(self) -> str:
        self.check_complete()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for lang, model, var, c in self.rows():
            w.writerow([lang.value, model, var.value, f"{c.precision:.4f}", f"{c.recall:.4f}",
                        f"{c.f1:.4f}", c.support])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Report":
        rows = list(csv.DictReader(io.StringIO(text)))
        if rows and list(rows[0].keys()) != CSV_HEADER:
            raise ReportError(f"unexpected header {list(rows[0].keys())}")
        langs, models = [], []
        for r in rows:
            lang = Language.parse(r["language"])
            if lang not in langs:
                langs.append(lang)
            if r["model"] not in models:
                models.append(r["model"])
        report = cls(langs, models)
        for r in rows:
            report.add(r["language"], r["model"], r["variant"],
                       Cell(float(r["precision"]), float(r["recall"]), float(r["f1"]),
                            int(r["support"])))
        return report


def render_report(report: Report) -> str:
    """Fixed-width text table: one section per language, P/R/F1 per model."""
    report.check_complete()
    title_w = max(len(v.title) for v in report.variants)
    block = 3 * 8
    lines = []
    for lang in report.languages:
        header = " " * title_w + "".join(
            f" | {MODEL_TITLES.get(m, m):^{block - 1}}" for m in report.models)
        sub = f"{'Dataset':<{title_w}}" + "".join(
            f" | {'P':>7} {'R':>7} {'F1':>7}" for _ in report.models)
        rule = "-" * len(sub)
        lines += [lang.value, rule, header, sub, rule]
        for var in report.variants:
            row = f"{var.title:<{title_w}}"
            for model in report.models:
                c = report.cells[(lang, model, var)]
                row += f" | {c.precision:7.4f} {c.recall:7.4f} {c.f1:7.4f}"
            lines.append(row)
        lines += [rule, ""]
    return "\n".join(lines)
