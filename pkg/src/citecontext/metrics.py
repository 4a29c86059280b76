"""Agreement, kappa, confusion matrices, derived rates, and vote merging.

Zero-denominator rates are None (rendered as an em-dash-free "-" in text
tables), never silently coerced to 0. Unresolvable predictions occupy a
dedicated confusion column: excluded from per-class precision columns but
included in accuracy's denominator.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .engine import AnnotationRecord
from .errors import EmptyMatrix, VectorMismatch
from .schemas import UNRESOLVABLE, AnnotationSchema


@dataclass(frozen=True)
class LabelVector:
    schema_id: str
    entries: tuple[tuple[str, str], ...]  # (context_id, class code)

    def __post_init__(self):
        ids = [cid for cid, _ in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate context_ids in label vector")

    @property
    def labels(self) -> dict[str, str]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _aligned(a: LabelVector, b: LabelVector) -> list[tuple[str, str]]:
    if a.schema_id != b.schema_id:
        raise VectorMismatch(f"schemas differ: {a.schema_id!r} vs {b.schema_id!r}")
    labels_a, labels_b = a.labels, b.labels
    if set(labels_a) != set(labels_b):
        raise VectorMismatch("label vectors cover different context sets")
    if not labels_a:
        raise VectorMismatch("label vectors are empty")
    return [(labels_a[cid], labels_b[cid]) for cid in sorted(labels_a)]


def agreement(a: LabelVector, b: LabelVector) -> float:
    """Simple agreement rate: matching labels / total."""
    pairs = _aligned(a, b)
    return sum(1 for x, y in pairs if x == y) / len(pairs)


def cohens_kappa(a: LabelVector, b: LabelVector) -> float | None:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e).

    None (Undefined) when expected agreement p_e equals 1, i.e. both
    vectors are constant with the same label.
    """
    pairs = _aligned(a, b)
    n = len(pairs)
    p_o = sum(1 for x, y in pairs if x == y) / n
    marg_a = Counter(x for x, _ in pairs)
    marg_b = Counter(y for _, y in pairs)
    p_e = sum(marg_a[c] * marg_b[c] for c in marg_a) / (n * n)
    if p_e == 1.0:
        return None
    return (p_o - p_e) / (1.0 - p_e)


@dataclass
class ConfusionMatrix:
    """counts[actual][predicted]; predicted axis adds an Unresolvable column."""

    schema_id: str
    classes: tuple[str, ...]
    counts: dict[str, dict[str, int]]

    @property
    def predicted_classes(self) -> tuple[str, ...]:
        return self.classes + (UNRESOLVABLE,)

    @property
    def total(self) -> int:
        return sum(sum(row.values()) for row in self.counts.values())

    def row_total(self, code: str) -> int:
        return sum(self.counts[code].values())

    def column_total(self, code: str) -> int:
        return sum(row[code] for row in self.counts.values())

    @property
    def trace(self) -> int:
        return sum(self.counts[c][c] for c in self.classes)

    def to_dict(self) -> dict:
        return {
            "schema_id": self.schema_id,
            "classes": list(self.classes),
            "counts": {a: dict(row) for a, row in self.counts.items()},
        }


def confusion(pred: LabelVector, gold: LabelVector, schema: AnnotationSchema) -> ConfusionMatrix:
    """Cross-tabulate predictions against gold labels over shared contexts."""
    if gold.schema_id != schema.schema_id or pred.schema_id != schema.schema_id:
        raise VectorMismatch("vectors do not belong to the given schema")
    pairs = _aligned(pred, gold)
    classes = schema.codes
    counts = {a: {p: 0 for p in classes + (UNRESOLVABLE,)} for a in classes}
    for predicted, actual in pairs:
        if actual not in counts:
            raise VectorMismatch(f"gold label {actual!r} not in schema {schema.schema_id}")
        if predicted not in counts[actual]:
            raise VectorMismatch(f"predicted label {predicted!r} not in schema {schema.schema_id}")
        counts[actual][predicted] += 1
    return ConfusionMatrix(schema_id=schema.schema_id, classes=classes, counts=counts)


def matrix_from_counts(
    schema: AnnotationSchema, counts: dict[str, dict[str, int]]
) -> ConfusionMatrix:
    """Build a matrix directly from a (possibly sparse) count table."""
    classes = schema.codes
    full = {a: {p: 0 for p in classes + (UNRESOLVABLE,)} for a in classes}
    for actual, row in counts.items():
        for predicted, n in row.items():
            full[actual][predicted] += n
    return ConfusionMatrix(schema_id=schema.schema_id, classes=classes, counts=full)


@dataclass
class EvaluationReport:
    matrix: ConfusionMatrix
    accuracy: float
    precision: dict[str, float | None]
    recall: dict[str, float | None]
    f1: dict[str, float | None]
    macro_precision: float | None
    macro_recall: float | None
    macro_f1: float | None
    prevalence: dict[str, float]
    improvement_rate: dict[str, float | None]
    unresolvable_count: int = 0

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.to_dict(),
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "prevalence": self.prevalence,
            "improvement_rate": self.improvement_rate,
            "unresolvable_count": self.unresolvable_count,
        }


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def _macro(values: dict[str, float | None]) -> float | None:
    defined = [v for v in values.values() if v is not None]
    return sum(defined) / len(defined) if defined else None


def report(matrix: ConfusionMatrix, gold_distribution: dict[str, int] | None = None) -> EvaluationReport:
    """Derive accuracy, per-class precision/recall/F1, macro averages, and
    the improvement rate (precision minus gold prevalence) from a matrix.

    ``gold_distribution`` overrides prevalence denominators when the gold
    class counts are known independently of the matrix rows.
    """
    total = matrix.total
    if total == 0:
        raise EmptyMatrix("confusion matrix has zero total")

    gold_counts = gold_distribution or {c: matrix.row_total(c) for c in matrix.classes}
    gold_total = sum(gold_counts.values())

    precision: dict[str, float | None] = {}
    recall: dict[str, float | None] = {}
    f1: dict[str, float | None] = {}
    prevalence: dict[str, float] = {}
    improvement: dict[str, float | None] = {}
    for code in matrix.classes:
        tp = matrix.counts[code][code]
        precision[code] = _ratio(tp, matrix.column_total(code))
        recall[code] = _ratio(tp, matrix.row_total(code))
        p, r = precision[code], recall[code]
        if p is None or r is None or (p + r) == 0:
            f1[code] = None
        else:
            f1[code] = 2 * p * r / (p + r)
        prevalence[code] = gold_counts.get(code, 0) / gold_total if gold_total else 0.0
        improvement[code] = None if precision[code] is None else precision[code] - prevalence[code]

    return EvaluationReport(
        matrix=matrix,
        accuracy=matrix.trace / total,
        precision=precision,
        recall=recall,
        f1=f1,
        macro_precision=_macro(precision),
        macro_recall=_macro(recall),
        macro_f1=_macro(f1),
        prevalence=prevalence,
        improvement_rate=improvement,
        unresolvable_count=matrix.column_total(UNRESOLVABLE),
    )


def majority_vote(
    records_by_context: dict[str, list[AnnotationRecord]] | list[AnnotationRecord],
    schema_id: str,
) -> tuple[LabelVector, list[dict]]:
    """Merge multi-annotator records into one label per context.

    The modal label among non-Unresolvable records wins; ties (or all
    records Unresolvable) yield Unresolvable plus an entry in the tie
    report. Output order and result are independent of record order.
    """
    if isinstance(records_by_context, list):
        grouped: dict[str, list[AnnotationRecord]] = {}
        for record in records_by_context:
            grouped.setdefault(record.context_id, []).append(record)
    else:
        grouped = records_by_context

    entries: list[tuple[str, str]] = []
    ties: list[dict] = []
    for context_id in sorted(grouped):
        group = grouped[context_id]
        if not group:
            raise ValueError(f"context {context_id!r} has no records")
        votes = Counter(r.label for r in group if r.label != UNRESOLVABLE)
        if not votes:
            entries.append((context_id, UNRESOLVABLE))
            ties.append({"context_id": context_id, "votes": {}, "reason": "all unresolvable"})
            continue
        best = max(votes.values())
        winners = sorted(code for code, n in votes.items() if n == best)
        if len(winners) > 1:
            entries.append((context_id, UNRESOLVABLE))
            ties.append({"context_id": context_id, "votes": dict(votes), "reason": "tie"})
        else:
            entries.append((context_id, winners[0]))
    return LabelVector(schema_id=schema_id, entries=tuple(entries)), ties


@dataclass(frozen=True)
class ConsistencyRow:
    label: str
    mismatches: int
    agreement: float
    kappa: float | None


def consistency_table(
    run_pairs: list[tuple[str, LabelVector, LabelVector]],
) -> list[ConsistencyRow]:
    """One row per labelled run pair: mismatch count, agreement, kappa."""
    rows = []
    for label, a, b in run_pairs:
        pairs = _aligned(a, b)
        mismatches = sum(1 for x, y in pairs if x != y)
        rows.append(
            ConsistencyRow(
                label=label,
                mismatches=mismatches,
                agreement=1.0 - mismatches / len(pairs),
                kappa=cohens_kappa(a, b),
            )
        )
    return rows


def _fmt(value: float | None, digits: int = 3) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def format_confusion(matrix: ConfusionMatrix) -> str:
    """Plain-text table, actual classes as rows, predictions as columns."""
    predicted = list(matrix.predicted_classes)
    header = ["Actual\\Predict"] + predicted + ["Total"]
    rows = [header]
    for actual in matrix.classes:
        row = [actual] + [str(matrix.counts[actual][p]) for p in predicted]
        row.append(str(matrix.row_total(actual)))
        rows.append(row)
    footer = ["Total"] + [str(matrix.column_total(p)) for p in predicted] + [str(matrix.total)]
    rows.append(footer)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows)


def format_report(rep: EvaluationReport) -> str:
    lines = [format_confusion(rep.matrix), ""]
    lines.append(f"accuracy: {_fmt(rep.accuracy)}")
    lines.append(f"unresolvable: {rep.unresolvable_count}")
    header = ["class", "precision", "recall", "f1", "prevalence", "improvement"]
    lines.append("  ".join(header))
    for code in rep.matrix.classes:
        lines.append(
            "  ".join(
                [
                    code,
                    _fmt(rep.precision[code]),
                    _fmt(rep.recall[code]),
                    _fmt(rep.f1[code]),
                    _fmt(rep.prevalence[code]),
                    _fmt(rep.improvement_rate[code]),
                ]
            )
        )
    lines.append(
        "macro  "
        + "  ".join(_fmt(v) for v in (rep.macro_precision, rep.macro_recall, rep.macro_f1))
    )
    return "\n".join(lines)


def format_consistency(rows: list[ConsistencyRow]) -> str:
    lines = ["prompt  mismatches  agreement  kappa"]
    for row in rows:
        lines.append(
            f"{row.label}  {row.mismatches}  {_fmt(row.agreement)}  {_fmt(row.kappa)}"
        )
    return "\n".join(lines)
