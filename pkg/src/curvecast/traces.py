"""Learning-curve trace files: a flat CSV plus a key=value profile sidecar.

CSV columns are ``model_id,epoch,val_acc,val_loss,train_loss`` with a header
row; ``train_loss`` may be empty.  The sidecar lives next to the CSV with a
``.profile`` extension and carries ``name``, ``num_classes``,
``class_fractions``, ``balanced``, ``E`` (epochs per report, ``step`` in
code) and ``e_full`` (the horizon every trace runs to).  Floats are written
with ``repr`` so a save/load round trip reproduces the corpus exactly.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

from .analyzer import DatasetProfile
from .errors import CorpusFormatError, CorpusInvariantError
from .kv import dump_kv, load_kv

_CSV_HEADER = ["model_id", "epoch", "val_acc", "val_loss", "train_loss"]
_EPOCH_TOL = 1e-9


@dataclass(frozen=True)
class TraceRow:
    epoch: float
    val_acc: float
    val_loss: float
    train_loss: Optional[float] = None


@dataclass(frozen=True)
class Trace:
    model: str
    rows: tuple[TraceRow, ...]
    profile_ref: str = ""

    @property
    def epochs(self) -> tuple[float, ...]:
        return tuple(r.epoch for r in self.rows)

    @property
    def max_val_acc(self) -> float:
        return max(r.val_acc for r in self.rows)

    @property
    def has_train_loss(self) -> bool:
        return all(r.train_loss is not None for r in self.rows)


@dataclass(frozen=True)
class TraceCorpus:
    traces: tuple[Trace, ...]
    profile: DatasetProfile
    step: float
    e_full: float

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    @property
    def models(self) -> tuple[str, ...]:
        return tuple(t.model for t in self.traces)

    def get(self, model: str) -> Trace:
        for trace in self.traces:
            if trace.model == model:
                return trace
        raise KeyError(model)

    def validate(self) -> None:
        """Check every trace is a full, uniformly spaced learning curve."""
        if self.step <= 0 or self.e_full <= 0:
            raise CorpusInvariantError("E and e_full must be positive")
        for trace in self.traces:
            if not trace.rows:
                raise CorpusInvariantError(f"{trace.model}: trace has no rows")
            epochs = trace.epochs
            if abs(epochs[0] - self.step) > _EPOCH_TOL:
                raise CorpusInvariantError(
                    f"{trace.model}: first epoch {epochs[0]} != E {self.step}"
                )
            for prev, cur in zip(epochs, epochs[1:]):
                if not math.isclose(cur - prev, self.step, rel_tol=0, abs_tol=_EPOCH_TOL):
                    raise CorpusInvariantError(
                        f"{trace.model}: epochs not uniformly spaced at {cur}"
                    )
            if abs(epochs[-1] - self.e_full) > _EPOCH_TOL:
                raise CorpusInvariantError(
                    f"{trace.model}: last epoch {epochs[-1]} != e_full {self.e_full}"
                )
            for row in trace.rows:
                if not 0.0 <= row.val_acc <= 100.0:
                    raise CorpusInvariantError(
                        f"{trace.model}: val_acc {row.val_acc} outside [0, 100]"
                    )


def profile_path(path: str | os.PathLike) -> Path:
    return Path(path).with_suffix(".profile")


def _format_float(value: float) -> str:
    return repr(float(value))


def _profile_pairs(corpus: TraceCorpus) -> dict[str, str]:
    profile = corpus.profile
    fractions = ""
    if profile.class_fractions is not None:
        fractions = ",".join(_format_float(f) for f in profile.class_fractions)
    return {
        "name": profile.name,
        "num_classes": str(profile.num_classes),
        "class_fractions": fractions,
        "balanced": "true" if profile.balanced else "false",
        "E": _format_float(corpus.step),
        "e_full": _format_float(corpus.e_full),
    }


def parse_profile_fields(pairs: dict[str, str], source: str = "<string>") -> DatasetProfile:
    """Build a DatasetProfile from name/num_classes/class_fractions/balanced keys."""
    required = ("name", "num_classes", "balanced")
    missing = [k for k in required if k not in pairs]
    if missing:
        raise CorpusFormatError(f"{source}: missing keys: {', '.join(missing)}")
    try:
        num_classes = int(pairs["num_classes"])
    except ValueError as exc:
        raise CorpusFormatError(f"{source}: {exc}") from exc
    balanced_raw = pairs["balanced"].lower()
    if balanced_raw not in ("true", "false"):
        raise CorpusFormatError(f"{source}: balanced must be true or false")
    fractions: tuple[float, ...] | None = None
    raw_fractions = pairs.get("class_fractions", "")
    if raw_fractions:
        try:
            fractions = tuple(float(f) for f in raw_fractions.split(","))
        except ValueError as exc:
            raise CorpusFormatError(f"{source}: bad class_fractions: {exc}") from exc
    try:
        return DatasetProfile(
            name=pairs["name"],
            num_classes=num_classes,
            class_fractions=fractions,
            balanced=balanced_raw == "true",
        )
    except ValueError as exc:
        raise CorpusFormatError(f"{source}: {exc}") from exc


def load_profile(path: str | os.PathLike) -> DatasetProfile:
    """Read a standalone profile file (no E/e_full keys required)."""
    return parse_profile_fields(load_kv(path), source=str(path))


def _parse_profile(pairs: dict[str, str], source: str) -> tuple[DatasetProfile, float, float]:
    for key in ("E", "e_full"):
        if key not in pairs:
            raise CorpusFormatError(f"{source}: missing keys: {key}")
    profile = parse_profile_fields(pairs, source)
    try:
        step = float(pairs["E"])
        e_full = float(pairs["e_full"])
    except ValueError as exc:
        raise CorpusFormatError(f"{source}: {exc}") from exc
    return profile, step, e_full


def save_corpus(corpus: TraceCorpus, path: str | os.PathLike) -> None:
    """Write the trace CSV and its profile sidecar."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for trace in corpus.traces:
            for row in trace.rows:
                train = "" if row.train_loss is None else _format_float(row.train_loss)
                writer.writerow(
                    [
                        trace.model,
                        _format_float(row.epoch),
                        _format_float(row.val_acc),
                        _format_float(row.val_loss),
                        train,
                    ]
                )
    dump_kv(profile_path(path), _profile_pairs(corpus))


def _parse_float(value: str, what: str, where: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise CorpusFormatError(f"{where}: bad {what}: {value!r}") from exc


def load_corpus(path: str | os.PathLike) -> TraceCorpus:
    """Read a trace CSV plus sidecar back into a validated corpus."""
    path = Path(path)
    sidecar = profile_path(path)
    if not sidecar.exists():
        raise CorpusFormatError(f"{sidecar}: profile sidecar not found")
    profile, step, e_full = _parse_profile(load_kv(sidecar), str(sidecar))

    by_model: dict[str, list[TraceRow]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(f"{path}:1: empty file") from None
        if header != _CSV_HEADER:
            raise CorpusFormatError(
                f"{path}:1: expected header {','.join(_CSV_HEADER)}"
            )
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(_CSV_HEADER):
                raise CorpusFormatError(f"{path}:{lineno}: expected 5 columns")
            model = cells[0]
            if not model:
                raise CorpusFormatError(f"{path}:{lineno}: empty model_id")
            where = f"{path}:{lineno}"
            row = TraceRow(
                epoch=_parse_float(cells[1], "epoch", where),
                val_acc=_parse_float(cells[2], "val_acc", where),
                val_loss=_parse_float(cells[3], "val_loss", where),
                train_loss=None if cells[4] == "" else _parse_float(cells[4], "train_loss", where),
            )
            by_model.setdefault(model, []).append(row)

    traces = tuple(
        Trace(model=model, rows=tuple(rows), profile_ref=profile.name)
        for model, rows in sorted(by_model.items())
    )
    for trace in traces:
        for prev, cur in zip(trace.epochs, trace.epochs[1:]):
            if cur <= prev:
                raise CorpusInvariantError(
                    f"{trace.model}: epochs not strictly increasing at {cur}"
                )
    corpus = TraceCorpus(traces=traces, profile=profile, step=step, e_full=e_full)
    corpus.validate()
    return corpus
