"""Seeded synthetic learning curves for exercising the engine end to end.

Three behaviours cover the interesting cases: asymptotic learners that
follow the saturating curve, never-learners stuck at guessing level, and
delayed learners that sit at guessing level before following the curve.
Losses decay exponentially towards a floor for learners; never-learners'
losses stop improving after a short warmup, which is what the loss-plateau
stopping condition keys on.  Everything is reproducible from the seed.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .analyzer import DatasetProfile
from .curve import CurveParams, default_box, evaluate
from .errors import InvalidSpecError
from .kv import parse_kv
from .traces import Trace, TraceCorpus, TraceRow

NEVER_LEARN_WARMUP_EPOCHS = 2.0
_LOSS_MIN = 1e-6
_EPOCH_TOL = 1e-9

DEFAULT_STEP = 0.5
DEFAULT_E_FULL = 20.0

DEFAULT_PROFILE = DatasetProfile(name="balanced-10", num_classes=10, balanced=True)


class CurveKind(enum.Enum):
    ASYMPTOTIC = "asymptotic"
    NEVER_LEARN = "never_learn"
    DELAYED = "delayed"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LossModel:
    init: float = 2.0
    decay_rate: float = 0.5
    floor: float = 0.1
    noise_sigma: float = 0.02

    def __post_init__(self):
        if self.floor <= 0 or self.init < self.floor:
            raise InvalidSpecError("loss model needs init >= floor > 0")
        if self.decay_rate < 0 or self.noise_sigma < 0:
            raise InvalidSpecError("loss decay_rate and noise_sigma must be >= 0")

    def base(self, elapsed: float) -> float:
        return self.floor + (self.init - self.floor) * math.exp(-self.decay_rate * elapsed)


@dataclass(frozen=True)
class CurveSpec:
    kind: CurveKind
    params: CurveParams | None = None
    delay: float = 0.0
    guess_acc: float = 10.0
    acc_noise_sigma: float = 0.0
    loss_model: LossModel = field(default_factory=LossModel)
    seed: int = 0
    custom_acc: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind in (CurveKind.ASYMPTOTIC, CurveKind.DELAYED) and self.params is None:
            raise InvalidSpecError(f"{self.kind.value} spec needs curve params")
        if self.kind is CurveKind.CUSTOM and self.custom_acc is None:
            raise InvalidSpecError("custom spec needs explicit accuracies")
        if self.delay < 0:
            raise InvalidSpecError("delay must be >= 0")
        if self.acc_noise_sigma < 0:
            raise InvalidSpecError("acc_noise_sigma must be >= 0")
        if not 0 <= self.guess_acc <= 100:
            raise InvalidSpecError("guess_acc must be in [0, 100]")


def _clean_accuracy(spec: CurveSpec, epochs: np.ndarray, step: float) -> np.ndarray:
    if spec.kind is CurveKind.ASYMPTOTIC:
        assert spec.params is not None
        return np.array([evaluate(spec.params, e / step) for e in epochs])
    if spec.kind is CurveKind.NEVER_LEARN:
        return np.full(len(epochs), spec.guess_acc)
    if spec.kind is CurveKind.DELAYED:
        assert spec.params is not None
        out = np.empty(len(epochs))
        for i, e in enumerate(epochs):
            if e < spec.delay - _EPOCH_TOL:
                out[i] = spec.guess_acc
            else:
                curve = evaluate(spec.params, (e - spec.delay) / step)
                out[i] = max(spec.guess_acc, curve)
        return out
    assert spec.custom_acc is not None
    if len(spec.custom_acc) != len(epochs):
        raise InvalidSpecError(
            f"custom spec has {len(spec.custom_acc)} accuracies for {len(epochs)} rows"
        )
    return np.asarray(spec.custom_acc, dtype=float)


def _learner_losses(spec: CurveSpec, epochs: np.ndarray, noise: np.ndarray) -> np.ndarray:
    lm = spec.loss_model
    offset = spec.delay if spec.kind is CurveKind.DELAYED else 0.0
    base = np.array([lm.base(max(0.0, e - offset)) for e in epochs])
    return np.maximum(base + noise, _LOSS_MIN)


def _plateau_losses(spec: CurveSpec, epochs: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Warmup decay, then a plateau the running minimum never undercuts."""
    lm = spec.loss_model
    plateau = lm.base(NEVER_LEARN_WARMUP_EPOCHS)
    out = np.empty(len(epochs))
    seen_plateau = False
    for i, e in enumerate(epochs):
        if e < NEVER_LEARN_WARMUP_EPOCHS - _EPOCH_TOL:
            out[i] = max(lm.base(e) + noise[i], _LOSS_MIN)
        elif not seen_plateau:
            out[i] = plateau  # exact, so later rows never dip below it
            seen_plateau = True
        else:
            out[i] = plateau + abs(noise[i])
    return out


def generate_trace(
    spec: CurveSpec, step: float = DEFAULT_STEP, e_full: float = DEFAULT_E_FULL,
    model: str = "model-0001",
) -> Trace:
    """Rows at epochs step, 2*step, ..., e_full; deterministic per seed."""
    if step <= 0 or e_full <= 0:
        raise InvalidSpecError("step and e_full must be positive")
    n_rows = int(round(e_full / step))
    if n_rows < 1 or abs(n_rows * step - e_full) > _EPOCH_TOL:
        raise InvalidSpecError(f"e_full {e_full} is not a multiple of step {step}")
    epochs = np.arange(1, n_rows + 1) * step

    rng = np.random.default_rng(spec.seed)
    acc_noise = rng.normal(0.0, spec.acc_noise_sigma, n_rows)
    val_noise = rng.normal(0.0, spec.loss_model.noise_sigma, n_rows)
    train_noise = rng.normal(0.0, spec.loss_model.noise_sigma, n_rows)

    val_acc = np.clip(_clean_accuracy(spec, epochs, step) + acc_noise, 0.0, 100.0)
    if spec.kind is CurveKind.NEVER_LEARN:
        val_loss = _plateau_losses(spec, epochs, val_noise)
        train_loss = _plateau_losses(spec, epochs, train_noise)
    else:
        val_loss = _learner_losses(spec, epochs, val_noise)
        train_loss = _learner_losses(spec, epochs, train_noise)

    rows = tuple(
        TraceRow(
            epoch=float(epochs[i]),
            val_acc=float(val_acc[i]),
            val_loss=float(val_loss[i]),
            train_loss=float(train_loss[i]),
        )
        for i in range(n_rows)
    )
    return Trace(model=model, rows=rows)


@dataclass(frozen=True)
class PopulationGroup:
    """Distribution over curve specs; ranges are inclusive uniform draws."""

    name: str
    kind: CurveKind
    weight: float
    a_range: tuple[float, float] = (40.0, 95.0)
    b_range: tuple[float, float] = (1.3, 3.0)
    c_range: tuple[float, float] = (1.0, 4.0)
    delay_range: tuple[float, float] = (3.0, 9.0)
    acc_noise_sigma: float = 0.3
    loss_init_range: tuple[float, float] = (1.5, 3.0)
    loss_decay_range: tuple[float, float] = (0.3, 1.0)
    loss_floor_range: tuple[float, float] = (0.05, 0.3)
    loss_noise_sigma: float = 0.02

    def __post_init__(self):
        if self.kind is CurveKind.CUSTOM:
            raise InvalidSpecError("populations cannot contain custom specs")
        if self.weight <= 0:
            raise InvalidSpecError(f"{self.name}: weight must be positive")
        for rname in ("a_range", "b_range", "c_range", "delay_range",
                      "loss_init_range", "loss_decay_range", "loss_floor_range"):
            lo, hi = getattr(self, rname)
            if lo > hi:
                raise InvalidSpecError(f"{self.name}: {rname} is reversed")
        if self.acc_noise_sigma < 0 or self.loss_noise_sigma < 0:
            raise InvalidSpecError(f"{self.name}: sigmas must be >= 0")


DEFAULT_POPULATION = (
    PopulationGroup(name="asymptotic", kind=CurveKind.ASYMPTOTIC, weight=0.70),
    PopulationGroup(name="never_learn", kind=CurveKind.NEVER_LEARN, weight=0.15),
    PopulationGroup(
        name="delayed",
        kind=CurveKind.DELAYED,
        weight=0.15,
        a_range=(15.0, 65.0),
    ),
)


def _apportion(weights: list[float], n: int) -> list[int]:
    """Exact integer counts proportional to weights (largest remainder)."""
    total = sum(weights)
    raw = [w / total * n for w in weights]
    counts = [int(math.floor(r)) for r in raw]
    remainder = n - sum(counts)
    by_frac = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in by_frac[:remainder]:
        counts[i] += 1
    return counts


def _draw_spec(
    group: PopulationGroup, profile: DatasetProfile, rng: np.random.Generator
) -> CurveSpec:
    box = default_box()
    params = None
    if group.kind in (CurveKind.ASYMPTOTIC, CurveKind.DELAYED):
        a = rng.uniform(*group.a_range)
        b = rng.uniform(*group.b_range)
        c = rng.uniform(*group.c_range)
        vec = box.clip(np.array([a, b, c]))
        params = CurveParams(a=float(vec[0]), b=float(vec[1]), c=float(vec[2]))
    delay = rng.uniform(*group.delay_range) if group.kind is CurveKind.DELAYED else 0.0
    loss_model = LossModel(
        init=float(rng.uniform(*group.loss_init_range)),
        decay_rate=float(rng.uniform(*group.loss_decay_range)),
        floor=float(rng.uniform(*group.loss_floor_range)),
        noise_sigma=group.loss_noise_sigma,
    )
    seed = int(rng.integers(0, 2**31 - 1))
    return CurveSpec(
        kind=group.kind,
        params=params,
        delay=float(delay),
        guess_acc=100.0 * profile.guess_rate,
        acc_noise_sigma=group.acc_noise_sigma,
        loss_model=loss_model,
        seed=seed,
    )


def draw_population_specs(
    population: tuple[PopulationGroup, ...],
    n: int,
    profile: DatasetProfile,
    seed: int,
) -> list[CurveSpec]:
    """The n specs generate_corpus would build, in model-id order.

    Exposed separately so callers can recover the ground-truth parameters
    behind each generated trace.
    """
    if not population:
        raise InvalidSpecError("population is empty")
    if n < 1:
        raise InvalidSpecError("n must be >= 1")
    rng = np.random.default_rng(seed)
    counts = _apportion([g.weight for g in population], n)
    labels = [i for i, count in enumerate(counts) for _ in range(count)]
    order = rng.permutation(len(labels))
    return [_draw_spec(population[labels[i]], profile, rng) for i in order]


def generate_corpus(
    population: tuple[PopulationGroup, ...] = DEFAULT_POPULATION,
    n: int = 200,
    profile: DatasetProfile = DEFAULT_PROFILE,
    seed: int = 0,
    step: float = DEFAULT_STEP,
    e_full: float = DEFAULT_E_FULL,
) -> TraceCorpus:
    """n traces named model-0001... drawn from the population; seeded."""
    specs = draw_population_specs(population, n, profile, seed)
    width = max(4, len(str(n)))
    traces = tuple(
        replace(
            generate_trace(spec, step, e_full, model=f"model-{i + 1:0{width}d}"),
            profile_ref=profile.name,
        )
        for i, spec in enumerate(specs)
    )
    corpus = TraceCorpus(traces=traces, profile=profile, step=step, e_full=e_full)
    corpus.validate()
    return corpus


_GROUP_FIELDS = {
    "a_range", "b_range", "c_range", "delay_range", "loss_init_range",
    "loss_decay_range", "loss_floor_range",
}


def _parse_range(value: str, where: str) -> tuple[float, float]:
    parts = value.split(",")
    if len(parts) != 2:
        raise InvalidSpecError(f"{where}: expected 'low,high', got {value!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise InvalidSpecError(f"{where}: {exc}") from exc


def parse_population(text: str, source: str = "<string>") -> tuple[tuple[PopulationGroup, ...], float, float]:
    """Population file: 'groups = a,b,...' plus '<group>.<field>' entries.

    Returns (groups, step, e_full); the E and e_full keys default to the
    module defaults when absent.
    """
    pairs = parse_kv(text, source=source)
    if "groups" not in pairs:
        raise InvalidSpecError(f"{source}: missing 'groups' key")
    step = float(pairs.pop("E", DEFAULT_STEP))
    e_full = float(pairs.pop("e_full", DEFAULT_E_FULL))
    names = [g.strip() for g in pairs.pop("groups").split(",") if g.strip()]
    if not names:
        raise InvalidSpecError(f"{source}: 'groups' lists no names")

    groups = []
    consumed = set()
    for name in names:
        fields: dict = {"name": name}
        kind_key = f"{name}.kind"
        if kind_key not in pairs:
            raise InvalidSpecError(f"{source}: missing {kind_key}")
        try:
            fields["kind"] = CurveKind(pairs[kind_key])
        except ValueError:
            raise InvalidSpecError(f"{source}: unknown kind {pairs[kind_key]!r}") from None
        consumed.add(kind_key)
        weight_key = f"{name}.weight"
        if weight_key not in pairs:
            raise InvalidSpecError(f"{source}: missing {weight_key}")
        fields["weight"] = float(pairs[weight_key])
        consumed.add(weight_key)
        for fname in ("acc_noise_sigma", "loss_noise_sigma"):
            key = f"{name}.{fname}"
            if key in pairs:
                fields[fname] = float(pairs[key])
                consumed.add(key)
        for fname in _GROUP_FIELDS:
            key = f"{name}.{fname}"
            if key in pairs:
                fields[fname] = _parse_range(pairs[key], f"{source}: {key}")
                consumed.add(key)
        groups.append(PopulationGroup(**fields))

    unknown = set(pairs) - consumed
    if unknown:
        raise InvalidSpecError(f"{source}: unknown keys: {', '.join(sorted(unknown))}")
    return tuple(groups), step, e_full


def load_population(path: str | os.PathLike) -> tuple[tuple[PopulationGroup, ...], float, float]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_population(fh.read(), source=str(path))
