"""Training and evaluation orchestration.

Training samples batches with replacement across the augmented stream
(the batch budget of 128 x 100 per epoch exceeds the dataset size, so
epochs are not single passes). Each drawn item independently picks one
ground-truth label at random. Evaluation scores the rectangle metric
against every ground-truth label of a sample, on the un-augmented
center view.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import dataset as ds
from .augment import AugmentSpec, rotate, zoom
from .errors import DimMismatch, EmptyDataset, NonFiniteLoss, OutOfFrame
from .features import FeatureFile, toy_extract
from .geometry import GraspRect, is_success, jaccard
from .preprocess import (
    NetInput,
    NormTargetVec,
    compose_input,
    denormalize_target,
    normalize_target,
)
from .regressor import (
    AdamState,
    DenseHead,
    adam_step,
    backward,
    forward,
    init_params,
    mse_loss,
)


@dataclass
class TrainConfig:
    batch_size: int = 128
    batches_per_epoch: int = 100
    epochs: int = 25
    split_ratio: float = 0.9
    val_batch_size: int = 10
    val_batches: int = 100
    seed: int = 0
    augment: AugmentSpec = field(default_factory=AugmentSpec)
    families: str = "product"
    extractor: str = "toy"            # "toy" | "features-file"
    features_path: str | None = None
    feature_dim: int = 1024
    toy_seed: int = 0
    lr: float = 1e-3
    dropout_p: float = 0.5
    output_tanh: bool = False

    def __post_init__(self):
        for name in ("batch_size", "batches_per_epoch", "epochs",
                     "val_batch_size", "val_batches", "feature_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must be in (0, 1)")


@dataclass
class RunReport:
    seed: int
    train_loss: list[float]
    val_loss: list[float]
    accuracy: float
    dropped_augmentations: int
    skipped_targets: int
    epoch_seconds: list[float]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


class CornellSource:
    """Feeds training items from a Cornell-layout directory.

    With the toy extractor, augmentation transforms are applied on the
    fly in the 224 frame. With a features file the features were computed
    on the un-augmented view, so augmentation is unavailable and only the
    random label choice varies between draws.
    """

    def __init__(self, root: str, extractor: str = "toy",
                 feature_file: FeatureFile | None = None,
                 augment: AugmentSpec = AugmentSpec(),
                 families: str = "product",
                 feature_dim: int = 1024, toy_seed: int = 0):
        self.extractor = extractor
        self.feature_file = feature_file
        self.augment = augment
        self.families = families
        self.toy_seed = toy_seed
        self.dropped = 0
        self.skipped_targets = 0

        all_ids = ds.scan_dataset(root)
        if extractor == "features-file":
            if feature_file is None:
                raise ValueError("features-file extractor needs a loaded file")
            all_ids = [i for i in all_ids if i in feature_file.features]
            if not all_ids:
                raise EmptyDataset("no dataset ids present in the feature file")
            self.feature_dim = feature_file.dim
        else:
            self.feature_dim = feature_dim

        self._ids = all_ids
        self._inputs: dict[str, NetInput] = {}
        self._labels: dict[str, list[GraspRect]] = {}
        for sid in all_ids:
            s = ds.load_sample(root, sid)
            inp, tf = compose_input(s)
            self._inputs[sid] = inp
            self._labels[sid] = [tf.map_rect(r) for r in s.pos_rects]

    def ids(self) -> list[str]:
        return self._ids

    def _combos(self):
        if self.families == "product":
            return [(a, z) for a in self.augment.rotations
                    for z in self.augment.zooms]
        combos = [(a, 1.0) for a in self.augment.rotations]
        combos += [(0.0, z) for z in self.augment.zooms if z != 1.0]
        return combos

    def draw_item(self, sid: str, rng: np.random.Generator):
        """One training item: (features, target array) or None if every
        attempted variant dropped."""
        labels = self._labels[sid]
        if not labels:
            return None
        label = labels[int(rng.integers(len(labels)))]
        inp = self._inputs[sid]
        if self.extractor == "toy":
            combos = self._combos()
            for _ in range(8):  # rejection-sample a surviving variant
                angle, factor = combos[int(rng.integers(len(combos)))]
                pair = rotate(inp, label, angle)
                if pair is not None:
                    pair = zoom(pair[0], pair[1], factor)
                if pair is not None:
                    break
                self.dropped += 1
            else:
                pair = (inp, label)  # identity always survives
            inp, label = pair
            feats = toy_extract(inp, seed=self.toy_seed,
                                dim=self.feature_dim).values
        else:
            feats = self.feature_file.features[sid].values
        try:
            target = normalize_target(label).as_array()
        except OutOfFrame:
            self.skipped_targets += 1
            return None
        return feats, target

    def eval_features(self, sid: str) -> np.ndarray:
        if self.extractor == "toy":
            return toy_extract(self._inputs[sid], seed=self.toy_seed,
                               dim=self.feature_dim).values
        return self.feature_file.features[sid].values

    def truths(self, sid: str) -> list[GraspRect]:
        return self._labels[sid]


class SyntheticSource:
    """Self-contained sanity task: toy features of random inputs, targets
    produced by a fixed linear map of the features clamped to [0, 1]."""

    def __init__(self, n_samples: int = 64, feature_dim: int = 64,
                 seed: int = 0):
        self.feature_dim = feature_dim
        rng = np.random.default_rng([seed, 1000])
        self._feats = []
        for _ in range(n_samples):
            inp = NetInput(rng.uniform(-1, 1, size=(224, 224, 3)))
            self._feats.append(toy_extract(inp, seed=0, dim=feature_dim).values)
        a = rng.standard_normal((feature_dim, 6)) / math.sqrt(feature_dim)
        b = rng.uniform(0.3, 0.7, 6)
        self._targets = [np.clip(f @ a + b, 0.0, 1.0) for f in self._feats]
        self._ids = [f"syn{i:04d}" for i in range(n_samples)]
        self.dropped = 0
        self.skipped_targets = 0

    def ids(self) -> list[str]:
        return self._ids

    def draw_item(self, sid: str, rng: np.random.Generator):
        i = self._ids.index(sid)
        return self._feats[i], self._targets[i]

    def eval_features(self, sid: str) -> np.ndarray:
        return self._feats[self._ids.index(sid)]

    def truths(self, sid: str) -> list[GraspRect]:
        t = self._targets[self._ids.index(sid)]
        return [denormalize_target(NormTargetVec.from_array(t))]


def train(config: TrainConfig, source) -> tuple[RunReport, DenseHead, AdamState]:
    ids = source.ids()
    if not ids:
        raise EmptyDataset("source has no samples")
    if len(ids) > 1:
        sp = ds.split(ids, config.split_ratio, config.seed)
        train_ids, val_ids = sp.train_ids, sp.val_ids
    else:
        train_ids, val_ids = ids, []

    head = init_params(source.feature_dim, config.seed,
                       dropout_p=config.dropout_p,
                       output_tanh=config.output_tanh)
    state = AdamState.for_head(head, lr=config.lr)

    data_rng = np.random.default_rng([config.seed, 1])
    drop_rng = np.random.default_rng([config.seed, 2])

    # frozen validation items so the val trace is comparable across epochs
    val_rng = np.random.default_rng([config.seed, 3])
    val_items = []
    for _ in range(config.val_batches):
        batch = []
        for _ in range(config.val_batch_size):
            if not val_ids:
                break
            sid = val_ids[int(val_rng.integers(len(val_ids)))]
            item = source.draw_item(sid, val_rng)
            if item is not None:
                batch.append(item)
        if batch:
            val_items.append(batch)

    train_loss: list[float] = []
    val_loss: list[float] = []
    epoch_seconds: list[float] = []
    global_batch = 0
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        losses = []
        for _ in range(config.batches_per_epoch):
            feats, targets = [], []
            while len(feats) < config.batch_size:
                sid = train_ids[int(data_rng.integers(len(train_ids)))]
                item = source.draw_item(sid, data_rng)
                if item is None:
                    continue
                feats.append(item[0])
                targets.append(item[1])
            f = np.asarray(feats)
            t = np.asarray(targets)
            out, cache = forward(head, f, train=True, rng=drop_rng)
            loss = mse_loss(out, t)
            if not math.isfinite(loss):
                raise NonFiniteLoss(global_batch)
            adam_step(head, backward(head, cache, t), state)
            losses.append(loss)
            global_batch += 1
        train_loss.append(float(np.mean(losses)))

        if val_items:
            v_losses = []
            for batch in val_items:
                f = np.asarray([b[0] for b in batch])
                t = np.asarray([b[1] for b in batch])
                out, _ = forward(head, f)
                v_losses.append(mse_loss(out, t))
            val_loss.append(float(np.mean(v_losses)))
        else:
            val_loss.append(train_loss[-1])
        epoch_seconds.append(time.perf_counter() - t0)

    eval_ids = val_ids if val_ids else train_ids
    accuracy, _ = evaluate(head, source, eval_ids)
    report = RunReport(
        seed=config.seed,
        train_loss=train_loss,
        val_loss=val_loss,
        accuracy=accuracy,
        dropped_augmentations=getattr(source, "dropped", 0),
        skipped_targets=getattr(source, "skipped_targets", 0),
        epoch_seconds=epoch_seconds,
    )
    return report, head, state


@dataclass
class Verdict:
    id: str
    success: bool
    best_truth: int
    best_jaccard: float
    pred: tuple  # (x, y, theta, w, h)


def evaluate(head: DenseHead, source, ids=None) -> tuple[float, list[Verdict]]:
    """Rectangle-metric accuracy over the given ids (eval mode, center
    view only). Never mutates the head."""
    if ids is None:
        ids = source.ids()
    verdicts = []
    n_success = 0
    for sid in ids:
        f = source.eval_features(sid)
        if f.size != head.in_dim:
            raise DimMismatch(
                f"features have dim {f.size}, head expects {head.in_dim}")
        out, _ = forward(head, f)
        pred = denormalize_target(NormTargetVec.from_array(out[0]))
        truths = source.truths(sid)
        if not truths:
            continue
        ok, idx = is_success(pred, truths)
        best_j = jaccard(pred, truths[idx]) if idx >= 0 else max(
            jaccard(pred, t) for t in truths)
        n_success += ok
        verdicts.append(Verdict(sid, ok, idx, best_j,
                                (pred.x, pred.y, pred.theta, pred.w, pred.h)))
    accuracy = n_success / len(verdicts) if verdicts else 0.0
    return accuracy, verdicts


def report_table(reports: list[RunReport]) -> str:
    """Min/mean/max accuracy block over a set of runs."""
    if not reports:
        raise ValueError("need at least one run report")
    accs = [r.accuracy for r in reports]
    lines = [
        f"{'runs':>6} {'min':>8} {'mean':>8} {'max':>8}",
        f"{len(accs):>6} {min(accs):>8.4f} {np.mean(accs):>8.4f} "
        f"{max(accs):>8.4f}",
    ]
    return "\n".join(lines)


def loss_csv(report: RunReport) -> str:
    """Per-epoch loss trace as 'epoch,train_loss,val_loss' rows."""
    lines = ["epoch,train_loss,val_loss"]
    for i, (tr, va) in enumerate(zip(report.train_loss, report.val_loss)):
        lines.append(f"{i},{tr!r},{va!r}")
    return "\n".join(lines) + "\n"
