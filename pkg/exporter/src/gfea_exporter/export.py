"""Frozen-backbone feature export.

Each backbone contributes its final pre-classifier convolutional feature
volume, flattened. The model runs in eval mode with gradients disabled,
so exporting the same data twice yields byte-identical files.

`weights="pretrained"` pulls ImageNet weights from the torchvision model
zoo; `weights="random"` uses a seeded random initialization instead (for
offline or smoke use — the features are still frozen and deterministic,
just not meaningful).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torchvision.models as tvm

from . import cornell, gfea
from .preprocess import compose_input

BACKBONES = {
    "alexnet": {"dim": 9216, "layer": "features"},
    "vgg19_bn": {"dim": 25088, "layer": "features"},
    "resnet50": {"dim": 100352, "layer": "layer4"},
}


@dataclass
class ExportJob:
    backbone: str
    dataset_root: str
    output: str
    batch_size: int = 8
    weights: str = "pretrained"  # "pretrained" | "random"
    seed: int = 0


def build_extractor(backbone: str, weights: str = "pretrained",
                    seed: int = 0) -> tuple[torch.nn.Module, str, int]:
    """Returns (frozen module, backbone_name tag, flattened feature dim)."""
    if backbone not in BACKBONES:
        raise ValueError(f"unknown backbone {backbone!r}; "
                         f"choose from {sorted(BACKBONES)}")
    if weights not in ("pretrained", "random"):
        raise ValueError(f"weights must be 'pretrained' or 'random': {weights}")

    torch.manual_seed(seed)
    zoo_weights = "IMAGENET1K_V1" if weights == "pretrained" else None
    if backbone == "alexnet":
        model = tvm.alexnet(weights=zoo_weights)
        module = model.features
    elif backbone == "vgg19_bn":
        model = tvm.vgg19_bn(weights=zoo_weights)
        module = model.features
    else:
        model = tvm.resnet50(weights=zoo_weights)
        # everything up to (excluding) the average pool and classifier
        module = torch.nn.Sequential(*list(model.children())[:-2])

    module.eval()
    for p in module.parameters():
        p.requires_grad_(False)

    tag = f"{backbone}/{BACKBONES[backbone]['layer']}"
    if weights == "random":
        tag += f"[random-seed{seed}]"
    return module, tag, BACKBONES[backbone]["dim"]


def extract_batch(module: torch.nn.Module,
                  tensors: list[np.ndarray]) -> np.ndarray:
    """Run composed 224x224x3 inputs through the frozen backbone; returns
    (n, dim) float32 features."""
    batch = torch.from_numpy(
        np.stack(tensors).transpose(0, 3, 1, 2)).to(torch.float32)
    with torch.no_grad():
        out = module(batch)
    return out.reshape(out.shape[0], -1).numpy()


def export_features(job: ExportJob) -> int:
    """Export features for every admitted sample; returns the count."""
    ids = cornell.scan_dataset(job.dataset_root)
    module, tag, dim = build_extractor(job.backbone, job.weights, job.seed)

    items: list[tuple[str, np.ndarray]] = []
    for start in range(0, len(ids), job.batch_size):
        chunk = ids[start:start + job.batch_size]
        tensors = []
        for sid in chunk:
            rgb, depth, missing = cornell.load_rgbd(job.dataset_root, sid)
            tensors.append(compose_input(rgb, depth, missing))
        feats = extract_batch(module, tensors)
        if feats.shape[1] != dim:
            raise RuntimeError(
                f"backbone produced dim {feats.shape[1]}, expected {dim}")
        items.extend(zip(chunk, feats))

    gfea.write_features(job.output, tag, dim, items)
    return len(items)
