"""ResNet-18 and SqueezeNet classifiers with a 3-grade head.

Parameter names follow the torchvision layout (``conv1``, ``layer1.0.bn2``,
``fc``; ``features.3.squeeze``, ``classifier.1``) so checkpoints converted
from that ecosystem map one-to-one onto these modules.
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .domain import COLLAGE_HEIGHT, COLLAGE_WIDTH, Collage, Grade
from .weights import WeightArchive, load_archive

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


class ArchitectureKind(str, enum.Enum):
    RESNET18 = "resnet18"
    SQUEEZENET = "squeezenet"


class ShapeMismatch(ValueError):
    pass


class WeightShapeMismatch(ValueError):
    def __init__(self, name, expected, found):
        self.name = name
        self.expected = expected
        self.found = found
        super().__init__(f"{name}: expected shape {expected}, archive has {found}")


# ResNet-18


class BasicBlock(nn.Module):
    expansion = 1

    def __init__(self, in_planes, planes, stride=1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_planes, planes, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(planes)
        self.relu = nn.ReLU(inplace=True)
        self.conv2 = nn.Conv2d(planes, planes, 3, stride=1, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(planes)
        self.downsample = None
        if stride != 1 or in_planes != planes:
            # projection shortcut when the shape changes
            self.downsample = nn.Sequential(
                nn.Conv2d(in_planes, planes, 1, stride=stride, bias=False),
                nn.BatchNorm2d(planes),
            )

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


class ResNet18(nn.Module):
    head_prefix = "fc."

    def __init__(self, num_classes=3):
        super().__init__()
        self.conv1 = nn.Conv2d(3, 64, 7, stride=2, padding=3, bias=False)
        self.bn1 = nn.BatchNorm2d(64)
        self.relu = nn.ReLU(inplace=True)
        self.maxpool = nn.MaxPool2d(3, stride=2, padding=1)
        self.layer1 = self._stage(64, 64, 1)
        self.layer2 = self._stage(64, 128, 2)
        self.layer3 = self._stage(128, 256, 2)
        self.layer4 = self._stage(256, 512, 2)
        self.avgpool = nn.AdaptiveAvgPool2d(1)
        self.fc = nn.Linear(512, num_classes)

        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.kaiming_normal_(m.weight, mode="fan_out", nonlinearity="relu")
            elif isinstance(m, nn.BatchNorm2d):
                nn.init.ones_(m.weight)
                nn.init.zeros_(m.bias)

    @staticmethod
    def _stage(in_planes, planes, stride):
        return nn.Sequential(BasicBlock(in_planes, planes, stride), BasicBlock(planes, planes))

    def reset_head(self):
        self.fc.reset_parameters()

    def forward(self, x):
        x = self.maxpool(self.relu(self.bn1(self.conv1(x))))
        x = self.layer4(self.layer3(self.layer2(self.layer1(x))))
        return self.fc(torch.flatten(self.avgpool(x), 1))


# SqueezeNet


class Fire(nn.Module):
    def __init__(self, in_planes, squeeze, expand1x1, expand3x3):
        super().__init__()
        self.squeeze = nn.Conv2d(in_planes, squeeze, 1)
        self.squeeze_activation = nn.ReLU(inplace=True)
        self.expand1x1 = nn.Conv2d(squeeze, expand1x1, 1)
        self.expand1x1_activation = nn.ReLU(inplace=True)
        self.expand3x3 = nn.Conv2d(squeeze, expand3x3, 3, padding=1)
        self.expand3x3_activation = nn.ReLU(inplace=True)

    def forward(self, x):
        x = self.squeeze_activation(self.squeeze(x))
        return torch.cat(
            [self.expand1x1_activation(self.expand1x1(x)), self.expand3x3_activation(self.expand3x3(x))],
            1,
        )


def _pool():
    return nn.MaxPool2d(3, stride=2, ceil_mode=True)


class SqueezeNet(nn.Module):
    """SqueezeNet v1.1 by default; ``version="1.0"`` gives the original layout."""

    head_prefix = "classifier.1."

    def __init__(self, num_classes=3, version="1.1"):
        super().__init__()
        relu = lambda: nn.ReLU(inplace=True)  # noqa: E731
        if version == "1.1":
            self.features = nn.Sequential(
                nn.Conv2d(3, 64, 3, stride=2), relu(), _pool(),
                Fire(64, 16, 64, 64), Fire(128, 16, 64, 64), _pool(),
                Fire(128, 32, 128, 128), Fire(256, 32, 128, 128), _pool(),
                Fire(256, 48, 192, 192), Fire(384, 48, 192, 192),
                Fire(384, 64, 256, 256), Fire(512, 64, 256, 256),
            )
        elif version == "1.0":
            self.features = nn.Sequential(
                nn.Conv2d(3, 96, 7, stride=2), relu(), _pool(),
                Fire(96, 16, 64, 64), Fire(128, 16, 64, 64), Fire(128, 32, 128, 128), _pool(),
                Fire(256, 32, 128, 128), Fire(256, 48, 192, 192), Fire(384, 48, 192, 192),
                Fire(384, 64, 256, 256), _pool(),
                Fire(512, 64, 256, 256),
            )
        else:
            raise ValueError(f"unknown SqueezeNet version {version!r}")
        self.version = version
        self.classifier = nn.Sequential(
            nn.Dropout(p=0.5), nn.Conv2d(512, num_classes, 1), relu(), nn.AdaptiveAvgPool2d(1)
        )
        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.kaiming_uniform_(m.weight)
                nn.init.zeros_(m.bias)
        self.reset_head()

    def reset_head(self):
        head = self.classifier[1]
        nn.init.normal_(head.weight, mean=0.0, std=0.01)
        nn.init.zeros_(head.bias)

    def forward(self, x):
        return torch.flatten(self.classifier(self.features(x)), 1)


# handle and inference


@dataclass
class ModelHandle:
    kind: ArchitectureKind
    num_classes: int
    pretrained: bool
    network: nn.Module
    input_size: tuple = (COLLAGE_HEIGHT, COLLAGE_WIDTH)

    @property
    def input_spec(self) -> tuple[int, int, int]:
        return (3, *self.input_size)

    @property
    def parameters(self) -> "OrderedDict[str, torch.Tensor]":
        return OrderedDict(self.network.named_parameters())

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.network.parameters() if p.requires_grad)

    def is_head(self, name: str) -> bool:
        return name.startswith(self.network.head_prefix)

    def state_archive(self) -> WeightArchive:
        """All float tensors of the network (parameters and BN statistics)."""
        tensors = OrderedDict(
            (k, v.detach().cpu().numpy().astype(np.float32))
            for k, v in self.network.state_dict().items()
            if v.is_floating_point()
        )
        return WeightArchive(self.kind.value, self.num_classes, tensors)

    def save(self, path) -> None:
        self.state_archive().save(path)

    def load_state_archive(self, archive: WeightArchive, backbone_only=False) -> None:
        own = self.network.state_dict()
        update = {}
        for name, t in own.items():
            if not t.is_floating_point() or (backbone_only and self.is_head(name)):
                continue
            found = archive.tensors.get(name)
            if found is None:
                raise WeightShapeMismatch(name, tuple(t.shape), None)
            if tuple(found.shape) != tuple(t.shape):
                raise WeightShapeMismatch(name, tuple(t.shape), tuple(found.shape))
            update[name] = torch.from_numpy(np.array(found, dtype=np.float32))
        self.network.load_state_dict(update, strict=False)


def _construct(kind, num_classes, squeezenet_version):
    if kind is ArchitectureKind.RESNET18:
        return ResNet18(num_classes)
    return SqueezeNet(num_classes, version=squeezenet_version)


def build_model(
    kind,
    num_classes: int = 3,
    pretrained: bool = False,
    weights_path=None,
    seed: int = 0,
    squeezenet_version: str = "1.1",
    input_size=(COLLAGE_HEIGHT, COLLAGE_WIDTH),
) -> ModelHandle:
    """Build a classifier.

    All parameters are initialised from ``seed``. When ``pretrained`` is set,
    every backbone tensor is then overwritten from the archive at
    ``weights_path`` and only the head keeps its seeded initialisation.
    """
    kind = ArchitectureKind(kind)
    if num_classes < 1:
        raise ValueError("num_classes must be positive")
    if pretrained and weights_path is None:
        raise ValueError("pretrained=True requires weights_path")
    archive = load_archive(weights_path) if pretrained else None
    if archive is not None and archive.kind != kind.value:
        raise ValueError(f"archive holds {archive.kind!r} weights, not {kind.value!r}")

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed & 0xFFFF_FFFF_FFFF_FFFF)
        network = _construct(kind, num_classes, squeezenet_version)
    handle = ModelHandle(kind, num_classes, pretrained, network, tuple(input_size))
    if archive is not None:
        handle.load_state_archive(archive, backbone_only=True)
    network.eval()
    return handle


def load_model(path, pretrained: bool = False,
               input_size=(COLLAGE_HEIGHT, COLLAGE_WIDTH)) -> ModelHandle:
    """Rebuild a full model (head included) from a saved archive.

    ``pretrained`` only selects the input normalisation the weights expect.
    """
    archive = load_archive(path)
    version = "1.1"
    stem = archive.tensors.get("features.0.weight")
    if archive.kind == ArchitectureKind.SQUEEZENET.value and stem is not None and stem.shape[0] == 96:
        version = "1.0"
    handle = build_model(archive.kind, archive.num_classes, squeezenet_version=version,
                         input_size=input_size)
    handle.pretrained = pretrained
    handle.load_state_archive(archive)
    return handle


def normalize(model: ModelHandle, pixels) -> torch.Tensor:
    """uint8 images (B, H, W, 3) -> float32 (B, 3, H, W) in the model's input scale."""
    x = torch.as_tensor(np.asarray(pixels), dtype=torch.float32).permute(0, 3, 1, 2) / 255.0
    if model.pretrained:
        mean = torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1)
        std = torch.tensor(IMAGENET_STD).view(1, 3, 1, 1)
        return (x - mean) / std
    return x - 0.5


def collage_batch(model: ModelHandle, collages) -> torch.Tensor:
    return normalize(model, np.stack([c.pixels for c in collages]))


def check_input(model: ModelHandle, batch) -> None:
    shape = tuple(batch.shape)
    if len(shape) != 4 or shape[0] < 1 or shape[1:] != model.input_spec:
        raise ShapeMismatch(f"expected (B>=1, {', '.join(map(str, model.input_spec))}), got {shape}")


def forward(model: ModelHandle, batch) -> np.ndarray:
    """Inference-mode logits, shape (B, num_classes)."""
    batch = torch.as_tensor(batch, dtype=torch.float32)
    check_input(model, batch)
    model.network.eval()
    with torch.no_grad():
        return model.network(batch).numpy()


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def label_from_logits(logits) -> tuple[Grade, np.ndarray]:
    # np.argmax returns the first maximum, i.e. the lowest class index on ties
    return Grade(int(np.argmax(np.asarray(logits)))), softmax(logits)


def predict(model: ModelHandle, collage: Collage) -> tuple[Grade, np.ndarray]:
    logits = forward(model, collage_batch(model, [collage]))[0]
    return label_from_logits(logits)
