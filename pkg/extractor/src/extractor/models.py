"""Model loading and penultimate-feature hook points.

Features are taken after global average pooling, before the final affine
layer (post-activation), which is where activation rectification
operates. Each supported architecture documents its hook point here.
"""

from __future__ import annotations

import torch
from torch import nn

from .jobs import ExtractError

# architecture -> (builder name, how to reach pooled features, head accessor)
_HOOKS = {
    "mobilenet_v2": "features -> adaptive_avg_pool2d -> flatten; head = classifier[-1]",
    "resnet18": "stem+layers -> avgpool -> flatten; head = fc",
    "resnet50": "stem+layers -> avgpool -> flatten; head = fc",
}

SUPPORTED_MODELS = tuple(_HOOKS)


def hook_point(model_name: str) -> str:
    return _HOOKS[model_name]


def load_model(name: str, weights: str, seed: int) -> nn.Module:
    """Build a torchvision classifier; weights="none" gives seeded random init."""
    import torchvision.models as tvm

    if name not in _HOOKS:
        raise ExtractError(f"unsupported model {name!r}; choose from {SUPPORTED_MODELS}")
    builder = getattr(tvm, name)
    if weights.lower() == "none":
        torch.manual_seed(seed)
        model = builder(weights=None)
    else:
        enum = tvm.get_model_weights(name)
        try:
            resolved = getattr(enum, weights)
        except AttributeError:
            raise ExtractError(
                f"unknown weights {weights!r} for {name}; available: "
                f"{[w.name for w in enum]} or 'none'") from None
        try:
            model = builder(weights=resolved)
        except Exception as e:
            raise ExtractError(
                f"cannot load {name} weights {weights!r} ({e}); pass --weights none "
                f"for a seeded random initialization or place the checkpoint in "
                f"the torch hub cache") from e
    model.eval()
    return model


def eval_transform(model_name: str, weights: str):
    """The model's published evaluation preprocessing."""
    import torchvision.models as tvm
    from torchvision import transforms

    if weights.lower() != "none":
        enum = tvm.get_model_weights(model_name)
        return getattr(enum, weights).transforms()
    return transforms.Compose([
        transforms.Resize(256),
        transforms.CenterCrop(224),
        transforms.ToTensor(),
        transforms.Normalize(mean=[0.485, 0.456, 0.406],
                             std=[0.229, 0.224, 0.225]),
    ])


def penultimate_features(model: nn.Module, model_name: str,
                         batch: torch.Tensor) -> torch.Tensor:
    """Pooled penultimate activations for one batch (N x M)."""
    if model_name == "mobilenet_v2":
        x = model.features(batch)
        x = nn.functional.adaptive_avg_pool2d(x, 1)
        return torch.flatten(x, 1)
    # resnet family
    x = model.conv1(batch)
    x = model.bn1(x)
    x = model.relu(x)
    x = model.maxpool(x)
    for layer in (model.layer1, model.layer2, model.layer3, model.layer4):
        x = layer(x)
    x = model.avgpool(x)
    return torch.flatten(x, 1)


def classifier_head(model: nn.Module, model_name: str) -> nn.Linear:
    """The final affine layer whose weights/bias get exported."""
    if model_name == "mobilenet_v2":
        head = model.classifier[-1]
    else:
        head = model.fc
    if not isinstance(head, nn.Linear):
        raise ExtractError(f"{model_name}: expected a Linear head, got {type(head)}")
    return head
