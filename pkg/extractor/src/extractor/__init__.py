"""Feature-bundle exporter for pretrained image classifiers.

Runs deterministic batched inference over an image folder, takes the
global-average-pooled penultimate activations plus the final affine
head, and writes them in the portable little-endian bundle format the
tsre harness consumes (manifest.txt, features.f32, labels.i32,
head_weights.f32, head_bias.f32).
"""

from .jobs import ExtractJob
from .extract import extract, verify_logits

__version__ = "0.1.0"
