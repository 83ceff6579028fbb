import numpy as np
import pytest
from PIL import Image


def make_image_folder(root, n_classes, per_class, size=(96, 96), seed=0):
    """Deterministic PNG noise images in one-subdirectory-per-class layout."""
    rng = np.random.default_rng(seed)
    for c in range(n_classes):
        d = root / f"class_{c:03d}"
        d.mkdir(parents=True)
        for i in range(per_class):
            arr = rng.integers(0, 256, size=(*size, 3), dtype=np.uint8)
            Image.fromarray(arr, "RGB").save(d / f"img_{i:04d}.png")
    return root


@pytest.fixture(scope="session")
def small_images(tmp_path_factory):
    """10 images across 2 classes."""
    return make_image_folder(tmp_path_factory.mktemp("imgs_small"), 2, 5)


@pytest.fixture(scope="session")
def hundred_images(tmp_path_factory):
    """104 images across 8 classes, for the end-to-end integration run."""
    return make_image_folder(tmp_path_factory.mktemp("imgs_100"), 8, 13)
