import numpy as np
import pytest

from extractor import ExtractJob, extract
from extractor.jobs import ExtractError
from extractor.extract import verify_logits


def job_for(images, out, **kw):
    defaults = dict(model="mobilenet_v2", weights="none", seed=0, batch_size=8)
    defaults.update(kw)
    return ExtractJob(data_dir=str(images), out_dir=str(out), **defaults)


def test_bundle_format_arithmetic(small_images, tmp_path):
    report = extract(job_for(small_images, tmp_path / "b"))
    assert report["n_samples"] == 10
    assert report["n_classes"] == 1000
    m = report["n_channels"]
    assert m == 1280  # mobilenet_v2 pooled features
    assert (tmp_path / "b" / "features.f32").stat().st_size == 10 * m * 4
    assert (tmp_path / "b" / "labels.i32").stat().st_size == 10 * 4
    assert (tmp_path / "b" / "head_weights.f32").stat().st_size == 1000 * m * 4
    assert (tmp_path / "b" / "head_bias.f32").stat().st_size == 1000 * 4


def test_manifest_contract(small_images, tmp_path):
    extract(job_for(small_images, tmp_path / "b"))
    lines = (tmp_path / "b" / "manifest.txt").read_text().splitlines()
    keys = [ln.split(" = ")[0] for ln in lines]
    assert keys == sorted(keys)
    kv = dict(ln.split(" = ", 1) for ln in lines)
    assert kv["format_version"] == "1"
    assert kv["dtype_features"] == "f32le"
    assert kv["dtype_labels"] == "i32le"


def test_deterministic_rerun_bitwise(small_images, tmp_path):
    extract(job_for(small_images, tmp_path / "a"))
    extract(job_for(small_images, tmp_path / "b"))
    for name in ("features.f32", "labels.i32", "head_weights.f32", "head_bias.f32",
                 "manifest.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_batch_size_changes_nothing(small_images, tmp_path):
    extract(job_for(small_images, tmp_path / "a", batch_size=3))
    extract(job_for(small_images, tmp_path / "b", batch_size=10))
    a = np.fromfile(tmp_path / "a" / "features.f32", dtype="<f4")
    b = np.fromfile(tmp_path / "b" / "features.f32", dtype="<f4")
    assert np.allclose(a, b, rtol=0, atol=1e-5)


def test_healthy_export_logit_deviation(small_images, tmp_path):
    report = extract(job_for(small_images, tmp_path / "b"))
    assert report["max_logit_deviation"] <= 1e-4


def test_bias_dropped_is_flagged(small_images, tmp_path):
    # resnet18: its randomly initialized fc bias is nonzero, unlike
    # mobilenet_v2 whose classifier bias starts at exactly zero
    out = tmp_path / "b"
    extract(job_for(small_images, out, model="resnet18"))
    bias = np.fromfile(out / "head_bias.f32", dtype="<f4")
    assert np.abs(bias).max() > 1e-3
    np.zeros_like(bias).tofile(out / "head_bias.f32")
    recomputed = verify_logits(out, _reference_logits(small_images, "resnet18"))
    assert recomputed >= np.abs(bias).max() * 0.99  # far above accumulation noise


def _reference_logits(images, model_name):
    import torch
    from extractor.models import eval_transform, load_model
    from torchvision.datasets import ImageFolder

    model = load_model(model_name, "none", 0)
    ds = ImageFolder(str(images), transform=eval_transform(model_name, "none"))
    with torch.no_grad():
        batch = torch.stack([ds[i][0] for i in range(len(ds))])
        return model(batch).numpy()


def test_zero_images_errors_not_empty_bundle(tmp_path):
    empty = tmp_path / "noimgs"
    (empty / "class_a").mkdir(parents=True)
    with pytest.raises(ExtractError):
        extract(job_for(empty, tmp_path / "b"))
    assert not (tmp_path / "b" / "manifest.txt").exists()


def test_missing_data_dir_actionable(tmp_path):
    with pytest.raises(ExtractError) as exc:
        extract(job_for(tmp_path / "nowhere", tmp_path / "b"))
    assert "does not exist" in str(exc.value)


def test_unknown_model_and_weights(small_images, tmp_path):
    with pytest.raises(ExtractError):
        extract(ExtractJob(model="vgg_unknown", data_dir=str(small_images),
                           out_dir=str(tmp_path / "b"), weights="none"))
    with pytest.raises(ExtractError):
        extract(job_for(small_images, tmp_path / "b", weights="NOT_A_WEIGHT"))


def test_bad_batch_size():
    with pytest.raises(ExtractError):
        ExtractJob(model="mobilenet_v2", data_dir="x", out_dir="y", batch_size=0)


def test_resnet18_hook(small_images, tmp_path):
    report = extract(job_for(small_images, tmp_path / "b", model="resnet18"))
    assert report["n_channels"] == 512
    assert report["max_logit_deviation"] <= 1e-4
