import pytest

from tsre.cli import main


@pytest.fixture(scope="session")
def small_bench(tmp_path_factory):
    """Small synthetic benchmark (train/id_test/ood bundles) shared per session."""
    root = tmp_path_factory.mktemp("bench")
    rc = main(["synth", "--out", str(root), "--seed", "7",
               "--classes", "5", "--channels", "8",
               "--id-train", "400", "--id-test", "200", "--ood", "200"])
    assert rc == 0
    return root
