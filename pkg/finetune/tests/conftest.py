import pytest

try:
    import finetune_runner  # noqa: F401
except ImportError:
    collect_ignore_glob = ["*"]
else:
    from .ft_fixtures import write_training_file

    @pytest.fixture
    def training_file(tmp_path):
        return write_training_file(tmp_path / "train.jsonl", 50)
