import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from minsyn.cli import main  # noqa: E402


@pytest.fixture(scope="session")
def word_data_dir(tmp_path_factory) -> Path:
    """Word dataset built once per session through the CLI."""
    out = tmp_path_factory.mktemp("words") / "data"
    code = main(["dataset-build", "--out-dir", str(out), "--glyphs", "builtin"])
    assert code == 0
    return out
