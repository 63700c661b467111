import json
import shutil

import pytest

from helpers import GOLDEN


@pytest.fixture
def chain_config(tmp_path):
    """Config file for the golden a -> b -> c chain, data under tmp_path."""
    for name in ("chain_model.json", "chain_lexicon.json"):
        shutil.copy(GOLDEN / name, tmp_path / name)
    cfg = tmp_path / "config.json"
    cfg.write_text(
        json.dumps(
            {
                "data_dir": "data",
                "model": "chain_model.json",
                "lexicon": "chain_lexicon.json",
                "items_per_session": 7,
                "listen": "127.0.0.1:0",
                "lock_timeout": 2,
            }
        )
    )
    return cfg


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
