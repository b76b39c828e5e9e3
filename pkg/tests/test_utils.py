import logging

import pytest

from src.utils import format_time, relative_scale, setup_logging


@pytest.mark.parametrize("seconds, text", [(0.25, "250ms"), (12.34, "12.3s"), (90, "1.5m")])
def test_format_time(seconds, text):
    assert format_time(seconds) == text


def test_relative_scale():
    assert relative_scale() == 1.0
    assert relative_scale(0.5, -3.0) == 3.0


def test_setup_logging_replaces_its_own_handlers(tmp_path):
    log_file = tmp_path / "logs" / "momentkit.log"
    root = logging.getLogger()
    try:
        setup_logging(str(log_file), "INFO", console_output=True, file_output=True)
        setup_logging(str(log_file), "INFO", console_output=True, file_output=True)
        ours = [h for h in root.handlers if getattr(h, "_momentkit", False)]
        assert len(ours) == 2
        logging.getLogger("src.test").info("hello")
        for handler in ours:
            handler.flush()
        assert "hello" in log_file.read_text()
    finally:
        setup_logging(level="WARNING", console_output=False)
