"""Loading inputs and writing reports.

Sequence files are JSON (a list, or {"moments": [...], "exact": ["p/q", ...]})
or CSV (one or more values per line). Values written as rational strings such
as "1/3" carry an exact track. Partial sequences are
{"entries": {"0": 1.0, "2": 0.5}, "horizon": 10} or a list with nulls.
"-" reads standard input.
"""

import csv
import dataclasses
import io
import json
import logging
import math
import re
import sys
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from src.exceptions import InputError
from src.measures import AtomicMeasure, SignedAtomicMeasure
from src.sequences import PartialMomentSequence, TruncatedMomentSequence

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SIGNIFICANT_DIGITS = 17
_FLOAT_TOKEN = "\x00float:"
_FLOAT_PATTERN = re.compile(r'"\\u0000float:(\d+)"')


def _read_text(path: PathLike) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return f.read()
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}")


def _read_json(path: PathLike) -> Any:
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}")


def _parse_number(value, index: int) -> Union[int, float, Fraction]:
    if isinstance(value, bool):
        raise InputError(f"Entry {index} is a boolean")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text) if "/" in text or text.lstrip("-").isdigit() else float(text)
        except (ValueError, ZeroDivisionError):
            pass
    raise InputError(f"Entry {index} is not a number: {value!r}")


def sequence_from_values(values: Sequence, exact: Optional[Sequence] = None) -> TruncatedMomentSequence:
    """Entries that are all integers or rational strings produce an exact track."""
    numbers = [_parse_number(v, k) for k, v in enumerate(values)]
    if exact is not None:
        rationals = [Fraction(_parse_number(v, k)) for k, v in enumerate(exact)]
        return TruncatedMomentSequence(tuple(float(x) for x in numbers), tuple(rationals))
    if numbers and all(isinstance(x, (int, Fraction)) for x in numbers):
        return TruncatedMomentSequence.from_fractions(numbers)
    return TruncatedMomentSequence(tuple(float(x) for x in numbers))


def _csv_values(text: str) -> List[str]:
    values = []
    for row in csv.reader(io.StringIO(text)):
        values.extend(cell.strip() for cell in row if cell.strip() and not cell.strip().startswith("#"))
    return values


def load_sequence(path: PathLike) -> TruncatedMomentSequence:
    """Load a truncated sequence from JSON or CSV."""
    if str(path).lower().endswith(".csv"):
        return sequence_from_values(_csv_values(_read_text(path)))

    data = _read_json(path)
    if is_partial_document(data):
        raise InputError(f"{path} holds a partial sequence; this command needs every moment")
    if isinstance(data, list):
        return sequence_from_values(data)
    if isinstance(data, dict) and "moments" in data:
        return sequence_from_values(data["moments"], data.get("exact"))
    raise InputError(f"{path}: expected a list or an object with 'moments'")


def is_partial_document(data: Any) -> bool:
    """Objects with an 'entries' mapping (or index/value records), or lists with null gaps."""
    if isinstance(data, list):
        return None in data
    if not isinstance(data, dict) or "entries" not in data:
        return False
    raw = data["entries"]
    return isinstance(raw, dict) or (isinstance(raw, list) and any(isinstance(item, dict) for item in raw))


def partial_from_data(data: Any) -> PartialMomentSequence:
    """{"entries": {"0": 1, "2": 0.5}, "horizon": 10} or a list with nulls for gaps."""
    if isinstance(data, list):
        specified = {k: _parse_number(v, k) for k, v in enumerate(data) if v is not None}
        return PartialMomentSequence(specified, len(data) - 1)
    if is_partial_document(data):
        raw = data["entries"]
        try:
            if isinstance(raw, list):
                raw = {item["index"]: item["value"] for item in raw}
            specified = {int(k): float(_parse_number(v, int(k))) for k, v in raw.items()}
        except (TypeError, ValueError, KeyError) as e:
            raise InputError(f"Malformed partial sequence: {e}")
        return PartialMomentSequence(specified, data.get("horizon"))
    raise InputError("Expected a partial sequence: an object with an 'entries' mapping or a list with nulls")


def load_partial(path: PathLike) -> PartialMomentSequence:
    return partial_from_data(_read_json(path))


def load_document(path: PathLike) -> Any:
    """Raw JSON document (used to route full versus partial sequences)."""
    if str(path).lower().endswith(".csv"):
        return _csv_values(_read_text(path))
    return _read_json(path)


def measure_from_data(data: Any) -> AtomicMeasure:
    """{"atoms": [{"node": p, "weight": c}, ...]} or {"nodes": [...], "weights": [...]}."""
    if isinstance(data, dict) and "atoms" in data:
        try:
            return AtomicMeasure.from_atoms((float(a["node"]), float(a["weight"])) for a in data["atoms"])
        except (KeyError, TypeError) as e:
            raise InputError(f"Malformed atom list: {e}")
    if isinstance(data, dict) and "nodes" in data and "weights" in data:
        return AtomicMeasure(tuple(data["nodes"]), tuple(data["weights"]))
    raise InputError("Expected a measure with 'atoms' or 'nodes'/'weights'")


def load_measure(path: PathLike) -> AtomicMeasure:
    return measure_from_data(_read_json(path))


def load_signed_measure(path: PathLike) -> SignedAtomicMeasure:
    """{"plus": measure, "minus": measure}; either part may be omitted."""
    data = _read_json(path)
    if not isinstance(data, dict) or not ({"plus", "minus"} & data.keys()):
        raise InputError("Expected a signed measure with 'plus' and/or 'minus'")
    plus = measure_from_data(data["plus"]) if "plus" in data else AtomicMeasure()
    minus = measure_from_data(data["minus"]) if "minus" in data else AtomicMeasure()
    return SignedAtomicMeasure(plus, minus)


def format_float(value: float) -> str:
    """17 significant digits, always readable back as a float; non-finite values as json writes them."""
    value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    text = format(value, f".{SIGNIFICANT_DIGITS}g")
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def _tokenize_floats(value: Any, floats: List[float]) -> Any:
    if isinstance(value, float):
        floats.append(value)
        return f"{_FLOAT_TOKEN}{len(floats) - 1}"
    if isinstance(value, dict):
        return {k: _tokenize_floats(v, floats) for k, v in value.items()}
    if isinstance(value, list):
        return [_tokenize_floats(v, floats) for v in value]
    return value


def sequence_to_dict(seq: TruncatedMomentSequence) -> Dict[str, Any]:
    result: Dict[str, Any] = {"moments": list(seq.entries)}
    if seq.exact is not None:
        result["exact"] = [str(v) for v in seq.exact]
    return result


def to_jsonable(value: Any) -> Any:
    """Convert report values: rationals to "p/q", complex to {"re", "im"}, numpy scalars to Python."""
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, TruncatedMomentSequence):
        return sequence_to_dict(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


class ReportWriter:
    """Writer for JSON reports (stdout or file) and trajectory CSVs."""

    def __init__(self, out_path: Optional[PathLike] = None, indent: int = 2, stream=None):
        """
        Initialize report writer.

        Args:
            out_path: Output file; None or "-" writes to the stream
            indent: JSON indentation
            stream: Text stream for stdout output (default sys.stdout)
        """
        self.out_path = Path(out_path) if out_path and str(out_path) != "-" else None
        self.indent = indent
        self.stream = stream

    def render(self, report: Any) -> str:
        """JSON text with every float written to SIGNIFICANT_DIGITS digits."""
        floats: List[float] = []
        payload = _tokenize_floats(to_jsonable(report), floats)
        text = json.dumps(payload, indent=self.indent, ensure_ascii=False)
        return _FLOAT_PATTERN.sub(lambda m: format_float(floats[int(m.group(1))]), text)

    def write(self, report: Any) -> str:
        """Write a report and return the rendered text."""
        text = self.render(report)
        if self.out_path is None:
            stream = self.stream or sys.stdout
            stream.write(text + "\n")
            stream.flush()
            return text

        try:
            self.out_path.parent.mkdir(parents=True, exist_ok=True)
            # Write to temporary file first, then rename
            temp_path = self.out_path.with_suffix(self.out_path.suffix + '.tmp')
            with open(temp_path, 'w', encoding='utf-8') as f:
                f.write(text + "\n")
            temp_path.replace(self.out_path)
            logger.debug(f"Saved report to {self.out_path}")
        except OSError as e:
            logger.error(f"Failed to save report to {self.out_path}: {e}")
            raise
        return text

    @staticmethod
    def save_trajectory_csv(trajectory: Sequence[float], path: PathLike):
        """Write columns order, lambda_min for external plotting."""
        csv_path = Path(path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with open(csv_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(["order", "lambda_min"])
            for n, value in enumerate(trajectory):
                writer.writerow([n, format_float(value)])
        logger.info(f"Saved trajectory to {csv_path}")
