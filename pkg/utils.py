#!/usr/bin/env python3

import io
import re
import sys
from pathlib import Path

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from tqdm import tqdm

# Repository data shipped next to the modules
ROOT_DIR = Path(__file__).resolve().parent
DATA_DIR = ROOT_DIR / "data"
MATERIALS_PATH = DATA_DIR / "materials.csv"
RECORDS_PATH = DATA_DIR / "published_records.csv"
REFERENCE_SPEC_PATH = DATA_DIR / "reference_spec.txt"
PROFILE_PATH = DATA_DIR / "design_profile.txt"

# 1 kPa = 1e-3 N/mm^2
KPA_TO_N_PER_MM2 = 1e-3

# Set by main.py from --quiet
QUIET = False


class DataFormatError(ValueError):
    """A data file could not be parsed. Carries the file and 1-based line."""

    def __init__(self, message, path=None, line=None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path and line:
            where = f"{self.path}:{line}: "
        elif self.path:
            where = f"{self.path}: "
        super().__init__(f"{where}{message}")


class ConfigError(ValueError):
    pass


class PressureLimitError(ValueError):
    pass


class DegenerateCurveError(ValueError):
    pass


class EmptyInputError(ValueError):
    pass


class InsufficientRowsError(ValueError):
    pass


class NoOverlapError(RuntimeError):
    pass


class InfeasibleBoundsError(RuntimeError):
    pass


def status(message, force=False):
    """Print a status line to stderr without tearing any active progress bar"""
    if QUIET and not force:
        return
    tqdm.write(message, file=sys.stderr)


def warn(message):
    status(f"⚠️  {message}")


def read_key_values(path, allowed=None, required=()):
    """
    Parse a flat ``key=value`` text file.

    Comments (``#``) and blank lines are ignored. Unknown keys (when
    ``allowed`` is given) and missing required keys raise DataFormatError.
    Returns a plain dict of stripped string values.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    values = dotenv_values(path)
    result = {}
    for key, value in values.items():
        if allowed is not None and key not in allowed:
            raise DataFormatError(
                f"unknown key '{key}' (expected one of: {', '.join(sorted(allowed))})",
                path,
                key_line(path, key),
            )
        if value is None or value.strip() == "":
            raise DataFormatError(f"key '{key}' has no value", path, key_line(path, key))
        result[key] = value.strip()

    missing = [key for key in required if key not in result]
    if missing:
        raise DataFormatError(f"missing keys: {', '.join(missing)}", path)
    return result


def key_line(path, key):
    """Line number of the first ``key=`` assignment in a key-value file"""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError:
        return None
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("export "):
            stripped = stripped[len("export "):].lstrip()
        if stripped.split("=", 1)[0].strip() == key:
            return number
    return None


def key_value_float(values, key, path=None, default=None):
    """Fetch ``key`` from parsed key-values as a float"""
    if key not in values:
        if default is None:
            raise DataFormatError(f"missing key '{key}'", path)
        return default
    try:
        return float(values[key])
    except ValueError:
        line = key_line(path, key) if path else None
        raise DataFormatError(
            f"key '{key}' must be a number, got '{values[key]}'", path, line
        ) from None


def write_key_values(pairs, stream):
    """Write ``(key, value)`` pairs as ``key=value`` lines in the given order"""
    for key, value in pairs:
        if isinstance(value, float):
            value = repr(value)
        stream.write(f"{key}={value}\n")


def read_csv_rows(path, header):
    """
    Read a UTF-8 CSV file with an exact expected header.

    Lines beginning with ``#`` are metadata: ``# key=value`` entries are
    collected into a dict. Returns ``(rows, metadata)`` where ``rows`` is a
    list of ``(line_number, {column: text})``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    text = path.read_text(encoding="utf-8")
    metadata = {}
    data_lines = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            entry = stripped.lstrip("#").strip()
            if "=" in entry:
                key, value = entry.split("=", 1)
                metadata[key.strip()] = value.strip()
            continue
        data_lines.append((number, line))

    if not data_lines:
        raise DataFormatError("empty file (missing header)", path, 1)

    header_line, header_text = data_lines[0]
    found = [column.strip() for column in header_text.split(",")]
    if found != list(header):
        raise DataFormatError(
            f"unexpected header '{header_text.strip()}', expected '{','.join(header)}'",
            path,
            header_line,
        )

    try:
        frame = pd.read_csv(
            io.StringIO("\n".join(line for _, line in data_lines)),
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.ParserError as e:
        raise DataFormatError(_parser_message(e), path, _parser_line(e, data_lines)) from None
    if len(frame) != len(data_lines) - 1:
        raise DataFormatError("malformed rows (quoted fields spanning lines?)", path)

    rows = []
    for (number, _), (_, record) in zip(data_lines[1:], frame.iterrows()):
        rows.append((number, {column: str(record[column]).strip() for column in header}))
    return rows, metadata


def _parser_line(error, data_lines):
    """File line of a pandas tokenizer error; pandas counts the comment-free text"""
    match = re.search(r"line (\d+)", str(error))
    if match is None:
        return None
    index = int(match.group(1)) - 1
    if 0 <= index < len(data_lines):
        return data_lines[index][0]
    return None


def _parser_message(error):
    match = re.search(r"Expected (\d+) fields in line \d+, saw (\d+)", str(error))
    if match is None:
        return f"malformed row: {str(error).strip()}"
    return f"expected {match.group(1)} fields, saw {match.group(2)}"


def csv_float(row, column, path, line, optional=False):
    """Parse one CSV cell as a float; empty cells are ``None`` when optional"""
    text = row.get(column, "")
    if text == "":
        if optional:
            return None
        raise DataFormatError(f"column '{column}' is empty", path, line)
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(
            f"column '{column}' must be a number, got '{text}'", path, line
        ) from None


def write_frame_csv(frame, stream):
    """Full-precision CSV with LF line endings and no index column"""
    frame.to_csv(stream, index=False, lineterminator="\n")


def format_sig(value, digits=4):
    """Format a number to a fixed count of significant digits for tables"""
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "yes" if value else "no"
    if isinstance(value, (int, float)):
        return f"{value:.{digits}g}"
    return str(value)


def render_frame(frame, digits=4):
    """Aligned plain-text table with numbers at ``digits`` significant digits"""
    if frame.empty:
        return "  ".join(frame.columns) + "\n"
    formatters = {
        column: (lambda value, d=digits: format_sig(value, d))
        for column in frame.columns
    }
    return frame.to_string(index=False, formatters=formatters) + "\n"
