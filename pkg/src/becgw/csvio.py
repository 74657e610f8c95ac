"""CSV emission with ``#`` metadata lines and exact float round trips."""

import csv
from datetime import datetime, timezone
import io
import math
from pathlib import Path

import numpy as np

from . import __version__


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, float)) or hasattr(v, "dtype"):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def parse_value(s):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return float(s)
    except ValueError:
        return s


def render_csv(rows, header, metadata=None, timestamp=True):
    """CSV text: ``# key = value`` lines, then the header, then one line per row."""
    header = list(header)
    buf = io.StringIO()
    meta = dict(metadata or {})
    meta.setdefault("code_version", __version__)
    if timestamp:
        meta["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    for key, value in meta.items():
        buf.write(f"# {key} = {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i, row in enumerate(rows):
        row = list(row)
        if len(row) != len(header):
            raise ValueError(f"row {i} has {len(row)} fields, header has {len(header)}")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_csv(rows, header, path, metadata=None, timestamp=True):
    """Write :func:`render_csv` output to ``path``; I/O errors name the path."""
    text = render_csv(rows, header, metadata, timestamp)
    path = Path(path)
    try:
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(source):
    """Inverse of :func:`emit_csv`: ``(header, rows, metadata)`` from a path or text."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text(encoding="utf-8")
    meta, body = {}, []
    for line in source.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    reader = csv.reader(body)
    try:
        header = next(reader)
    except StopIteration:
        return [], [], meta
    rows = [[parse_value(s) for s in r] for r in reader]
    return header, rows, meta


def body_lines(text):
    """CSV text without its metadata lines (what must be reproducible)."""
    return [line for line in text.splitlines() if not line.startswith("#")]
