"""Output writers and the ``key = value`` config-file reader."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

from ..errors import DomainError

SCHEMA = 1


def read_config(path) -> dict:
    """Parse ``key = value`` lines (UTF-8, ``#`` comments, blank lines ignored).

    Keys are normalised to underscores.  Raises ``OSError`` on read
    failure and :class:`DomainError` on a malformed line.
    """
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise DomainError(f"{path}:{lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def _clean(obj):
    """Replace non-finite floats by ``None`` (JSON has no NaN) and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _open(path):
    if path in (None, "-"):
        return _Stdout()
    return open(path, "w", encoding="utf-8", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def table_csv(table: dict, config: dict) -> str:
    """RFC-4180 CSV with ``# key=value`` config lines in front; LF endings."""
    buf = io.StringIO()
    for key in sorted(config):
        buf.write(f"# {key}={_scalar(config[key])}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table["columns"])
    for row in table["rows"]:
        w.writerow([_scalar(v) for v in row])
    return buf.getvalue()


def _scalar(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    if isinstance(v, (list, tuple)):
        return ",".join(str(_scalar(x)) for x in v)
    return v


def write_report(report, path, fmt: str) -> None:
    """JSON: the whole report.  CSV: the main table; the JSON summary goes next to it."""
    if fmt == "json":
        with _open(path) as fh:
            fh.write(dumps(report.to_dict()))
        return
    if fmt != "csv":
        raise DomainError(f"unknown format {fmt!r}")
    with _open(path) as fh:
        fh.write(table_csv(report.main_table(), report.config))
    summary = dumps(report.to_dict(tables=False))
    if path in (None, "-"):
        sys.stderr.write(summary)
    else:
        p = Path(path)
        p.with_name(p.stem + ".summary.json").write_text(summary, encoding="utf-8")
