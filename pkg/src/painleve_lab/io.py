"""Deterministic CSV/JSON writers and matching readers.

Every file carries the run configuration and package version so that it can
be traced back to the command that produced it.  No timestamps are written,
so identical configurations give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Sequence, Tuple

from . import __version__

ARTIFACT = "painleve-lab"


def to_plain(x: Any) -> Any:
    """Convert library scalars and containers to JSON-safe values.

    Exact rationals become ``"p/q"`` strings, multiprecision numbers become
    decimal strings at full working precision, complex values become
    ``[re, im]`` pairs.
    """
    if x is None or isinstance(x, (bool, str, int)):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, complex):
        return [to_plain(x.real), to_plain(x.imag)]
    if hasattr(x, "context"):  # mpmath
        ctx = x.context
        digits = max(17, int(ctx.prec * 0.30103) + 1)
        if hasattr(x, "imag") and x.imag != 0:
            return [ctx.nstr(x.real, digits), ctx.nstr(x.imag, digits)]
        return ctx.nstr(x.real if hasattr(x, "real") else x, digits)
    if hasattr(x, "value") and hasattr(x, "name"):  # Enum
        return x.value
    if hasattr(x, "to_json"):
        return to_plain(x.to_json())
    if isinstance(x, dict):
        return {str(k): to_plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_plain(v) for v in x]
    if hasattr(x, "tolist"):  # numpy
        return to_plain(x.tolist())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def header(config: dict) -> dict:
    return {"artifact": ARTIFACT, "version": __version__, "config": to_plain(config)}


def dumps_json(payload: Any, config: dict) -> str:
    doc = dict(header(config), result=to_plain(payload))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_json(path, payload: Any, config: dict) -> Path:
    path = Path(path)
    path.write_text(dumps_json(payload, config), encoding="utf-8")
    return path


def read_json(path) -> Tuple[dict, Any]:
    """Return ``(config, result)``; raises ``ValueError`` on foreign files."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("artifact") != ARTIFACT:
        raise ValueError(f"{path} was not written by {ARTIFACT}")
    return doc["config"], doc["result"]


def _cell(x) -> str:
    v = to_plain(x)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return json.dumps(v)
    return str(v)


def dumps_csv(columns: Sequence[str], rows: Sequence[Sequence], config: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# {ARTIFACT} {__version__}\n")
    buf.write("# config: " + json.dumps(to_plain(config), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def write_csv(path, columns: Sequence[str], rows: Sequence[Sequence], config: dict) -> Path:
    path = Path(path)
    path.write_text(dumps_csv(columns, rows, config), encoding="utf-8")
    return path


def read_csv(path) -> Tuple[dict, List[str], List[List[str]]]:
    """Return ``(config, columns, rows)`` with cells left as strings."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(f"# {ARTIFACT}"):
        raise ValueError(f"{path} was not written by {ARTIFACT}")
    config = json.loads(lines[1][len("# config: "):])
    reader = csv.reader(lines[2:])
    columns = next(reader)
    return config, columns, [row for row in reader]


def column(rows: List[List[str]], columns: List[str], name: str, cast=float) -> list:
    i = columns.index(name)
    return [cast(r[i]) for r in rows]
