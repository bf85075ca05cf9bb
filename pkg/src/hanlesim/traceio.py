"""Reading and writing traces, sweep tables and fit results.

CSV conventions, chosen so reruns are byte-identical and values round-trip
exactly: UTF-8, LF line endings, metadata as leading ``# key=value`` lines
with the keys sorted, then a header row, then data rows.  Floats are written
with ``repr``, the shortest string that parses back to the same double.
"""

from __future__ import annotations

import ast
import json
import math

import numpy as np

from .dynamics import TransientTrace

__all__ = [
    "render_trace",
    "save_trace",
    "load_trace",
    "render_table",
    "save_table",
    "render_sweep",
    "save_sweep",
    "render_fit",
    "save_fit",
]

TRACE_COLUMNS = ("time", "w", "b")


def _format_value(value) -> str:
    """Value -> string that ``ast.literal_eval`` (or float()) restores exactly."""
    if isinstance(value, (bool, np.bool_)):
        return repr(bool(value))
    if isinstance(value, (int, np.integer)):
        return repr(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    if isinstance(value, (tuple, list)):
        return "(" + ", ".join(_format_value(v) for v in value) + ("," if len(value) == 1 else "") + ")"
    return repr(value) if isinstance(value, str) else str(value)


def _meta_lines(meta: dict) -> list:
    return [f"# {key}={_format_value(meta[key])}" for key in sorted(meta)]


def _format_cell(value) -> str:
    # unlike metadata values, table cells write strings bare
    return value if isinstance(value, str) else _format_value(value)


def render_table(columns, rows, meta: dict | None = None) -> str:
    """Generic numeric CSV: sorted ``#`` metadata, header, repr-formatted rows."""
    lines = _meta_lines(meta or {})
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"


def save_table(columns, rows, path, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_table(columns, rows, meta))


def render_trace(trace: TransientTrace) -> str:
    rows = zip(trace.times.tolist(), trace.w.tolist(), trace.b.tolist())
    return render_table(TRACE_COLUMNS, rows, trace.meta)


def save_trace(trace: TransientTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_trace(trace))


def _parse_meta_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def load_trace(path) -> TransientTrace:
    """Read a trace CSV back into a :class:`TransientTrace`.

    Accepts the files written by :func:`save_trace` and minimal external
    files: a ``time`` column, a signal column named ``w`` or ``signal`` and
    an optional field column ``b``.  Malformed input raises ``ValueError``
    naming the offending 1-based line number.
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()

    meta = {}
    header_index = None
    for index, line in enumerate(lines):
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = _parse_meta_value(value.strip())
            continue
        if line.strip():
            header_index = index
            break
    if header_index is None:
        raise ValueError(f"{path}: no header row found")

    header = [name.strip().lower() for name in lines[header_index].split(",")]
    if "time" not in header:
        raise ValueError(f"{path}:{header_index + 1}: missing 'time' column")
    signal_name = "w" if "w" in header else ("signal" if "signal" in header else None)
    if signal_name is None:
        raise ValueError(f"{path}:{header_index + 1}: missing signal column ('w' or 'signal')")
    time_col = header.index("time")
    signal_col = header.index(signal_name)
    b_col = header.index("b") if "b" in header else None

    times, w, b = [], [], []
    for index in range(header_index + 1, len(lines)):
        line = lines[index].strip()
        lineno = index + 1
        if not line or line.startswith("#"):
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(
                f"{path}:{lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        try:
            row = [float(cell) for cell in cells]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric value") from None
        if any(not math.isfinite(value) for value in row):
            raise ValueError(f"{path}:{lineno}: non-finite value")
        if times and row[time_col] <= times[-1]:
            raise ValueError(f"{path}:{lineno}: time values must be strictly increasing")
        times.append(row[time_col])
        w.append(row[signal_col])
        b.append(row[b_col] if b_col is not None else 0.0)

    if not times:
        raise ValueError(f"{path}: no data rows")
    return TransientTrace(
        times=np.array(times), w=np.array(w), b=np.array(b), meta=meta,
    )


def render_sweep(rows) -> str:
    """CSV for intensity-sweep mode tables (see ``spectral.intensity_sweep``)."""
    from .spectral import SWEEP_COLUMNS

    table = [[row[name] for name in SWEEP_COLUMNS] for row in rows]
    return render_table(SWEEP_COLUMNS, table)


def save_sweep(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_sweep(rows))


def render_fit(result) -> str:
    """Fit result as a deterministic JSON document (key order fixed)."""
    payload = {
        "model": result.kind,
        "params": {k: result.params[k] for k in sorted(result.params)},
        "uncertainties": {k: result.uncertainties[k] for k in sorted(result.uncertainties)},
        "rms": result.rms,
        "converged": result.converged,
        "iterations": result.iterations,
        "seeds": {k: result.seeds[k] for k in sorted(result.seeds)},
        "degenerate": result.degenerate,
    }
    return json.dumps(payload, indent=2) + "\n"


def save_fit(result, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_fit(result))
