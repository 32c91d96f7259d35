"""CSV and JSON serialisation of simulation runs and their derived tables.

Floats are written with ``repr`` so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .errors import InvalidParameter
from .front import FrontTrace, boundary_margin, default_level, trace_front
from .model import DimensionlessParams
from .pde import Field1D, Grid1D, InitialCondition, SimulationResult

RUN_META = "run.json"
SNAPSHOT_HEADER = ("x", "h", "d", "m", "c")


def fmt(value) -> str:
    """Round-trip text for numbers; other values pass through ``str``."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return str(value)


def write_table(header: Sequence[str], rows: Iterable[Sequence], target=None) -> str | None:
    """Write a CSV table to ``target`` (path or text stream); returns the text when ``target`` is None."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)
    return None


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_json(data, target=None) -> str | None:
    """Strict JSON; non-finite floats become ``null``."""
    text = json.dumps(_json_safe(data), indent=2, allow_nan=False) + "\n"
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)
    return None


def snapshot_name(index: int) -> str:
    return f"snapshot_{index:04d}.csv"


def write_snapshot(path, field: Field1D) -> None:
    values = np.vstack([field.grid.x, field.stack()]).T.tolist()
    lines = [",".join(SNAPSHOT_HEADER)]
    lines.extend(",".join(map(repr, row)) for row in values)
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path, grid: Grid1D) -> Field1D:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.n, 5):
        raise InvalidParameter(f"{path}: expected {grid.n} rows of 5 columns, got {data.shape}")
    return Field1D.from_stack(grid, data[:, 1:].T)


def write_run(run_dir, result: SimulationResult, params: DimensionlessParams, grid: Grid1D,
              ic: InitialCondition | None, t_end: float, *, extra: dict | None = None) -> Path:
    """Write every snapshot plus ``run.json`` into ``run_dir`` (created if needed)."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    index = []
    for k, (t, field) in enumerate(result):
        name = snapshot_name(k)
        write_snapshot(run_dir / name, field)
        index.append({"file": name, "t": t})
    meta = {
        "version": __version__,
        "params": params.to_dict(),
        "grid": {"L": grid.L, "n": grid.n},
        "ic": ic.to_dict() if ic is not None else None,
        "t_end": t_end,
        "snapshots": len(result),
        "cfl_safety": result.options.get("cfl_safety"),
        "dt": {"n_steps": result.n_steps, "min": result.dt_min, "max": result.dt_max},
        "min_value": result.min_value,
        "max_saturation": result.max_saturation,
        "snapshot_index": index,
    }
    if extra:
        meta.update(extra)
    write_json(meta, run_dir / RUN_META)
    return run_dir


def read_run(run_dir) -> tuple[dict, DimensionlessParams, list[tuple[float, Field1D]]]:
    """Metadata, parameters and ``(t, Field1D)`` snapshots of a run directory."""
    run_dir = Path(run_dir)
    meta_path = run_dir / RUN_META
    if not meta_path.is_file():
        raise InvalidParameter(f"{run_dir} has no {RUN_META}")
    meta = json.loads(meta_path.read_text())
    params = DimensionlessParams.from_dict(meta["params"])
    grid = Grid1D(float(meta["grid"]["L"]), int(meta["grid"]["n"]))
    snapshots = [(float(e["t"]), read_snapshot(run_dir / e["file"], grid)) for e in meta["snapshot_index"]]
    return meta, params, snapshots


def write_front(run_dir, trace: FrontTrace) -> None:
    """``front.csv`` with ``t,x_front`` (``nan`` where there is no front) and ``speed.json``."""
    run_dir = Path(run_dir)
    write_table(("t", "x_front"), zip(trace.times, trace.positions), run_dir / "front.csv")
    summary = {
        "fitted_speed": trace.fitted_speed,
        "r_squared": trace.r_squared,
        "level": trace.level,
        "fit_window": list(trace.fit_window),
    }
    write_json(summary, run_dir / "speed.json")


def speed_from_run(run_dir, level: float | None = None, margin: float | None = None) -> FrontTrace:
    """Track and fit the front of a stored run; writes ``front.csv`` and ``speed.json`` beside it."""
    _, params, snapshots = read_run(run_dir)
    lvl = default_level(params) if level is None else level
    mg = boundary_margin(params) if margin is None else margin
    trace = trace_front(snapshots, lvl, margin=mg)
    write_front(run_dir, trace)
    return trace
