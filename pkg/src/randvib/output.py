"""CSV and key=value writers.

Floats are written with 17 significant digits so every value round-trips;
files use LF line endings and a fixed column order.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import OutputError

__all__ = [
    "format_value",
    "write_csv",
    "write_keyvalue",
    "path_rows",
    "emit_outputs",
    "write_failure",
    "write_convergence",
    "write_ensemble",
    "read_keyvalue",
]


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _write_text(path: Path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}", path=path) from exc
    return path


def write_csv(path, header, columns):
    """Write equal-length ``columns`` under ``header``."""
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(format_value(v) for v in row))
    return _write_text(Path(path), "\n".join(lines) + "\n")


def write_keyvalue(path, mapping):
    return _write_text(Path(path), "".join(f"{k}={format_value(v)}\n" for k, v in mapping.items()))


def read_keyvalue(path) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            out[key.strip()] = value.strip()
    return out


def path_rows(path):
    """(t, L, is_post_jump) with a left-limit and a post-jump row at each jump.

    The rows line up one-to-one with the trajectory records of a run on
    ``path``.
    """
    b, c = path.config.b, path.config.c
    L = b * path.brownian_values() + c * path.jump_values()
    t_out, L_out, flag = [], [], []
    jumps = dict(zip(path.jump_nodes.tolist(), path.jumps))
    for node, (t, value) in enumerate(zip(path.grid_times.tolist(), L.tolist())):
        ev = jumps.get(node)
        if ev is not None:
            t_out.append(t)
            L_out.append(value - c * ev.raw_size)
            flag.append(False)
        t_out.append(t)
        L_out.append(value)
        flag.append(ev is not None)
    return t_out, L_out, flag


def emit_outputs(result, output_dir, emit):
    """Write the requested artifacts of one run; returns the written paths."""
    if not emit:
        raise OutputError("nothing to emit")
    out = Path(output_dir)
    written = []
    traj, led = result.trajectory, result.ledger
    if "path" in emit:
        t, L, _ = path_rows(result.path)
        written.append(write_csv(out / "path.csv", ["t", "L"], [t, L]))
    if "trajectory" in emit:
        written.append(
            write_csv(out / "trajectory.csv", ["t", "x", "v", "is_post_jump"],
                      [traj.t, traj.x, traj.v, traj.post_jump])
        )
    if "ledger" in emit:
        written.append(
            write_csv(out / "ledger.csv", ["t", "x", "v", "delta_E", "work", "discrepancy"],
                      [led.times, traj.x, traj.v, led.delta_E, led.work, led.discrepancy])
        )
    if "summary" in emit:
        written.append(write_keyvalue(out / "summary.txt", result.summary()))
    return written


def write_failure(exc, output_dir):
    """Persist the partial trajectory and a key=value failure record."""
    out = Path(output_dir)
    state = exc.state
    record = {
        "status": "diverged",
        "error": type(exc).__name__,
        "step": exc.step if exc.step is not None else -1,
        "t": state.t if state is not None else math.nan,
        "x": state.x if state is not None else math.nan,
        "v": state.v if state is not None else math.nan,
        "message": str(exc).replace("\n", " "),
    }
    written = [write_keyvalue(out / "failure.txt", record)]
    traj = exc.trajectory
    if traj is not None:
        written.append(
            write_csv(out / "trajectory.csv", ["t", "x", "v", "is_post_jump"],
                      [traj.t, traj.x, traj.v, traj.post_jump])
        )
    return written


def write_convergence(rows, output_dir):
    header = ["interpretation", "dt", "max_abs_discrepancy", "max_rel_discrepancy",
              "n_jumps", "ito_jump_deficit", "ito_diffusion_deficit"]
    cols = [[getattr(r, h) for r in rows] for h in header]
    return write_csv(Path(output_dir) / "convergence.csv", header, cols)


def write_ensemble(summary, output_dir):
    out = Path(output_dir)
    recs = summary.records
    paths = [write_csv(
        out / "ensemble.csv",
        ["seed", "interpretation", "status", "max_abs_discrepancy", "max_rel_discrepancy"],
        [[r[0] for r in recs], [r[1] for r in recs], [r[2] for r in recs],
         [r[3] for r in recs], [r[4] for r in recs]],
    )]
    keys = ["n_ok", "n_diverged", "rel_mean", "rel_median", "rel_p95", "abs_mean", "abs_median", "abs_p95"]
    names = list(summary.aggregates)
    cols = [names] + [[summary.aggregates[n][k] for n in names] for k in keys]
    paths.append(write_csv(out / "ensemble_summary.csv", ["interpretation"] + keys, cols))
    return paths
