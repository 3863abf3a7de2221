"""Deterministic file writers: CSV, JSON, and binary P6 heatmaps.

CSV floats are written with 17 significant digits (round-trip exact); JSON
uses Python's shortest round-trip float repr with sorted keys. Rerunning any
command with the same config and seed reproduces every output byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(x: float) -> str:
    """17-significant-digit decimal form; parses back to the identical float."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def write_json(obj, path) -> None:
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n",
        encoding="utf-8",
    )


def write_grid_csv(grid, path) -> None:
    lines = ["idx,coord1,coord2,weight"]
    for i in range(grid.n_cells):
        lines.append(
            f"{i},{fmt(grid.coord1[i])},{fmt(grid.coord2[i])},{fmt(grid.weight[i])}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_distribution_csv(dist, path, values=None) -> None:
    """Schema: idx,coord1,coord2,weight,value. ``values`` overrides dist.values."""
    grid = dist.grid
    vals = dist.values if values is None else values
    lines = ["idx,coord1,coord2,weight,value"]
    for i in range(grid.n_cells):
        lines.append(
            f"{i},{fmt(grid.coord1[i])},{fmt(grid.coord2[i])},"
            f"{fmt(grid.weight[i])},{fmt(vals[i])}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_support_csv(sup, path) -> None:
    lines = ["idx"] + [str(int(i)) for i in sup.indices]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_trajectory_csv(traj, path) -> None:
    c1, c2 = traj.coordinate_columns()
    lines = ["t,coord1,coord2,phase"]
    for k in range(traj.n_samples):
        lines.append(
            f"{fmt(traj.t[k])},{fmt(c1[k])},{fmt(c2[k])},{fmt(traj.phase[k])}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_ppm_heatmap(values: np.ndarray, resolution: tuple[int, int], path) -> None:
    """Binary P6 grayscale heatmap: level = round(255 * value / max)."""
    n1, n2 = resolution
    img = np.asarray(values, dtype=float).reshape(n1, n2)
    vmax = img.max()
    if vmax > 0:
        levels = np.rint(255.0 * img / vmax).astype(np.uint8)
    else:
        levels = np.zeros((n1, n2), dtype=np.uint8)
    rgb = np.repeat(levels[:, :, None], 3, axis=2)
    header = f"P6\n{n2} {n1}\n255\n".encode("ascii")
    Path(path).write_bytes(header + rgb.tobytes())


def write_records_jsonl(records, path) -> None:
    lines = [
        json.dumps(r.to_json_dict(), sort_keys=True, allow_nan=False) for r in records
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
