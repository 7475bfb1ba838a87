"""
Heatmap rendering for sweep fields

Portable pixmaps (one pixel per cell) with a linear blue-to-red scale;
cells without values are gray. Each image gets a sidecar text file with
the field name, axes and value range.
"""

from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from PIL import Image

from sirsv.analysis.sweep import METRIC_FIELDS, SweepResult

LOW_COLOR = np.array([0, 0, 255], dtype=float)
HIGH_COLOR = np.array([255, 0, 0], dtype=float)
MISSING_COLOR = np.array([128, 128, 128], dtype=np.uint8)


def heatmap_pixels(matrix: np.ndarray) -> np.ndarray:
    """
    RGB array of shape (steps1, steps2, 3).

    Row 0 of the image is the highest axis1 value, so axis1 grows upward
    and axis2 to the right.
    """
    matrix = np.asarray(matrix, dtype=float)
    present = np.isfinite(matrix)
    pixels = np.empty(matrix.shape + (3,), dtype=np.uint8)
    pixels[:] = MISSING_COLOR
    if present.any():
        low = matrix[present].min()
        high = matrix[present].max()
        span = high - low
        weight = np.zeros_like(matrix) if span == 0 else (matrix - low) / span
        weight = np.where(present, weight, 0.0)[..., None]
        colors = np.rint(LOW_COLOR + weight * (HIGH_COLOR - LOW_COLOR)).astype(np.uint8)
        pixels[present] = colors[present]
    return pixels[::-1]


def render_heatmap(matrix: np.ndarray, path: Union[str, Path], annotations: Dict[str, str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(heatmap_pixels(matrix))).save(path, format="PPM")

    finite = np.asarray(matrix, dtype=float)
    finite = finite[np.isfinite(finite)]
    lines = [f"{key} = {value}" for key, value in annotations.items()]
    if finite.size:
        lines += [f"min = {float(finite.min())!r}", f"max = {float(finite.max())!r}"]
    else:
        lines += ["min = none", "max = none"]
    path.with_suffix(".txt").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def render_sweep(result: SweepResult, out_dir: Union[str, Path], prefix: str = "sweep") -> List[Path]:
    """One heatmap per metric field."""
    out_dir = Path(out_dir)
    written = []
    for name in METRIC_FIELDS:
        top, bottom = float(result.values1[-1]), float(result.values1[0])
        left, right = float(result.values2[0]), float(result.values2[-1])
        annotations = {
            "field": name,
            "rows": f"{result.axis1.parameter} from {top!r} (top) to {bottom!r} (bottom)",
            "columns": f"{result.axis2.parameter} from {left!r} (left) to {right!r} (right)",
            "colors": "blue = min, red = max, gray = no value",
        }
        written.append(render_heatmap(result.metric(name), out_dir / f"{prefix}_{name}.ppm", annotations))
    return written
