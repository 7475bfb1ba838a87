import numpy as np
import pandas as pd
import pytest
from PIL import Image

from app.export.csv_export import (
    STUDY_COLUMNS,
    SWEEP_COLUMNS,
    TRAJECTORY_COLUMNS,
    format_summary_value,
    sweep_frame,
    write_comparison,
    write_study,
    write_summary,
    write_sweep,
    write_trajectory,
)
from app.export.heatmap import heatmap_pixels, render_heatmap, render_sweep
from sirsv.analysis.metrics import compare
from sirsv.analysis.study import run_study
from sirsv.analysis.sweep import STATUS_OK, STATUS_SKIPPED, SweepCell, SweepResult, parse_axis
from sirsv.solvers.behavior_solver import run_ne


@pytest.fixture
def small_sweep(params) -> SweepResult:
    axis1, axis2 = parse_axis("beta:0.5:0.9:2"), parse_axis("eta:0.1:0.5:3")
    cells = []
    for i, b in enumerate(axis1.values()):
        row = []
        for j, e in enumerate(axis2.values()):
            if i == 1 and j == 2:
                row.append(SweepCell(i, j, b, e, STATUS_SKIPPED, "eta > beta"))
            else:
                row.append(SweepCell(i, j, b, e, STATUS_OK, ne_it=1.0, ne_vt=0.5, ne_asp=-1.25,
                                     so_it=0.5, so_vt=0.25, so_asp=-0.625, sed=float(i + j)))
        cells.append(row)
    return SweepResult(axis1, axis2, axis1.values(), axis2.values(), cells, params)


def test_trajectory_csv(params, init, tiny_grid, tmp_path):
    run = run_ne(params, init, tiny_grid)
    path = write_trajectory(run.trajectory, tmp_path / "out" / "ne_trajectory.csv")
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == ",".join(TRAJECTORY_COLUMNS)
    assert lines[1] == "0.0,0.98,0.01,0.01,0.0,0.1"
    assert len(lines) == tiny_grid.n + 2
    frame = pd.read_csv(path, float_precision="round_trip")
    np.testing.assert_array_equal(frame["S"].to_numpy(), run.trajectory.s)
    assert b"\r\n" not in path.read_bytes()


def test_summary_format(tmp_path):
    path = write_summary({
        "model": "behavior", "r0": 0.833 / 0.333, "converged": False,
        "equilibrium_time": None, "it": 0.1, "iterations": 12,
    }, tmp_path / "summary.txt")
    assert path.read_text(encoding="utf-8") == (
        "model = behavior\nr0 = 2.50\nconverged = false\n"
        "equilibrium_time = none\nit = 0.1\niterations = 12\n"
    )


def test_summary_values_roundtrip():
    value = 1.0 / 3.0
    assert float(format_summary_value("it", value)) == value
    assert format_summary_value("converged", True) == "true"


def test_comparison_csv(params, init, tiny_grid, tmp_path):
    comparison = compare(params, init, tiny_grid)
    frame = pd.read_csv(write_comparison(comparison, tmp_path / "comparison.csv"), float_precision="round_trip")
    assert list(frame["quantity"]) == ["it", "vt", "asp", "sed"]
    assert frame.loc[2, "ne"] == comparison.ne.asp
    assert frame.loc[3, "so"] == comparison.sed
    assert np.isnan(frame.loc[3, "ne"])


def test_sweep_csv(small_sweep, tmp_path):
    frame = pd.read_csv(write_sweep(small_sweep, tmp_path / "sweep.csv"))
    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 6
    assert list(frame["status"]).count(STATUS_SKIPPED) == 1
    skipped = frame[frame["status"] == STATUS_SKIPPED].iloc[0]
    assert skipped["axis1"] == 0.9 and skipped["axis2"] == 0.5
    assert np.isnan(skipped["sed"])
    assert list(frame["sed"].dropna()) == [0.0, 1.0, 2.0, 1.0, 2.0]


def test_sweep_frame_is_deterministic(small_sweep):
    assert sweep_frame(small_sweep).equals(sweep_frame(small_sweep))


class TestHeatmap:
    def test_pixel_colors(self):
        pixels = heatmap_pixels(np.array([[0.0, 1.0], [np.nan, 0.5]]))
        assert pixels.shape == (2, 2, 3)
        # axis1 grows upward: the last matrix row is the first image row
        assert tuple(pixels[0, 0]) == (128, 128, 128)
        assert tuple(pixels[0, 1]) == (128, 0, 128)
        assert tuple(pixels[1, 0]) == (0, 0, 255)
        assert tuple(pixels[1, 1]) == (255, 0, 0)

    def test_flat_and_empty_fields(self):
        assert np.all(heatmap_pixels(np.full((2, 2), 3.0)) == [0, 0, 255])
        assert np.all(heatmap_pixels(np.full((2, 2), np.nan)) == 128)

    def test_render_writes_image_and_sidecar(self, tmp_path):
        path = render_heatmap(np.array([[0.0, 2.0, 4.0]]), tmp_path / "f.ppm", {"field": "sed"})
        with Image.open(path) as image:
            assert image.size == (3, 1)
            assert image.mode == "RGB"
        sidecar = path.with_suffix(".txt").read_text(encoding="utf-8")
        assert "field = sed" in sidecar and "min = 0.0" in sidecar and "max = 4.0" in sidecar

    def test_render_sweep(self, small_sweep, tmp_path):
        paths = render_sweep(small_sweep, tmp_path)
        assert [p.name for p in paths] == [
            "sweep_ne_it.ppm", "sweep_ne_vt.ppm", "sweep_ne_asp.ppm",
            "sweep_so_it.ppm", "sweep_so_vt.ppm", "sweep_so_asp.ppm", "sweep_sed.ppm",
        ]
        with Image.open(paths[-1]) as image:
            assert image.size == (3, 2)
        assert "beta from 0.9 (top)" in paths[-1].with_suffix(".txt").read_text(encoding="utf-8")


def test_sidecar_values_are_plain_numbers(small_sweep, tmp_path):
    render_sweep(small_sweep, tmp_path)
    sidecar = (tmp_path / "sweep_sed.txt").read_text(encoding="utf-8").splitlines()
    assert "np." not in "\n".join(sidecar)
    assert sidecar[1] == "rows = beta from 0.9 (top) to 0.5 (bottom)"
    assert sidecar[2] == "columns = eta from 0.1 (left) to 0.5 (right)"
    assert sidecar[-2:] == ["min = 0.0", "max = 2.0"]


def test_study_files(params, init, tiny_grid, tmp_path):
    result = run_study(params, init, tiny_grid, None, "eta", (0.4, 0.9))
    paths = write_study(result, tmp_path)
    assert [p.name for p in paths] == [
        "study.csv", "study_eta_0_ne.csv", "study_eta_0_so.csv", "study_eta_1_ne.csv", "study_eta_1_so.csv",
    ]
    frame = pd.read_csv(tmp_path / "study.csv", float_precision="round_trip")
    assert list(frame.columns) == ["eta", *STUDY_COLUMNS[1:]]
    assert frame["eta"].tolist() == [0.4, 0.9]
    assert frame["sed"].tolist() == result.metric("sed")
    so = pd.read_csv(tmp_path / "study_eta_1_so.csv", float_precision="round_trip")
    np.testing.assert_array_equal(so["rate"].to_numpy(), result.points[1].comparison.so_run.control)
