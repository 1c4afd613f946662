"""End-to-end checks: all five figure kinds from one completed sweep.

The sweep fixture runs the solver CLI with its default model and epsilon
schedule (reduced phase grid for speed) and plotkit consumes only the
files it left behind.
"""

import numpy as np

from plotkit import FigureSpec, render

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

ALL_KINDS = ("rate", "profile", "heatmap", "decay", "sandwich")


def test_all_five_kinds_render_from_the_sweep(sweep_dir, tmp_path):
    for kind in ALL_KINDS:
        out = tmp_path / f"{kind}.png"
        report = render(FigureSpec((str(sweep_dir),), kind, str(out)))
        data = out.read_bytes()
        assert data[:8] == PNG_MAGIC, kind
        assert len(data) > 1000, kind
        assert report["output"] == str(out)


def test_rate_figure_fits_all_members(sweep_dir, tmp_path):
    report = render(FigureSpec((str(sweep_dir),), "rate",
                               str(tmp_path / "rate.png")))
    assert report["n_pairs"] == 4
    assert np.isfinite(report["slope"])


def test_synthetic_slope_one_csv_is_annotated_1_00(tmp_path):
    csv = tmp_path / "pairs.csv"
    rows = ["eps,statistic"] + [f"{e!r},{7.0 * e!r}"
                                for e in (0.1, 0.05, 0.025, 0.0125)]
    csv.write_text("\n".join(rows) + "\n")
    report = render(FigureSpec((str(csv),), "rate", str(tmp_path / "r.png")))
    assert abs(report["slope"] - 1.0) <= 0.01
    assert report["annotation"] == "1.00"


def test_rendering_the_sweep_twice_is_byte_identical(sweep_dir, tmp_path):
    pairs = []
    for tag in ("first", "second"):
        out = tmp_path / f"decay_{tag}.png"
        render(FigureSpec((str(sweep_dir),), "decay", str(out)))
        pairs.append(out.read_bytes())
    assert pairs[0] == pairs[1]


def test_sweep_files_are_untouched_by_rendering(sweep_dir, tmp_path):
    names_before = sorted(p.relative_to(sweep_dir).as_posix()
                          for p in sweep_dir.rglob("*") if p.is_file())
    stamps_before = [(p, p.stat().st_mtime_ns) for p in sorted(sweep_dir.rglob("*"))]
    for kind in ALL_KINDS:
        render(FigureSpec((str(sweep_dir),), kind, str(tmp_path / f"{kind}.png")))
    names_after = sorted(p.relative_to(sweep_dir).as_posix()
                         for p in sweep_dir.rglob("*") if p.is_file())
    assert names_before == names_after
    assert all(p.stat().st_mtime_ns == stamp for p, stamp in stamps_before)
