import json
import re

import pandas as pd
import pytest

from app.models import ExperimentConfig, SweepResult, SweepRow
from app.services.output_service import CSV_COLUMNS, emit_outputs, sweep_frame


def make_result(kind="snr-sweep"):
    config = ExperimentConfig(trials=4, schemes=["perfect_csi", "proposed"])
    rows = [
        SweepRow(
            axis=axis,
            scheme=scheme,
            eff_snr_db_mean=-axis / 10 - offset,
            eff_snr_db_stderr=0.1,
            mse_mean=None if scheme == "perfect_csi" else 1e-13,
            trials=4,
            budget=0 if scheme == "perfect_csi" else 22,
            ref_snr_db_mean=-axis / 10 - 10,
        )
        for axis in config.noise_ratios_db
        for scheme, offset in (("perfect_csi", 0.0), ("proposed", 0.4))
    ]
    return SweepResult(kind=kind, axis_name="noise_ratio_db", rows=rows, config=config, metadata={"n_subsurfaces": 10})


class TestCsv:
    def test_header_and_rows(self, tmp_path):
        paths = emit_outputs(make_result(), out_dir=str(tmp_path), svg=False)
        lines = open(paths["csv"], encoding="utf-8").read().splitlines()
        assert lines[0] == "axis,scheme,eff_snr_db_mean,eff_snr_db_stderr,mse_mean,trials,budget"
        assert len(lines) == 11

    def test_byte_identical_rerun(self, tmp_path):
        first = emit_outputs(make_result(), out_dir=str(tmp_path / "a"), svg=False)
        second = emit_outputs(make_result(), out_dir=str(tmp_path / "b"), svg=False)
        with open(first["csv"], "rb") as a, open(second["csv"], "rb") as b:
            assert a.read() == b.read()

    def test_frame_columns(self):
        frame = sweep_frame(make_result())
        assert list(frame.columns) == CSV_COLUMNS
        assert frame["mse_mean"].isna().sum() == 5

    def test_readable_with_pandas(self, tmp_path):
        paths = emit_outputs(make_result(), out_dir=str(tmp_path), svg=False)
        frame = pd.read_csv(paths["csv"])
        assert set(frame["scheme"]) == {"perfect_csi", "proposed"}
        assert frame["budget"].tolist()[:2] == [0, 22]


class TestSvg:
    @pytest.mark.parametrize("kind", ["snr-sweep", "n-sweep"])
    def test_one_path_group_per_scheme(self, tmp_path, kind):
        paths = emit_outputs(make_result(kind), out_dir=str(tmp_path))
        svg = open(paths["svg"], encoding="utf-8").read()
        assert svg.count('id="series-') == 2
        assert 'id="series-perfect_csi"' in svg
        assert re.search(r'<g id="series-proposed">\s*<path d=', svg)
        assert "<polyline" not in svg

    def test_axis_labels(self, tmp_path):
        svg = open(emit_outputs(make_result(), out_dir=str(tmp_path))["svg"], encoding="utf-8").read()
        assert "Reference SNR (dB)" in svg
        assert "Effective SNR (dB)" in svg

    def test_disabled(self, tmp_path):
        paths = emit_outputs(make_result(), out_dir=str(tmp_path), svg=False)
        assert "svg" not in paths
        assert not (tmp_path / "snr-sweep.svg").exists()


class TestMetadata:
    def test_sidecar(self, tmp_path):
        paths = emit_outputs(make_result(), out_dir=str(tmp_path), stem="fig")
        metadata = json.load(open(paths["metadata"], encoding="utf-8"))
        assert paths["metadata"].endswith("fig.json")
        assert metadata["seed"] == 2021
        assert metadata["config"]["trials"] == 4
        assert metadata["result"] == {"n_subsurfaces": 10}
        assert {"numpy", "scipy", "pandas", "matplotlib", "python"} <= set(metadata["versions"])


class TestErrors:
    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError) as info:
            emit_outputs(make_result(), out_dir=str(blocker / "sub"), svg=False)
        assert str(blocker) in str(info.value)
