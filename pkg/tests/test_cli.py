import numpy as np
import pytest
from click.testing import CliRunner

from eggwave.cli import main


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "cohort"
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["simulate", "--out", str(out), "--subjects", "4", "--duration", "60", "--seed", "7"],
    )
    assert result.exit_code == 0, result.output
    return out / "manifest.txt"


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


class TestSimulate:
    def test_writes_manifest_and_recordings(self, dataset):
        assert dataset.is_file()
        recordings = sorted(dataset.parent.glob("recordings/*.csv"))
        assert len(recordings) == 12

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--subjects", "2", "--duration", "30", "--seed", "3"]
        for out in ("a", "b"):
            result = run(*args, "--out", tmp_path / out)
            assert result.exit_code == 0
        for rel in ["manifest.txt"] + [
            p.relative_to(tmp_path / "a").as_posix()
            for p in sorted((tmp_path / "a").rglob("*.csv"))
        ]:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_bad_spec_is_data_error(self, tmp_path):
        result = run("simulate", "--out", tmp_path / "x", "--subjects", "0")
        assert result.exit_code == 1
        assert "Error:" in result.output


class TestCompress:
    def test_cr_one_is_lossless_everywhere(self, dataset):
        result = run("compress", "--data", dataset, "--cr", "1")
        assert result.exit_code == 0, result.output
        rows = result.output.strip().splitlines()[1:]
        assert len(rows) == 4 * 3 * 8
        assert all(float(r.rsplit(",", 1)[1]) < 1e-8 for r in rows)

    def test_writes_csv(self, dataset, tmp_path):
        out = tmp_path / "prd.csv"
        result = run("compress", "--data", dataset, "--cr", "3", "--out", out)
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "subject,state,channel,kept,total_coefficients,prd_percent"
        assert len(lines) == 1 + 96

    def test_missing_manifest_is_data_error(self, tmp_path):
        result = run("compress", "--data", tmp_path / "nope.txt")
        assert result.exit_code == 1
        assert "Error:" in result.output

    def test_pollen_wavelet_accepted(self, dataset):
        result = run(
            "compress", "--data", dataset, "--wavelet", "pollen:1.0,-0.5", "--depth", "6"
        )
        assert result.exit_code == 0, result.output

    def test_bad_wavelet_is_data_error(self, dataset):
        result = run("compress", "--data", dataset, "--wavelet", "daubechies-4")
        assert result.exit_code == 1
        assert "unknown wavelet" in result.output


class TestStats:
    def test_table_has_eight_rows(self, dataset):
        result = run("stats", "--data", dataset, "--pair", "basal:severe", "--cr", "3")
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert lines[0].split()[:2] == ["Channel", "Statistics"]
        body = [l for l in lines if l and l.split()[0].isdigit()]
        assert len(body) == 8
        assert {l.split()[1] for l in body} <= {"Student", "Wilcoxon"}

    def test_csv_and_text_outputs_deterministic(self, dataset, tmp_path):
        outputs = []
        for tag in ("x", "y"):
            csv_path = tmp_path / f"{tag}.csv"
            text_path = tmp_path / f"{tag}.txt"
            result = run(
                "stats", "--data", dataset, "--pair", "basal:mild",
                "--out-csv", csv_path, "--out-text", text_path,
            )
            assert result.exit_code == 0
            outputs.append((csv_path.read_bytes(), text_path.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_bad_pair_is_data_error(self, dataset):
        result = run("stats", "--data", dataset, "--pair", "basal")
        assert result.exit_code == 1
        assert "pair" in result.output


class TestSweep:
    def test_single_cr_gives_one_row_per_pair(self, dataset, tmp_path):
        out = tmp_path / "sweep.csv"
        result = run("sweep", "--data", dataset, "--crs", "3", "--out", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith("cr,state_a,state_b")
        assert len(lines) == 3
        assert lines[1].startswith("3,basal,mild")
        assert lines[2].startswith("3,basal,severe")

    def test_bad_crs_is_data_error(self, dataset):
        result = run("sweep", "--data", dataset, "--crs", "3,x")
        assert result.exit_code == 1


class TestSurfaceAndMatch:
    def test_surface_outputs(self, dataset, tmp_path):
        recording = dataset.parent / "recordings" / "dog00_basal.csv"
        csv_path = tmp_path / "s.csv"
        pgm_path = tmp_path / "s.pgm"
        result = run(
            "surface", "--recording", recording, "--channel", "7",
            "--grid", "8", "--depth", "6",
            "--out-csv", csv_path, "--out-pgm", pgm_path,
        )
        assert result.exit_code == 0, result.output
        assert "minimum PRD" in result.output and "pi)" in result.output
        assert csv_path.read_text().splitlines()[0] == "a,b,prd"
        assert pgm_path.read_text().startswith("P2\n8 8\n255\n")

    def test_match_reports_both_unit_readings(self, dataset, tmp_path):
        out = tmp_path / "minima.csv"
        result = run(
            "match", "--data", dataset, "--state", "basal", "--grid", "8",
            "--depth", "6", "--channels", "7", "--out", out,
        )
        assert result.exit_code == 0, result.output
        assert "rad" in result.output and "pi)" in result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "subject,channel,a,b,prd_percent"
        assert len(lines) == 1 + 4 + 1


class TestUsageErrors:
    def test_unknown_flag_exits_2(self):
        result = run("simulate", "--bogus", "1")
        assert result.exit_code == 2

    def test_unknown_command_exits_2(self):
        result = run("frobnicate")
        assert result.exit_code == 2
