import json

import numpy as np
import pytest

from factorcast.cli import main
from factorcast.data import load_matrix, read_mask, read_results


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "data.csv"
    code = main(["synth", "--n-series", "10", "--n-steps", "120", "--rank", "2",
                 "--theta", "0.6,0.2", "--noise-u", "0.001", "--noise-v", "0.05",
                 "--noise-x", "0.01", "--seed", "3", "--out", str(path)])
    assert code == 0
    return path


class TestSynth:
    def test_writes_matrix_and_sidecar(self, data_file):
        matrix = load_matrix(data_file)
        assert matrix.values.shape == (10, 120)
        metadata = json.loads((data_file.parent / "data.csv.meta.json").read_text())
        assert metadata["theta"] == [0.6, 0.2]
        assert metadata["seed"] == 3

    def test_deterministic(self, tmp_path, data_file):
        other = tmp_path / "other.csv"
        main(["synth", "--n-series", "10", "--n-steps", "120", "--rank", "2",
              "--theta", "0.6,0.2", "--noise-u", "0.001", "--noise-v", "0.05",
              "--noise-x", "0.01", "--seed", "3", "--out", str(other)])
        assert other.read_bytes() == data_file.read_bytes()


class TestMask:
    def test_unstructured(self, tmp_path):
        path = tmp_path / "mask.csv"
        code = main(["mask", "--n-series", "6", "--n-steps", "40", "--nnz", "0.5",
                     "--seed", "1", "--out", str(path)])
        assert code == 0
        mask = read_mask(path)
        assert mask.observed.shape == (6, 40)
        assert mask.kind == "unstructured"

    def test_structured(self, tmp_path):
        path = tmp_path / "mask.csv"
        code = main(["mask", "--n-series", "6", "--n-steps", "40", "--arrival", "0.1",
                     "--departure", "0.2", "--seed", "1", "--out", str(path)])
        assert code == 0
        assert read_mask(path).kind == "structured"

    def test_missing_spec_fails(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["mask", "--n-series", "3", "--n-steps", "5",
                  "--out", str(tmp_path / "m.csv")])


class TestRun:
    def test_run_writes_summary_and_records(self, tmp_path, data_file, capsys):
        out = tmp_path / "summary.csv"
        records = tmp_path / "records.csv"
        code = main(["run", "--data", str(data_file), "--method", "zt",
                     "--rank", "2", "--ar-order", "4", "--nnz", "0.7",
                     "--replicates", "2", "--seed", "5",
                     "--out", str(out), "--records", str(records)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "replicate,mae"
        assert len(lines) == 5  # two replicates + mean + std
        rows, metadata = read_results(records)
        assert len(rows) == 120
        assert metadata["method"] == "zt"
        assert "data_fingerprint" in metadata
        stdout = capsys.readouterr().out
        assert "mean" in stdout

    def test_byte_identical_reruns(self, tmp_path, data_file):
        args = ["run", "--data", str(data_file), "--method", "ft", "--rank", "2",
                "--ar-order", "4", "--eps", "1e-4", "--nnz", "0.6", "--replicates", "2",
                "--seed", "9"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        ra, rb = tmp_path / "ra.csv", tmp_path / "rb.csv"
        assert main(args + ["--out", str(a), "--records", str(ra)]) == 0
        assert main(args + ["--out", str(b), "--records", str(rb)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert ra.read_bytes() == rb.read_bytes()
        assert (tmp_path / "ra.csv.meta.json").read_bytes() == \
            (tmp_path / "rb.csv.meta.json").read_bytes()

    def test_fixed_mask_file(self, tmp_path, data_file):
        mask_path = tmp_path / "mask.csv"
        main(["mask", "--n-series", "10", "--n-steps", "120", "--nnz", "0.5",
              "--seed", "2", "--out", str(mask_path)])
        out = tmp_path / "summary.csv"
        code = main(["run", "--data", str(data_file), "--method", "base",
                     "--mask-file", str(mask_path), "--out", str(out)])
        assert code == 0

    def test_conflicting_mask_flags_fail(self, tmp_path, data_file):
        with pytest.raises(SystemExit):
            main(["run", "--data", str(data_file), "--nnz", "0.5",
                  "--arrival", "0.1", "--departure", "0.2"])

    def test_preset_traffic(self, tmp_path, data_file, capsys):
        code = main(["run", "--data", str(data_file), "--method", "base",
                     "--preset", "traffic"])
        assert code == 0

    def test_error_paths_return_nonzero(self, tmp_path, capsys):
        code = main(["run", "--data", str(tmp_path / "missing.csv"), "--method", "ft"])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestSweep:
    def test_sweep_table(self, tmp_path, data_file):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--data", str(data_file), "--axis", "nnz",
                     "--values", "0.5,1.0", "--methods", "base,zt", "--rank", "2",
                     "--ar-order", "3", "--replicates", "2", "--seed", "1",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "axis,value,method,replicates,mean_mae,std_mae"
        assert len(lines) == 5
        assert all(ln.startswith("nnz,") for ln in lines[1:])

    def test_sweep_deterministic(self, tmp_path, data_file):
        args = ["sweep", "--data", str(data_file), "--axis", "d",
                "--values", "1,2", "--methods", "zt", "--ar-order", "3",
                "--nnz", "0.8", "--replicates", "1", "--seed", "4"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestVerify:
    def test_fast_verify_passes(self, capsys):
        assert main(["verify", "--fast"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out
        assert "[FAIL]" not in out
