"""Headless CLI: exit codes, output files, determinism."""

import json

import pytest

from conftest import circle_sketch_doc
from meshforge.cli import main


@pytest.fixture()
def sketch_file(tmp_path):
    path = tmp_path / "circle.sketch.json"
    path.write_bytes(circle_sketch_doc())
    return path


def run_cli(sketch_file, out_dir, **extra):
    args = ["--sketch", str(sketch_file), "--prompt", "a red vase",
            "--seed", "7", "--resolution", "24", "--candidates", "3",
            "--out", str(out_dir)]
    for key, value in extra.items():
        args += [f"--{key}", str(value)]
    return main(args)


class TestRuns:
    def test_mock_run_writes_assets(self, sketch_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert run_cli(sketch_file, out) == 0
        assert (out / "mesh.obj").exists()
        assert (out / "material.mtl").exists()
        assert (out / "manifest.json").exists()
        pngs = sorted((out / "candidates").glob("candidate_*.png"))
        assert len(pngs) == 3
        summary = capsys.readouterr().out.strip()
        assert summary.startswith("state=Done")
        assert "total=" in summary

    def test_determinism_across_runs(self, sketch_file, tmp_path):
        hashes = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(sketch_file, out) == 0
            manifest = json.loads((out / "manifest.json").read_text())
            hashes.append(manifest["sha256"])
        assert hashes[0] == hashes[1]

    def test_explicit_selection(self, sketch_file, tmp_path):
        assert run_cli(sketch_file, tmp_path / "out", select="2") == 0

    def test_failed_backend_exit_one(self, sketch_file, tmp_path, capsys):
        code = main(["--sketch", str(sketch_file), "--prompt", "x",
                     "--recon", "http://127.0.0.1:1", "--resolution", "16",
                     "--out", str(tmp_path / "out")])
        assert code == 1
        assert "failed at reconstruct" in capsys.readouterr().err


class TestUsageErrors:
    def test_missing_sketch_flag(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--prompt", "x"])
        assert exc_info.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unreadable_sketch_file(self, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["--sketch", str(tmp_path / "missing.json"), "--prompt", "x"])
        assert exc_info.value.code == 2

    def test_invalid_sketch_document(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_bytes(b"{oops")
        with pytest.raises(SystemExit) as exc_info:
            main(["--sketch", str(bad), "--prompt", "x"])
        assert exc_info.value.code == 2

    def test_select_out_of_range(self, sketch_file, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["--sketch", str(sketch_file), "--prompt", "x",
                  "--candidates", "2", "--select", "5",
                  "--out", str(tmp_path / "out")])
        assert exc_info.value.code == 2

    def test_bad_select_token(self, sketch_file, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["--sketch", str(sketch_file), "--prompt", "x",
                  "--select", "first", "--out", str(tmp_path / "out")])
        assert exc_info.value.code == 2
