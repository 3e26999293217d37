import json

import numpy as np
import pytest

from ca_evolve import ca, render
from ca_evolve.cli import main

GOLDEN_WEDGE_PBM = (
    b"P4\n11 6\n"
    b"\x04\x00\x0a\x00\x15\x00\x2a\x80\x55\x40\xaa\xa0"
)


class TestSimulate:
    def test_rule_250_centered_wedge(self, capsys):
        code = main(["simulate", "--rule", "250", "--n", "11", "--steps", "2",
                     "--ic", "single-one"])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out == ["00000100000", "00001010000", "00010101000"]

    def test_null_rule_stays_zero(self, capsys):
        code = main(["simulate", "--rule", "0", "--n", "5", "--steps", "3",
                     "--ic", "all-zeros"])
        assert code == 0
        assert capsys.readouterr().out.splitlines() == ["00000"] * 4

    def test_saturated_large_radius_rule_keeps_all_ones(self, capsys):
        rule = "r3:" + "f" * 32
        code = main(["simulate", "--rule", rule, "--n", "9", "--steps", "4",
                     "--ic", "all-ones"])
        assert code == 0
        assert capsys.readouterr().out.splitlines() == ["111111111"] * 5

    def test_malformed_rule_exits_2(self, capsys):
        assert main(["simulate", "--rule", "zzz", "--n", "9", "--steps", "1"]) == 2
        assert main(["simulate", "--rule", "r1:zz", "--n", "9", "--steps", "1"]) == 2
        assert main(["simulate", "--rule", "999", "--n", "9", "--steps", "1"]) == 2
        assert "error" in capsys.readouterr().err

    def test_explicit_hex_ic(self, capsys):
        code = main(["simulate", "--rule", "204", "--n", "8", "--steps", "1",
                     "--ic", "hex:a5"])
        assert code == 0
        # rule 204 is the identity map, so both rows equal the IC
        assert capsys.readouterr().out.splitlines() == ["10100101"] * 2

    def test_density_ic_has_requested_count(self, capsys):
        code = main(["simulate", "--rule", "204", "--n", "20", "--steps", "0",
                     "--ic", "density:0.25", "--seed", "5"])
        assert code == 0
        row = capsys.readouterr().out.strip()
        assert row.count("1") == 5

    def test_single_one_at_override(self, capsys):
        code = main(["simulate", "--rule", "204", "--n", "5", "--steps", "0",
                     "--ic", "single-one", "--at", "0"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "10000"

    def test_bad_ic_spec_exits_2(self, capsys):
        assert main(["simulate", "--rule", "250", "--n", "9", "--steps", "1",
                     "--ic", "spiral"]) == 2


class TestRender:
    def test_golden_pbm(self, tmp_path):
        out = tmp_path / "wedge.pbm"
        code = main(["render", "--rule", "250", "--n", "11", "--steps", "5",
                     "--ic", "single-one", "--out", str(out)])
        assert code == 0
        assert out.read_bytes() == GOLDEN_WEDGE_PBM

    def test_zero_steps_single_row_image(self, tmp_path):
        out = tmp_path / "row.pbm"
        code = main(["render", "--rule", "250", "--n", "6", "--steps", "0",
                     "--ic", "all-zeros", "--out", str(out)])
        assert code == 0
        parsed = render.parse_pbm(out.read_bytes())
        assert parsed.shape == (1, 6)
        assert not parsed.any()

    def test_all_zero_history_renders_all_white(self, tmp_path):
        out = tmp_path / "blank.pbm"
        main(["render", "--rule", "0", "--n", "8", "--steps", "3",
              "--ic", "all-zeros", "--out", str(out)])
        assert not render.parse_pbm(out.read_bytes()).any()

    def test_png_output(self, tmp_path):
        from PIL import Image

        out = tmp_path / "wedge.png"
        code = main(["render", "--rule", "250", "--n", "11", "--steps", "5",
                     "--ic", "single-one", "--out", str(out), "--scale", "3"])
        assert code == 0
        with Image.open(out) as img:
            assert img.size == (33, 18)
            pixels = np.asarray(img)
        expected = ca.evolve(ca.single_one(11), ca.RuleTable.from_number(250, 1), 5).rows
        assert np.array_equal(pixels[::3, ::3] == 0, expected.astype(bool))

    def test_simulate_text_and_pbm_encode_same_history(self, tmp_path, capsys):
        image = tmp_path / "dump.pbm"
        code = main(["simulate", "--rule", "110", "--n", "31", "--steps", "12",
                     "--ic", "single-one", "--render", str(image)])
        assert code == 0
        text_rows = capsys.readouterr().out.splitlines()
        pixel_rows = render.parse_pbm(image.read_bytes())
        assert ["".join(map(str, row)) for row in pixel_rows] == text_rows

    def test_unwritable_path_exits_1(self, tmp_path):
        code = main(["render", "--rule", "250", "--n", "9", "--steps", "2",
                     "--ic", "single-one", "--out", str(tmp_path / "no" / "dir.pbm")])
        assert code == 1

    def test_scale_expands_pixels(self):
        rows = np.array([[1, 0]], np.uint8)
        pixels = render.history_pixels(rows, 2)
        assert pixels.tolist() == [[1, 1, 0, 0], [1, 1, 0, 0]]


class TestEvolveCommand:
    def _run(self, out_dir, seed="7"):
        return main([
            "evolve", "--task", "density", "--algo", "ga", "--epochs", "5",
            "--trials", "2", "--seed", seed, "--n", "29", "--t", "30",
            "--r", "1", "--batch", "20", "--out", str(out_dir),
        ])

    def test_writes_expected_artifacts(self, tmp_path, capsys):
        assert self._run(tmp_path / "d") == 0
        names = sorted(p.name for p in (tmp_path / "d").iterdir())
        assert names == ["summary.json", "trial_000.csv", "trial_000.json",
                         "trial_001.csv", "trial_001.json"]
        out = capsys.readouterr().out
        assert "ga" in out and "density" in out

    def test_repeat_runs_identical(self, tmp_path):
        self._run(tmp_path / "a")
        self._run(tmp_path / "b")
        for name in ("summary.json", "trial_000.json", "trial_001.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_invalid_flag_combination_exits_2(self, tmp_path, capsys):
        code = main(["evolve", "--task", "density", "--n", "30", "--epochs", "1",
                     "--trials", "1", "--out", str(tmp_path)])
        assert code == 2


class TestReport:
    def _make_experiment(self, out_dir):
        main(["evolve", "--task", "density", "--algo", "ga", "--epochs", "5",
              "--trials", "2", "--seed", "3", "--n", "21", "--t", "20",
              "--r", "1", "--batch", "10", "--out", str(out_dir)])

    def test_merged_csv_shape(self, tmp_path, capsys):
        self._make_experiment(tmp_path / "exp")
        code = main(["report", str(tmp_path / "exp")])
        assert code == 0
        out = capsys.readouterr().out
        assert "ga density" in out
        csv_lines = (tmp_path / "exp" / "fitness_curves.csv").read_text().strip().splitlines()
        assert csv_lines[0] == "epoch,trial,best_fitness"
        assert len(csv_lines) == 1 + 2 * 5

    def test_summary_line_format(self, tmp_path, capsys):
        self._make_experiment(tmp_path / "exp")
        capsys.readouterr()
        main(["report", str(tmp_path / "exp")])
        line = [l for l in capsys.readouterr().out.splitlines() if l.startswith("ga")][0]
        assert line.startswith("ga density 0.")
        assert "±" in line

    def test_empty_directory_exits_1(self, tmp_path, capsys):
        assert main(["report", str(tmp_path)]) == 1
        assert "no experiment summaries" in capsys.readouterr().err

    def test_corrupt_artifacts_listed(self, tmp_path, capsys):
        self._make_experiment(tmp_path / "exp")
        (tmp_path / "exp" / "trial_001.csv").unlink()
        assert main(["report", str(tmp_path / "exp")]) == 1
        err = capsys.readouterr().err
        assert "trial_001.csv" in err or "summary.json" in err

    def test_scans_nested_experiments(self, tmp_path, capsys):
        self._make_experiment(tmp_path / "a")
        self._make_experiment(tmp_path / "b")
        assert main(["report", str(tmp_path), "--out", str(tmp_path / "all.csv")]) == 0
        lines = (tmp_path / "all.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 2 * 2 * 5
