import json

import numpy as np
import pytest

from deraintv import image, synth
from deraintv.cli import main


@pytest.fixture
def rain_tile_file(tmp_path, clean_tiles):
    pair = synth.make_pair(clean_tiles["moon"],
                           synth.RainSpec(angle_degrees=20.0, seed=42),
                           blend="additive")
    path = tmp_path / "rainy.png"
    image.save_image(pair.rainy, path)
    return path


def test_derain_single_file_outputs(tmp_path, rain_tile_file):
    out = tmp_path / "out"
    code = main(["derain", str(rain_tile_file), "--out", str(out)])
    assert code == 0
    assert (out / "rainy.X.png").exists()
    assert (out / "rainy.R.png").exists()
    meta = json.loads((out / "rainy.meta.json").read_text())
    assert meta["angle_source"] == "estimated"
    assert abs(meta["angle_degrees"] - 20.0) < 1.5
    assert meta["iterations"] >= 1
    assert np.isfinite(meta["final_energy"])


def test_derain_user_angle_recorded(tmp_path, rain_tile_file):
    out = tmp_path / "out"
    code = main(["derain", str(rain_tile_file), "--angle", "20", "--out", str(out)])
    assert code == 0
    meta = json.loads((out / "rainy.meta.json").read_text())
    assert meta["angle_source"] == "user"
    assert meta["angle_degrees"] == 20.0


def test_derain_directory_of_three(tmp_path, clean_tiles):
    src = tmp_path / "src"
    src.mkdir()
    for i, name in enumerate(("moon", "coins", "chelsea")):
        pair = synth.make_pair(clean_tiles[name],
                               synth.RainSpec(angle_degrees=10.0, seed=i))
        image.save_image(pair.rainy, src / f"{name}.png")
    out = tmp_path / "out"
    code = main(["derain", str(src), "--out", str(out)])
    assert code == 0
    for name in ("moon", "coins", "chelsea"):
        assert (out / f"{name}.X.png").exists()
        assert (out / f"{name}.R.png").exists()
        assert (out / f"{name}.meta.json").exists()


def test_derain_reruns_byte_identical(tmp_path, rain_tile_file):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["derain", str(rain_tile_file), "--out", str(out1)]) == 0
    assert main(["derain", str(rain_tile_file), "--out", str(out2)]) == 0
    for name in ("rainy.X.png", "rainy.R.png"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    m1 = json.loads((out1 / "rainy.meta.json").read_text())
    m2 = json.loads((out2 / "rainy.meta.json").read_text())
    m1.pop("input"); m2.pop("input")
    assert m1 == m2


def test_derain_missing_input_exit_code(tmp_path):
    code = main(["derain", str(tmp_path / "missing.png"), "--out",
                 str(tmp_path / "out")])
    assert code == 2  # config error: input does not exist


def test_derain_bad_file_exit_code(tmp_path):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not a png at all")
    code = main(["derain", str(bad), "--out", str(tmp_path / "out")])
    assert code == 1  # runtime failure on the file


def test_config_file_with_flag_override(tmp_path, rain_tile_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"params": {"outer_iters": 2},
                               "out": str(tmp_path / "cfg_out")}))
    out = tmp_path / "flag_out"
    code = main(["derain", str(rain_tile_file), "--config", str(cfg),
                 "--out", str(out)])
    assert code == 0
    assert out.exists()  # flag wins over config
    meta = json.loads((out / "rainy.meta.json").read_text())
    assert meta["params"]["outer_iters"] == 2  # config value used


def test_invalid_config_exit_code_2(tmp_path, rain_tile_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"params": {"tau": -1.0}}))
    code = main(["derain", str(rain_tile_file), "--config", str(cfg)])
    assert code == 2


def test_synth_outputs_and_sidecar(tmp_path, clean_tiles):
    src = tmp_path / "clean"
    src.mkdir()
    image.save_image(clean_tiles["coins"], src / "coins.png")
    out = tmp_path / "out"
    code = main(["synth", str(src), "--angle", "15", "--seed", "9",
                 "--out", str(out)])
    assert code == 0
    for suffix in ("clean", "rain", "rainy"):
        assert (out / f"coins.{suffix}.png").exists()
    sidecar = json.loads((out / "coins.spec.json").read_text())
    assert sidecar["rain_spec"]["angle_degrees"] == 15.0
    assert sidecar["rain_spec"]["seed"] == 9
    assert sidecar["blend"] == "screen"


def test_synth_deterministic(tmp_path, clean_tiles):
    src = tmp_path / "clean"
    src.mkdir()
    image.save_image(clean_tiles["coins"], src / "c.png")
    o1, o2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["synth", str(src), "--out", str(o1)]) == 0
    assert main(["synth", str(src), "--out", str(o2)]) == 0
    assert (o1 / "c.rainy.png").read_bytes() == (o2 / "c.rainy.png").read_bytes()


def test_estimate_angle_output(tmp_path, capsys):
    bg = np.full((128, 128), 0.3)
    layer = synth.synth_rain_layer(128, 128,
                                   synth.RainSpec(angle_degrees=20.0, seed=42))
    path = tmp_path / "r.png"
    image.save_image(synth.screen_blend(bg, layer), path)
    code = main(["estimate-angle", str(path)])
    captured = capsys.readouterr()
    assert code == 0
    assert "20.0 ± 0.25" in captured.out
    assert "confidence" in captured.out


def test_evaluate_identical_dirs(tmp_path, clean_tiles, capsys):
    gt = tmp_path / "gt"
    gt.mkdir()
    image.save_image(clean_tiles["moon"], gt / "moon.png")
    out = tmp_path / "rep"
    code = main(["evaluate", str(gt), str(gt), "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert "inf" in captured.out
    assert "1.0000" in captured.out
    assert (out / "report.csv").exists()
    assert (out / "report.json").exists()
    assert (out / "report.png").exists()


def test_sweep_two_by_two_grid(tmp_path, clean_tiles):
    src = tmp_path / "clean"
    src.mkdir()
    image.save_image(clean_tiles["moon"][:64, :64], src / "m.png")
    pairs_dir = tmp_path / "pairs"
    assert main(["synth", str(src), "--blend", "additive",
                 "--out", str(pairs_dir)]) == 0
    cfg = tmp_path / "sweep.json"
    out = tmp_path / "sweep_out"
    cfg.write_text(json.dumps({
        "pairs_dir": str(pairs_dir),
        "out": str(out),
        "ratios": [1.0, 2.0],
        "angle_errors_deg": [0.0, 5.0],
        "params": {"inner_iters": 3, "outer_iters": 2},
    }))
    code = main(["sweep", "--config", str(cfg)])
    assert code == 0
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert len(lines) == 5  # header + 2x2 grid rows
    assert (out / "sweep.png").exists()


def test_sweep_empty_dataset_warns_and_succeeds(tmp_path, capsys):
    pairs_dir = tmp_path / "empty"
    pairs_dir.mkdir()
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"pairs_dir": str(pairs_dir),
                               "out": str(tmp_path / "out")}))
    code = main(["sweep", "--config", str(cfg)])
    captured = capsys.readouterr()
    assert code == 0
    assert "empty dataset" in captured.err
    assert (tmp_path / "out" / "sweep.csv").exists()


def test_sweep_without_config_or_dir_is_config_error():
    assert main(["sweep"]) == 2
