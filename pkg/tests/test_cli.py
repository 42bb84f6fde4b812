from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from foldrect import synth
from foldrect.cli import main
from foldrect.imaging import load_image, save_image


@pytest.fixture(scope="module")
def scene_png(tmp_path_factory):
    d = tmp_path_factory.mktemp("scene")
    img, _ = synth.generate(synth.random_spec(4))
    p = d / "in.png"
    save_image(p, img)
    return p


def test_rectify(scene_png, tmp_path, capsys):
    out = tmp_path / "out.png"
    assert main(["rectify", str(scene_png), str(out)]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("rectified L=") and "total=" in line
    assert load_image(out).shape == (2970, 2100, 3)


def test_rectify_trivial_is_success(tmp_path, capsys):
    src = tmp_path / "blank.png"
    save_image(src, np.full((300, 240), 128, np.uint8))
    assert main(["rectify", str(src), str(tmp_path / "o.png")]) == 0
    assert capsys.readouterr().out.startswith("trivial")
    assert np.array_equal(load_image(tmp_path / "o.png"), load_image(src))


def test_rectify_errors(tmp_path, scene_png):
    assert main(["rectify", str(tmp_path / "missing.png"), str(tmp_path / "o.png")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"sigma": -1}))
    assert main(["rectify", str(scene_png), str(tmp_path / "o.png"), "--config", str(bad)]) == 1
    assert main(["rectify", str(scene_png), str(tmp_path / "nodir" / "o.png")]) == 1
    with pytest.raises(SystemExit) as ei:
        main(["rectify"])
    assert ei.value.code == 2
    assert main(["--threads", "0", "rectify", str(scene_png), str(tmp_path / "o.png")]) == 2


def test_rectify_debug_dir(scene_png, tmp_path):
    dbg = tmp_path / "dbg"
    assert main(["rectify", str(scene_png), str(tmp_path / "o.png"), "--debug-dir", str(dbg)]) == 0
    assert any(dbg.iterdir())


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_eval(fdi_root, tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["eval", "--dataset", str(fdi_root), "--subset", "all", "--out", str(out)]) == 0
    rows = _rows(out)
    assert [r["id"] for r in rows] == ["2h_001", "2t_002", "3t_003"]
    assert "subset" in capsys.readouterr().out


def test_eval_no_algo_identity(fdi_root, tmp_path):
    out = tmp_path / "r.csv"
    assert main(["eval", "--dataset", str(fdi_root), "--scene", "hand", "--no-algo", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 1 and float(rows[0]["ss"]) == 0.0 and rows[0]["status"] == "no-algo"


def test_eval_with_ocr_stub(fdi_root, tmp_path):
    stub = tmp_path / "stub.py"
    stub.write_text("print('same text')\n")
    out = tmp_path / "r.csv"
    cmd = f"{sys.executable} {stub} {{input}}"
    assert main(["eval", "--dataset", str(fdi_root), "--subset", "3fold", "--no-algo", "--ocr-cmd", cmd,
                 "--out", str(out)]) == 0
    r = _rows(out)[0]
    assert (r["ed"], r["cer"]) == ("0", "0.000000")


def test_eval_bad_dataset(tmp_path):
    assert main(["eval", "--dataset", str(tmp_path), "--out", str(tmp_path / "r.csv")]) == 1


def test_synth_and_bench(tmp_path, capsys):
    d = tmp_path / "s"
    assert main(["synth", "--count", "2", "--seed", "7", "--width", "360", "--height", "480", "--out", str(d)]) == 0
    assert sorted(p.name for p in d.iterdir()) == ["scene_00007.json", "scene_00007.png",
                                                  "scene_00008.json", "scene_00008.png"]
    capsys.readouterr()
    assert main(["bench", "--dir", str(d), "--reps", "1"]) == 0
    out = capsys.readouterr().out
    assert "T fraction" in out and "2 image(s)" in out
    assert main(["synth", "--curl", "-1", "--out", str(d)]) == 1


def test_bench_errors(tmp_path):
    assert main(["bench", "--dir", str(tmp_path)]) == 1
    assert main(["bench", "--dir", str(tmp_path / "none")]) == 1


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "foldrect", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "rectify" in res.stdout
