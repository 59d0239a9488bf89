import csv
import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from sptucker import gen_vessel_image, read_pgm, read_tns
from sptucker.cli import BENCH_COLUMNS, bundled_image_path, main
from sptucker.report import RunReport, load_schema


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def matmul_file(tmp_path, capsys):
    p = tmp_path / "mm.tns"
    assert run(["generate", "matmul", "5", "5", "5", "--output", str(p)], capsys)[0] == 0
    return p


def test_generate_matmul_header(matmul_file):
    assert matmul_file.read_text().splitlines()[0] == "3 25 25 25 125"


def test_generate_uniform_and_lowrank(tmp_path, capsys):
    code, out, _ = run(["generate", "uniform", "--shape", "2,2,2", "--sparsity", "1"], capsys)
    assert code == 0 and len(out.splitlines()) == 9
    a, b = tmp_path / "a.tns", tmp_path / "b.tns"
    for p in (a, b):
        run(["generate", "uniform", "--shape", "9,8,7", "--nnz", "20", "--seed", "3",
             "--output", str(p)], capsys)
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(["generate", "lowrank", "--shape", "3,4", "--ranks", "1,1"], capsys)
    assert code == 0 and out.startswith("2 3 4 12\n")
    assert run(["generate", "uniform", "--shape", "2,2"], capsys)[0] == 2
    assert run(["generate", "lowrank", "--shape", "3,4", "--ranks", "5,1"], capsys)[0] == 2


def test_decompose_matmul_report(matmul_file, tmp_path, capsys):
    args = ["decompose", str(matmul_file), "--ranks", "5,5,5", "--iters", "3", "--seed", "1"]
    code, out, _ = run(args + ["--model-dir", str(tmp_path / "model")], capsys)
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, load_schema())
    assert report["kron_calls"] == 1125
    assert report["config"]["seed"] == 1 and report["shape"] == [25, 25, 25]
    core = read_tns(tmp_path / "model" / "core.tns")
    assert core.shape == (5, 5, 5)
    u1 = np.loadtxt(tmp_path / "model" / "factor_1.txt")
    np.testing.assert_allclose(u1.T @ u1, np.eye(5), atol=1e-12)
    again = RunReport.from_json(run(args, capsys)[1])
    assert again.without_timings() | {"outputs": {}} == \
        RunReport.from_dict(report).without_timings() | {"outputs": {}}


def test_report_roundtrip_exact(matmul_file, capsys):
    out = run(["decompose", str(matmul_file), "--ranks", "2,3,4", "--iters", "2"], capsys)[1]
    rep = RunReport.from_json(out)
    assert rep.to_json() == out
    assert RunReport.from_json(rep.to_json()) == rep


def test_decompose_full_rank_and_csv(tmp_path, capsys):
    p = tmp_path / "u.tns"
    run(["generate", "uniform", "--shape", "3,4,2", "--nnz", "10", "--output", str(p)], capsys)
    code, out, _ = run(["decompose", str(p), "--ranks", "3,4,2"], capsys)
    assert json.loads(out)["rel_error"] <= 1e-10
    code, out, _ = run(["decompose", str(p), "--ranks", "2,2,2", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1 and rows[0]["qrp_calls"].isdigit()


def test_decompose_errors(matmul_file, tmp_path, capsys):
    assert run(["decompose", str(matmul_file), "--ranks", "5,5"], capsys)[0] == 2
    assert run(["decompose", str(matmul_file), "--ranks", "30,5,5"], capsys)[0] == 2
    assert run(["decompose", str(matmul_file), "--ranks", "a,b"], capsys)[0] == 2
    assert run(["decompose", str(matmul_file)], capsys)[0] == 2
    assert run(["decompose", str(tmp_path / "missing.tns"), "--ranks", "1"], capsys)[0] == 1
    bad = tmp_path / "bad.tns"
    bad.write_text("2 2 2 1\n1 1 oops\n")
    code, _, err = run(["decompose", str(bad), "--ranks", "1,1"], capsys)
    assert code == 1 and "line 2" in err


def test_bench_csv(capsys, monkeypatch):
    monkeypatch.setenv("STT_THREADS", "2")
    code, out, _ = run(["bench", "--shape", "10,10,10", "--ranks", "3,3,3",
                        "--sparsities", "1e-2,1e-1", "--solvers", "qrp,svd",
                        "--iters", "1", "--repeats", "1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == BENCH_COLUMNS
    assert [(r["sparsity"], r["solver"]) for r in rows] == [
        ("0.01", "qrp"), ("0.01", "svd"), ("0.1", "qrp"), ("0.1", "svd")]
    for r in rows:
        assert int(r["kron_calls"]) == 3 * int(r["nnz"])
        assert float(r["svd_flops"]) > float(r["qrp_flops"])


def test_bench_empty_and_errors(capsys, monkeypatch):
    code, out, _ = run(["bench", "--sparsities", ""], capsys)
    assert code == 0 and out == ",".join(BENCH_COLUMNS) + "\n"
    assert run(["bench", "--shape", "4,4", "--ranks", "2,2,2"], capsys)[0] == 2
    assert run(["bench", "--solvers", "lu", "--sparsities", ""], capsys)[0] == 2
    monkeypatch.setenv("STT_THREADS", "many")
    assert run(["bench", "--sparsities", "0.1", "--shape", "3,3", "--ranks", "1,1"], capsys)[0] == 2


def test_bundled_image_is_generator_output():
    with bundled_image_path().open("rb") as fh:
        data = fh.read()
    assert data.startswith(b"P5\n150 130\n255\n")
    expected = np.rint(gen_vessel_image((130, 150), seed=0) * 255).astype(np.uint8)
    assert data[len(b"P5\n150 130\n255\n"):] == expected.tobytes()


def test_compress_image(tmp_path, capsys):
    out_pgm = tmp_path / "r.pgm"
    code, out, _ = run(["compress-image", "--ranks", "30,35", "--iters", "12", "--tol", "0",
                        "--output", str(out_pgm)], capsys)
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, load_schema())
    assert rep["qrp_calls"] == 24 and rep["iterations"] == 12
    assert rep["compression_ratio"] == 19500 / 10200
    assert read_pgm(out_pgm).shape == (130, 150)
    assert run(["compress-image", "--ranks", "131,2"], capsys)[0] == 2
    assert run(["compress-image", "--ranks", "3"], capsys)[0] == 2


def test_compress_full_rank_and_rank_one(tmp_path, capsys):
    from sptucker import write_pgm

    rng = np.random.default_rng(0)
    img = np.rint(rng.random((6, 5)) * 255) / 255
    src, dst = tmp_path / "in.pgm", tmp_path / "out.pgm"
    write_pgm(img, src)
    run(["compress-image", str(src), "--ranks", "6,5", "--output", str(dst)], capsys)
    assert read_pgm(dst) == read_pgm(src)
    r1 = np.outer(np.linspace(0.1, 1, 6), np.linspace(0.2, 0.9, 5))
    write_pgm(r1, src)
    code, out, _ = run(["compress-image", str(src), "--ranks", "1,1", "--report",
                        str(tmp_path / "rep.json")], capsys)
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "rep.json").read_text())["command"] == "compress-image"


def test_rank_one_image_exact_before_quantization():
    from sptucker import CooTensor, DecompConfig, hooi_sparse

    r1 = np.outer(np.linspace(0.1, 1, 6), np.linspace(0.2, 0.9, 5))
    _, rep = hooi_sparse(CooTensor.from_dense(r1), DecompConfig((1, 1)))
    assert rep.rel_error <= 1e-6


def test_module_entry_point(matmul_file):
    proc = subprocess.run([sys.executable, "-m", "sptucker", "decompose", str(matmul_file),
                           "--ranks", "5,5"], capture_output=True, text=True)
    assert proc.returncode == 2 and "order 3" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "sptucker", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "compress-image" in proc.stdout
