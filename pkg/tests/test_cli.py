import json

import numpy as np

from recon.cli import main
from recon.meshio import ingest


def run_cli(args):
    return main(args)


def test_reconstruct_circle(tmp_path, capsys):
    out = tmp_path / "run"
    code = run_cli([
        "reconstruct", "--generate", "circle", "--n", "32", "--seed", "7",
        "--rho-mult", "16", "--out-dir", str(out),
    ])
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["matches_delloc"] is True
    assert printed["support_size"] == 32
    mesh = (out / "solution.obj").read_text().splitlines()
    assert sum(1 for ln in mesh if ln.startswith("l ")) == 32
    result = json.loads((out / "result.json").read_text())
    assert result["integral"] is True
    assert result["boundary_residual"] <= 1e-7
    assert result["load_residual"] <= 1e-7
    assert result["euler_characteristic"] == 0  # a closed polygon
    quality = json.loads((out / "quality.json").read_text())
    assert set(quality) >= {"sep", "height_min", "theta", "protection", "safety_ok"}


def test_reconstruct_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0\n1\n")
    code = run_cli([
        "reconstruct", "--input", str(bad), "--epsilon", "0.5",
        "--out-dir", str(tmp_path / "o"),
    ])
    assert code == 2
    err = json.loads(capsys.readouterr().out)
    assert err["error"] == "InvalidInput"
    assert "line 2" in err["message"]


def test_quality_subcommand(tmp_path, capsys):
    out = tmp_path / "q.json"
    code = run_cli([
        "quality", "--generate", "circle", "--n", "48", "--seed", "3",
        "--rho-mult", "4", "--out", str(out),
    ])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["sep"] > 0 and report["dim"] == 1
    assert isinstance(report["safety_ok"], bool)


def test_perturb_subcommand_roundtrip(tmp_path, capsys):
    rng = np.random.default_rng(0)
    xs, ys = np.meshgrid(np.arange(5), np.arange(5), indexing="ij")
    cloud = np.stack([xs.ravel(), ys.ravel()], 1) + rng.uniform(-0.1, 0.1, (25, 2))
    src = tmp_path / "in.csv"
    src.write_text("\n".join(",".join(format(v, ".17g") for v in row) for row in cloud))
    out = tmp_path / "out.csv"
    trace = tmp_path / "trace.jsonl"
    code = run_cli([
        "perturb", "--input", str(src), "--d", "2",
        "--perturb-rho", "0.45", "--r-pert", "0.2",
        "--height-min", "0.01", "--prot-min", "0.0001",
        "--out", str(out), "--trace", str(trace), "--seed", "5",
    ])
    assert code == 0
    moved = ingest(str(out))
    assert moved.shape == cloud.shape
    assert np.linalg.norm(moved - cloud, axis=1).max() <= 0.2 + 1e-9
    for line in trace.read_text().splitlines():
        rec = json.loads(line)
        assert {"round", "events_height", "events_protection", "resets"} == set(rec)


def test_delloc_subcommand(tmp_path, capsys):
    out = tmp_path / "d"
    code = run_cli([
        "delloc", "--generate", "circle", "--n", "24", "--seed", "2",
        "--rho-mult", "8", "--out-dir", str(out),
    ])
    assert code == 0
    summary = json.loads((out / "delloc.json").read_text())
    assert summary["n_simplices"] == 24
    assert summary["euler_characteristic"] == 0
    assert (out / "delloc.obj").exists()


def test_reconstruct_with_perturbation(tmp_path, capsys):
    out = tmp_path / "run"
    code = run_cli([
        "reconstruct", "--generate", "circle", "--n", "32", "--seed", "11",
        "--delta", "1e-3", "--rho-mult", "16", "--out-dir", str(out),
        "--perturb", "--perturb-rho", "0.2", "--r-pert", "0.002",
        "--height-min", "1e-6", "--prot-min", "1e-7",
    ])
    assert code == 0
    assert (out / "perturb_trace.jsonl").exists()
    printed = json.loads(capsys.readouterr().out)
    assert printed["matches_delloc"] is True


def test_quality_from_file_pca_mode(tmp_path, capsys):
    # no manifold: tangents fall back to PCA and the reach must be supplied
    n = 48
    angles = 2 * np.pi * np.arange(n) / n
    cloud = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    src = tmp_path / "circle.csv"
    src.write_text("\n".join(",".join(format(v, ".17g") for v in row) for row in cloud))
    code = run_cli([
        "quality", "--input", str(src), "--d", "1", "--epsilon", "0.07",
        "--rho-mult", "4", "--reach", "1.0",
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["tangent_mode"] == "pca"
    assert report["reach"] == 1.0
    # without --reach the command fails cleanly
    code = run_cli([
        "quality", "--input", str(src), "--d", "1", "--epsilon", "0.07",
        "--rho-mult", "4",
    ])
    assert code != 0


def test_pipeline_determinism(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = run_cli([
            "reconstruct", "--generate", "circle", "--n", "24", "--seed", "9",
            "--rho-mult", "12", "--out-dir", str(out),
        ])
        assert code == 0
        outs.append((out / "result.json").read_bytes())
    assert outs[0] == outs[1]  # byte-identical reports for the same seed
