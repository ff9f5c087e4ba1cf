"""CLI contract tests: subcommands, exit codes, stderr error JSON."""

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

import doublecca.cli as cli_mod
from doublecca.cli import main
from doublecca.service import create_app
from doublecca.store import EmbeddingManifest, EmbeddingMatrix, write_embx


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def stderr_error(err: str) -> dict:
    return json.loads(err.strip().splitlines()[-1])


def test_prompts_writes_jsonl(tmp_path, capsys):
    out = tmp_path / "p.jsonl"
    code, stdout, _ = run_cli(
        capsys,
        "prompts", "--classes", "landbird,waterbird", "--template", "waffle_chars",
        "--k", "500", "--seed", "42", "--out", str(out),
    )
    assert code == 0
    body = json.loads(stdout)
    assert body["n_records"] == 1002  # 500 * 2 random + 2 originals
    lines = out.read_text().splitlines()
    assert len(lines) == 1002
    kinds = [json.loads(l)["kind"] for l in lines]
    assert kinds.count("original") == 2
    assert kinds.count("random") == 1000


def test_prompts_accepts_class_file_via_classes_flag(tmp_path, capsys):
    classes_json = tmp_path / "classes.json"
    classes_json.write_text(json.dumps(["hen", "zebra"]))
    out = tmp_path / "p.jsonl"
    code, stdout, _ = run_cli(
        capsys, "prompts", "--classes", str(classes_json), "--k", "3", "--out", str(out),
    )
    assert code == 0
    assert json.loads(stdout)["n_classes"] == 2
    first = json.loads(out.read_text().splitlines()[0])
    assert first["text"] == "a photo of a hen"


def test_usage_error_exits_1(tmp_path, capsys):
    code, _, err = run_cli(capsys, "prompts", "--out", str(tmp_path / "p.jsonl"))
    assert code == 1
    assert stderr_error(err)["error"] == "UsageError"


def test_unknown_command_exits_1(capsys):
    code, _, err = run_cli(capsys, "frobnicate")
    assert code == 1


def synth_cmd(capsys, tmp_path, **over):
    args = {
        "--out-dir": str(tmp_path / "bench"),
        "--seed": "1234",
        "--m": "1200",
        "--k": "60",
        "--d": "32",
        "--d-se": "48",
    }
    args.update({k: str(v) for k, v in over.items()})
    argv = ["synth"] + [x for kv in args.items() for x in kv]
    code, stdout, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(stdout)


def test_synth_fuse_eval_flow(tmp_path, capsys):
    files = synth_cmd(capsys, tmp_path)
    prompts = tmp_path / "prompts.jsonl"
    code, _, _ = run_cli(
        capsys, "prompts", "--classes", "class0,class1", "--k", "60", "--seed", "1234",
        "--out", str(prompts),
    )
    assert code == 0

    head = tmp_path / "head.embx"
    code, stdout, err = run_cli(
        capsys, "fuse", "--prompts", str(prompts),
        "--clip-class", files["clip_class"], "--se-class", files["se_class"],
        "--clip-rand", files["clip_rand"], "--se-rand", files["se_rand"],
        "--d-cca", "16", "--seed", "1234", "--out", str(head),
    )
    assert code == 0, err
    fuse_body = json.loads(stdout)
    assert fuse_body["n_classes"] == 2

    report_path = tmp_path / "report.json"
    code, stdout, err = run_cli(
        capsys, "eval", "--head", str(head), "--images", files["images"],
        "--labels", files["labels"], "--out", str(report_path),
    )
    assert code == 0, err
    report = json.loads(stdout)["report"]
    assert report["gap"] == report["avg"] - report["worst"]  # exact float identity
    assert report_path.exists()


def test_fuse_misaligned_counts_exits_2(tmp_path, capsys):
    files = synth_cmd(capsys, tmp_path)
    prompts = tmp_path / "wrong.jsonl"
    run_cli(capsys, "prompts", "--classes", "class0,class1", "--k", "7", "--out", str(prompts))
    code, _, err = run_cli(
        capsys, "fuse", "--prompts", str(prompts),
        "--clip-class", files["clip_class"], "--se-class", files["se_class"],
        "--clip-rand", files["clip_rand"], "--se-rand", files["se_rand"],
        "--d-cca", "8", "--out", str(tmp_path / "h.embx"),
    )
    assert code == 2
    assert stderr_error(err)["error"] == "AlignmentError"


def test_degenerate_view_exits_3(tmp_path, capsys):
    files = synth_cmd(capsys, tmp_path)
    prompts = tmp_path / "prompts.jsonl"
    run_cli(capsys, "prompts", "--classes", "class0,class1", "--k", "60",
            "--seed", "1234", "--out", str(prompts))
    flat = tmp_path / "flat.embx"
    write_embx(
        EmbeddingMatrix(np.ones((120, 32)), EmbeddingManifest(model_id="clip-text")), flat
    )
    code, _, err = run_cli(
        capsys, "fuse", "--prompts", str(prompts),
        "--clip-class", files["clip_class"], "--se-class", files["se_class"],
        "--clip-rand", str(flat), "--se-rand", files["se_rand"],
        "--d-cca", "8", "--out", str(tmp_path / "h.embx"),
    )
    assert code == 3
    assert stderr_error(err)["error"] == "DegenerateView"


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "eval", "--head", str(tmp_path / "missing.embx"),
        "--images", str(tmp_path / "missing2.embx"), "--labels", str(tmp_path / "l.json"),
    )
    assert code == 2


def test_sweep_csv_grid(tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    code, stdout, err = run_cli(
        capsys, "sweep", "--out-dir", str(out_dir),
        "--k-values", "4,40", "--d-cca-values", "8",
        "--seed", "7", "--m", "800", "--d", "32", "--d-se", "48",
    )
    assert code == 0, err
    rows = json.loads(stdout)["rows"]
    assert [(r["k"], r["d_cca"]) for r in rows] == [(4, 8), (40, 8)]
    lines = (out_dir / "sweep.csv").read_text().splitlines()
    assert lines[0] == "k,d_cca,avg,worst,gap"
    assert len(lines) == 3


def test_prompts_with_attributes_expands_classes(tmp_path, capsys):
    out = tmp_path / "p.jsonl"
    code, stdout, _ = run_cli(
        capsys, "prompts", "--classes", "landbird,waterbird",
        "--attributes", "in forest,in sky,on grass", "--k", "2", "--out", str(out),
    )
    assert code == 0
    body = json.loads(stdout)
    assert body["n_classes"] == 6
    assert body["rows_per_class"] == 3
    first = json.loads(out.read_text().splitlines()[0])
    assert first["class_name"] == "landbird in forest"


def test_eval_with_attribute_expansion(tmp_path, capsys):
    # Expanded head: 2 classes x 3 attribute rows; scores reduce by max.
    gen = np.random.default_rng(5)
    head = gen.standard_normal((6, 16))
    images = gen.standard_normal((40, 16))
    labels = gen.integers(0, 2, 40)
    groups = gen.integers(0, 2, 40)

    head_path = tmp_path / "head.embx"
    img_path = tmp_path / "img.embx"
    lab_path = tmp_path / "labels.json"
    write_embx(EmbeddingMatrix(head), head_path)
    write_embx(EmbeddingMatrix(images), img_path)
    lab_path.write_text(json.dumps({
        "labels": labels.tolist(), "groups": groups.tolist(), "group_names": ["g0", "g1"],
    }))

    code, stdout, err = run_cli(
        capsys, "eval", "--head", str(head_path), "--images", str(img_path),
        "--labels", str(lab_path), "--rows-per-class", "3", "--aggregation", "max",
    )
    assert code == 0, err
    report = json.loads(stdout)["report"]

    scores = images @ head.T
    reduced = scores.reshape(40, 2, 3).max(axis=2)
    preds = np.argmax(reduced, axis=1)
    assert report["avg"] == pytest.approx(100.0 * (preds == labels).mean())


def test_remote_mode_roundtrip(tmp_path, capsys, monkeypatch):
    """--service-url path: POST bodies go over HTTP (here an in-process app)."""
    tc = TestClient(create_app())
    monkeypatch.setattr(
        cli_mod.httpx,
        "post",
        lambda url, json, timeout: tc.post(url.replace("http://svc", ""), json=json),
    )
    out = tmp_path / "p.jsonl"
    code, stdout, _ = run_cli(
        capsys, "--service-url", "http://svc", "prompts",
        "--classes", "cat,dog", "--k", "3", "--out", str(out),
    )
    assert code == 0
    assert json.loads(stdout)["n_records"] == 8
    assert out.exists()


def test_remote_mode_relays_error_category(tmp_path, capsys, monkeypatch):
    tc = TestClient(create_app())
    monkeypatch.setattr(
        cli_mod.httpx,
        "post",
        lambda url, json, timeout: tc.post(url.replace("http://svc", ""), json=json),
    )
    code, _, err = run_cli(
        capsys, "--service-url", "http://svc", "prompts",
        "--classes", "a,a", "--k", "1", "--out", str(tmp_path / "p.jsonl"),
    )
    assert code == 2
    assert stderr_error(err)["error"] == "DuplicateClassNames"
