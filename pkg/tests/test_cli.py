import json

import pytest

from charsense.cli import main, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    assert parse_range("1..5") == [1, 2, 3, 4, 5]
    assert parse_range("1,2,3") == [1, 2, 3]
    assert parse_range("0..30:10", float) == [0.0, 10.0, 20.0, 30.0]
    assert parse_range("1..3,7") == [1, 2, 3, 7]


def test_seq(capsys):
    code, out, _ = run(capsys, "seq", "--family", "sidelnikov", "-p", "3", "-m", "2", "-M", "4")
    assert code == 0
    assert [ln.split(",")[1] for ln in out.splitlines()[1:]] == ["0", "3", "3", "1", "0", "2", "1", "2"]


def test_matrix_build_summary(capsys):
    code, out, _ = run(capsys, "matrix", "build", "--family", "sidelnikov", "-p", "13", "-m", "2", "-M", "168")
    assert code == 0
    info = json.loads(out)
    assert (info["K"], info["N"], info["M"]) == (168, 28056, 168)


def test_export_verify_and_tamper(capsys, tmp_path):
    path = tmp_path / "pr47.csv"
    code, _, _ = run(capsys, "matrix", "build", "--family", "power-residue", "-p", "47", "-M", "46", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert json.loads(lines[0])["N"] == 2115 and len(lines) == 48
    assert run(capsys, "matrix", "verify", str(path))[0] == 0

    row = lines[5].split(",")
    row[17] = str((int(row[17]) + 1) % 46)
    lines[5] = ",".join(row)
    path.write_text("\n".join(lines) + "\n")
    code, out, err = run(capsys, "matrix", "verify", str(path))
    assert code == 3 and "differ" in err


def test_verify_baseline_export(capsys, tmp_path):
    path = tmp_path / "g.csv"
    assert run(capsys, "matrix", "export", "--family", "gaussian", "--K", "6", "--N", "9", "--seed", "4",
               "--out", str(path))[0] == 0
    assert run(capsys, "matrix", "verify", str(path))[0] == 0


def test_parameter_errors_exit_2(capsys):
    assert run(capsys, "matrix", "build", "-p", "7", "-M", "4")[0] == 2
    assert run(capsys, "matrix", "build", "-p", "8", "-M", "3")[0] == 2
    assert run(capsys, "matrix", "export", "-p", "7", "-M", "3")[0] == 2
    assert run(capsys, "recover", "--s", "1")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "-p", "59", "-M", "58")
    m = json.loads(out)
    assert code == 0
    assert m["spectral_norm"] == pytest.approx(7.7431, abs=5e-4)
    assert m["tight_frame_floor"] == pytest.approx(7.5498, abs=5e-5)
    assert m["sparsity_bound"] == 3


def test_analyze_orthonormal(capsys):
    code, out, _ = run(capsys, "analyze", "--family", "partial-fourier", "--K", "8", "--N", "8", "--seed", "1")
    # K == N has no Welch bound; the command reports the parameter error
    assert code == 2


def test_analyze_exported_file(capsys, tmp_path):
    path = tmp_path / "s.csv"
    run(capsys, "matrix", "export", "--family", "sidelnikov", "-p", "3", "-m", "3", "-M", "26", "--out", str(path))
    code, out, _ = run(capsys, "analyze", "--input", str(path), "--bruteforce")
    m = json.loads(out)
    assert code == 0 and abs(m["coherence"] - m["coherence_bruteforce"]) < 1e-12
    assert m["spectral_norm"] == pytest.approx(5.0990, abs=5e-4)


def test_cond_stats_output(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, _, _ = run(capsys, "cond-stats", "--family", "sidelnikov", "-p", "7", "-m", "2", "-M", "48",
                     "--s", "1..3", "--trials", "50", "--seed", "3", "--out", str(out), "--threads", "2")
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "family,K,N,M,s,trials,mean,std,infinite_count,seed"
    assert len(lines) == 4 and lines[1].startswith("sidelnikov,48,2256,48,1,50,1.0,")
    manifest = json.loads((tmp_path / "c.csv.manifest.json").read_text())
    assert manifest["master_seed"] == 3 and "csv" in manifest["outputs"]


def test_recover_is_reproducible(capsys, tmp_path):
    args = ["recover", "--family", "sidelnikov", "-p", "3", "-m", "3", "-M", "26", "--s", "1,3",
            "--trials", "30", "--snr-db", "10..30:10", "--seed", "12"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "--out", str(a), "--threads", "1")[0] == 0
    assert run(capsys, *args, "--out", str(b), "--threads", "3")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    ma = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert ma["outputs"] == mb["outputs"] and ma["config"] == mb["config"]
    rows = a.read_text().splitlines()
    assert len(rows) == 1 + 2 * 3 and all(r.endswith(",12") for r in rows[1:])


def test_recover_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CHARSENSE_SEED", "77")
    code, out, err = run(capsys, "recover", "-p", "7", "-M", "3", "--s", "1", "--trials", "3")
    assert code == 0 and out.splitlines()[1].endswith(",77")
    assert json.loads(err)["master_seed"] == 77


def test_recover_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# noiseless smoke run\nfamily = sidelnikov\np=3\nm=3\nM=26\ns=2,4\ntrials=10\nseed=5\n")
    code, out, _ = run(capsys, "recover", "--config", str(cfg), "--trials", "4")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 2 and rows[0].split(",")[7] == "4"  # flag overrides file


@pytest.mark.parametrize("body,needle", [
    ("family=sidelnikov\nbogus=1\n", ":2: unknown key"),
    ("p=3\ntrials=ten\n", ":2: bad value"),
    ("p 3\n", ":1: expected key=value"),
    ("family=chirp\n", ":1:"),
])
def test_config_errors(capsys, tmp_path, body, needle):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(body)
    code, _, err = run(capsys, "recover", "--config", str(cfg), "--s", "1")
    assert code == 2 and needle in err


def test_recover_json_per_trial(capsys):
    code, out, _ = run(capsys, "recover", "-p", "7", "-M", "3", "--s", "2", "--trials", "4", "--per-trial",
                       "--seed", "1", "--algorithm", "omp")
    payload = json.loads(out)
    assert code == 0 and len(payload[0]["squared_errors"]) == 4
