import json

import numpy as np
import pytest

import oracles
from tailored_bell import io
from tailored_bell.bases import conj_overlap_3, mub_overlap, mub_pair, qubit_mub_blocks
from tailored_bell.cli import run
from tailored_bell.functional import born_behavior
from tailored_bell.realization import canonical


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, doc):
        paths[name] = tmp_path / f"{name}.json"
        io.write_json(paths[name], doc)

    put("mub3", io.overlap_doc(mub_overlap(3)))
    put("conj3", io.overlap_doc(conj_overlap_3()))
    put("fourier3", io.bases_doc(mub_pair(3)))
    c = canonical(mub_pair(2))
    beh = io.behavior_doc(born_behavior(c))
    beh["overlap"] = c.overlap.entries
    put("behavior2", beh)
    blocks = io.overlap_doc(qubit_mub_blocks(4))
    blocks["blocks"] = [[0, 1], [2, 3]]
    put("blocks4", blocks)
    put("pauli", io.n_bases_doc(oracles.pauli_mub_triple()))
    put("cfg", {"d": 2, "restarts": 3, "max_iters": 200})
    paths["dir"] = tmp_path
    return paths


def out_json(path):
    return json.loads(path.read_text())


def test_local_value(files, capsys):
    out = files["dir"] / "lv.json"
    assert run(["local-value", "--overlap", str(files["mub3"]), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "beta_L 1.932653" in text and "nu_star 0.983163" in text
    doc = out_json(out)
    assert doc["d"] == 3 and doc["best_strategy"]["u"] == 0


def test_quantum_check(files, capsys):
    real = files["dir"] / "real.json"
    assert run(["quantum-check", "--bases", str(files["fourier3"]), "--realization-out", str(real)]) == 0
    assert "F_d 2.000000000" in capsys.readouterr().out
    out = files["dir"] / "cert.json"
    assert run(["certify", "--realization", str(real), "--complete", "--out", str(out)]) == 0
    assert out_json(out)["passed"] is True
    out = files["dir"] / "ext.json"
    assert run(["extract", "--realization", str(real), "--column", "1", "--out", str(out)]) == 0
    assert out_json(out)["fidelity"] >= 1 - 1e-8


def test_robustness_threshold(files, capsys):
    out = files["dir"] / "rob.csv"
    assert run(["robustness", "--overlap", str(files["conj3"]), "--nu", "0.95,0.97,0.99", "--out", str(out)]) == 0
    assert "threshold 0.982971" in capsys.readouterr().out
    rows = out.read_text().splitlines()[1:]
    assert [r.split(",")[2] for r in rows] == ["false", "false", "true"]


def test_robustness_with_bases_matches_formula(files, tmp_path):
    out = tmp_path / "rob.json"
    assert run(["robustness", "--bases", str(files["fourier3"]), "--nu", "0,0.5,1", "--out", str(out)]) == 0
    scores = [row["score"] for row in out_json(out)["rows"]]
    np.testing.assert_allclose(scores, [-2, 0, 2], atol=1e-9)


def test_eval_behavior(files, capsys):
    assert run(["eval", "--behavior", str(files["behavior2"])]) == 0
    assert "F_d 1.000000" in capsys.readouterr().out


def test_exceptional_extension_simplex(files, capsys):
    assert run(["exceptional", "--spec", str(files["blocks4"])]) == 0
    assert "passed true" in capsys.readouterr().out
    assert run(["extension", "--bases", str(files["pauli"])]) == 0
    assert "F_d^N 3.000000" in capsys.readouterr().out
    assert run(["simplex", "--tau", "0.5", "--n", "3"]) == 0
    assert capsys.readouterr().out.startswith("3 extremal point(s)")


def test_search_byte_identical(files):
    a, b = files["dir"] / "a.json", files["dir"] / "b.json"
    csv = files["dir"] / "traj.csv"
    argv = ["search", "--config", str(files["cfg"]), "--seed", "5"]
    assert run(argv + ["--out", str(a), "--trajectory-csv", str(csv)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert out_json(a)["config"]["seed"] == 5
    assert csv.read_text().startswith("iter,value\n")


def test_json_roundtrip_is_bit_equal(files):
    out = files["dir"] / "lv.json"
    run(["local-value", "--overlap", str(files["conj3"]), "--out", str(out)])
    doc = json.loads(out.read_text())
    assert io.dumps(doc) == out.read_text()


def test_exit_codes(files, capsys):
    assert run([]) == 2
    assert run(["local-value", "--overlap", str(files["mub3"]), "--bogus"]) == 2
    assert run(["frobnicate"]) == 2
    assert run(["local-value", "--overlap", str(files["dir"] / "missing.json")]) == 2
    assert run(["robustness", "--overlap", str(files["conj3"]), "--nu", "1.5"]) == 3
    assert "VisibilityOutOfRange" in capsys.readouterr().err
    bad = files["dir"] / "bad.json"
    bad.write_text(json.dumps({"d": 2, "overlap": [[0.5, 0.5], [0.5, 0.5]]}))
    assert run(["local-value", "--overlap", str(bad)]) == 3
    assert "NotBistochastic" in capsys.readouterr().err


def test_certify_rejects_corrupted(files, tmp_path):
    c = canonical(mub_pair(3))
    p = oracles.rotate_projector(c.bob_P, 0, 0.1)
    doc = io.realization_doc(c, c.overlap)
    doc["bobP"] = io.encode_complex(p)
    path = tmp_path / "bad_real.json"
    io.write_json(path, doc)
    out = tmp_path / "cert.json"
    assert run(["certify", "--realization", str(path), "--out", str(out)]) == 0
    assert out_json(out)["passed"] is False


def test_module_entry_point(files):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "tailored_bell", "local-value", "--overlap", str(files["mub3"])],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "beta_L 1.932653" in proc.stdout
