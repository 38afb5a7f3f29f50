"""
End-to-end tests of the qubits command line
"""

import json

import numpy as np
import pandas as pd
import pytest
from sklearn.metrics import adjusted_rand_score

from qubits.core.qubo import load_json
from qubits.main import main


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"logging": {"level": "WARNING"}}), encoding="utf-8")
    return str(path)


@pytest.fixture
def labelled_csv(tmp_path, rng):
    """Eight labelled series: four noisy sines (class 0), four noisy cosines (class 1)"""
    t = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    rows = []
    for label, base in ((0, np.sin(t)), (1, np.cos(t))):
        for _ in range(4):
            series = base + rng.normal(0.0, 0.02, size=t.size)
            rows.append(f"{label}," + ",".join(f"{v:.6f}" for v in series))
    path = tmp_path / "series.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def _run(capsys, config_path, *argv):
    code = main(["--config", config_path, "--quiet", *argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def _without_timestamp(document):
    return {key: value for key, value in document.items() if key != "created_at"}


class TestCluster:
    def test_brute_force_recovers_classes(self, capsys, config_path, labelled_csv):
        code, report = _run(capsys, config_path, "cluster", str(labelled_csv), "--labels",
                            "--k", "2", "--solver", "brute-force")
        assert code == 0
        assert report["kind"] == "qubo"
        assert report["clusters"]["outlier_count"] == 0
        labels = np.repeat([0, 1], 4)
        assert adjusted_rand_score(labels, report["assignment"]["cluster_of"]) == 1.0
        assert set(report["clusters"]["rmse"]) == {"0", "1"}
        assert report["lambda1"] == pytest.approx(100 * report["lambda2"])
        assert report["solver"]["solver"] == "brute-force"

    def test_anneal_report(self, capsys, config_path, labelled_csv, tmp_path):
        output = tmp_path / "qubo.json"
        code, printed = _run(capsys, config_path, "cluster", str(labelled_csv), "--labels",
                             "--k", "2", "--restarts", "4", "--sweeps", "300", "-o", str(output))
        assert code == 0
        assert printed is None
        report = json.loads(output.read_text(encoding="utf-8"))
        assert report["config"]["metric"] == "inv-euclid"
        assert report["config"]["standardize"] == "row"
        assert len(report["solver"]["energy_trace"]) == 4
        sizes = report["clusters"]["sizes"]
        assert sum(sizes) + report["clusters"]["outlier_count"] == 8
        assert set(report["clusters"]["rmse"]) == {"0", "1"}

    def test_reports_reproducible(self, capsys, config_path, labelled_csv, tmp_path):
        output = tmp_path / "run.json"
        argv = ["cluster", str(labelled_csv), "--k", "2", "--seed", "3",
                "--restarts", "3", "--sweeps", "200", "-o", str(output)]
        documents = []
        for threads in ("1", "3"):
            assert _run(capsys, config_path, *argv, "--threads", threads)[0] == 0
            documents.append(json.loads(output.read_text(encoding="utf-8")))
        first, second = (_without_timestamp(d) for d in documents)
        first["config"].pop("threads")
        second["config"].pop("threads")
        first.pop("report_digest")
        second.pop("report_digest")
        assert first == second

    def test_external_solution(self, capsys, config_path, labelled_csv, tmp_path):
        solution = tmp_path / "bits.txt"
        solution.write_text("11110000\n00001111\n", encoding="utf-8")
        code, report = _run(capsys, config_path, "cluster", str(labelled_csv), "--labels",
                            "--k", "2", "--solution", str(solution))
        assert code == 0
        assert report["solver"]["solver"] == "external"
        assert report["assignment"]["cluster_of"] == [0, 0, 0, 0, 1, 1, 1, 1]
        assert report["clusters"]["energy"]["onehot_penalty"] == 0.0

    def test_means_csv_skips_empty_clusters(self, capsys, config_path, labelled_csv, tmp_path):
        solution = tmp_path / "bits.txt"
        solution.write_text("11110000" + "00000000" + "00001111", encoding="utf-8")
        means = tmp_path / "means.csv"
        code, _ = _run(capsys, config_path, "cluster", str(labelled_csv), "--labels", "--k", "3",
                       "--solution", str(solution), "--dump-means", str(means))
        assert code == 0
        table = pd.read_csv(means)
        assert table["cluster"].tolist() == [0, 2]
        assert table.shape == (2, 17)
        assert not table.isna().any().any()

    def test_bad_solution_length(self, capsys, config_path, labelled_csv, tmp_path):
        solution = tmp_path / "bits.txt"
        solution.write_text("0101", encoding="utf-8")
        code, error = _run(capsys, config_path, "cluster", str(labelled_csv), "--k", "2",
                           "--solution", str(solution))
        assert code == 2
        assert error["error"]["type"] == "InputError"


class TestErrors:
    def test_missing_input(self, capsys, config_path, tmp_path):
        code, error = _run(capsys, config_path, "cluster", str(tmp_path / "nope.csv"), "--k", "2")
        assert code == 2
        assert error["error"]["type"] == "FileNotFoundError"
        assert error["error"]["details"]["path"] == str(tmp_path / "nope.csv")

    def test_missing_solution_names_that_file(self, capsys, config_path, labelled_csv, tmp_path):
        missing = tmp_path / "bits.txt"
        code, error = _run(capsys, config_path, "cluster", str(labelled_csv), "--labels",
                           "--k", "2", "--solution", str(missing))
        assert code == 2
        assert error["error"]["details"]["path"] == str(missing)

    def test_k_larger_than_n(self, capsys, config_path, labelled_csv):
        code, error = _run(capsys, config_path, "cluster", str(labelled_csv), "--labels", "--k", "9")
        assert code == 2
        assert error["error"]["type"] == "ConfigError"

    def test_ragged_csv(self, capsys, config_path, write_text):
        path = write_text("ragged.csv", "1,2,3\n4,5\n")
        code, error = _run(capsys, config_path, "cluster", str(path), "--k", "2")
        assert code == 2
        assert error["error"]["type"] == "DataFormatError"

    def test_brute_force_too_large(self, capsys, config_path, labelled_csv):
        code, error = _run(capsys, config_path, "cluster", str(labelled_csv), "--labels",
                           "--k", "4", "--solver", "brute-force")
        assert code == 1
        assert error["error"]["type"] == "SolverError"


def test_qubo_export(capsys, config_path, labelled_csv, tmp_path):
    output = tmp_path / "model.json"
    code, summary = _run(capsys, config_path, "qubo-export", str(labelled_csv), "--labels",
                         "--k", "2", "--lambda1", "50", "--lambda2", "0.5", "-o", str(output))
    assert code == 0
    assert summary["n_vars"] == 16
    model = load_json(output)
    assert (model.n, model.k, model.lambda1, model.lambda2) == (8, 2, 50.0, 0.5)


@pytest.mark.slow
def test_synth_cluster_baseline_eval(capsys, config_path, tmp_path):
    frames = tmp_path / "frames.fsk"
    phases = tmp_path / "phases.csv"
    code, summary = _run(capsys, config_path, "synth", str(frames), "--n-frames", "30",
                         "--height", "8", "--width", "8", "--seed", "2", "--phases", str(phases))
    assert code == 0
    assert summary["frame_shape"] == [8, 8]
    assert phases.exists()

    qubo, kmeans = tmp_path / "qubo.json", tmp_path / "kmeans.json"
    means = tmp_path / "means.fsk"
    assert _run(capsys, config_path, "cluster", str(frames), "--k", "3", "--restarts", "2",
                "--sweeps", "500", "--dump-means", str(means), "-o", str(qubo))[0] == 0
    assert _run(capsys, config_path, "baseline", str(frames), "--k", "3", "-o", str(kmeans))[0] == 0

    report = json.loads(qubo.read_text(encoding="utf-8"))
    assert report["config"]["metric"] == "cosine"
    assert report["config"]["svd_rank"] == 5
    assert len(report["clusters"]["mds"]) == 30
    assert means.exists()

    code, comparison = _run(capsys, config_path, "eval", str(qubo), str(kmeans))
    assert code == 0
    assert comparison["kinds"] == {"a": "qubo", "b": "kmeans"}
    assert comparison["dataset_digest"] == report["dataset_digest"]


def test_eval_rejects_different_datasets(capsys, config_path, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps({"dataset_digest": "one", "clusters": {}}), encoding="utf-8")
    b.write_text(json.dumps({"dataset_digest": "two", "clusters": {}}), encoding="utf-8")
    code, error = _run(capsys, config_path, "eval", str(a), str(b))
    assert code == 2
    assert error["error"]["type"] == "DigestMismatchError"


def test_mds_separates_classes(capsys, config_path, labelled_csv, tmp_path):
    dump = tmp_path / "mds.csv"
    code, document = _run(capsys, config_path, "mds", str(labelled_csv), "--labels",
                          "--dump-mds", str(dump))
    assert code == 0
    assert document["kind"] == "mds"
    coords = np.asarray(document["mds"])
    assert coords.shape == (8, 2)
    # sines and cosines sit a quarter turn apart
    centroid_gap = np.linalg.norm(coords[:4].mean(axis=0) - coords[4:].mean(axis=0))
    spread = max(np.linalg.norm(coords[:4] - coords[:4].mean(axis=0), axis=1).max(),
                 np.linalg.norm(coords[4:] - coords[4:].mean(axis=0), axis=1).max())
    assert centroid_gap > 5 * spread
    assert dump.exists()
