import json

import numpy as np
import pytest

from stabjgl.cli import main, parse_grid
from stabjgl.core import EdgeSet
from stabjgl.fileio import (InputFormatError, read_edge_sets, read_edge_table, read_json,
                            read_matrix_csv, write_estimated_edges, write_matrix_csv,
                            write_truth_edges)

SIM = ["simulate", "--p", "15", "--k", "2", "--n", "50,70", "--sparsity", "0.12",
       "--similarity", "1.0", "--seed", "7"]
FAST = ["--nsample", "4", "--lambda1-grid", "0.1:0.6:4", "--lambda2-grid", "0:0.1:3", "--seed", "3"]


def test_parse_grid():
    g = parse_grid("0.01:1:20")
    assert len(g) == 20 and g[0] == 0.01 and g[-1] == 1.0
    assert parse_grid("0:0.1:3") == (0.0, 0.05, 0.1)
    assert parse_grid("0.5:0.5:1") == (0.5,)


@pytest.mark.parametrize("bad", ["1:2", "a:1:3", "0:1:0", "1:0:3"])
def test_parse_grid_rejects(bad):
    import argparse
    with pytest.raises(argparse.ArgumentTypeError):
        parse_grid(bad)


def test_matrix_csv_roundtrip(tmp_path):
    m = np.random.default_rng(0).normal(size=(4, 3))
    write_matrix_csv(tmp_path / "a.csv", m, ["x", "y", "z"])
    back, names = read_matrix_csv(tmp_path / "a.csv")
    np.testing.assert_array_equal(back, m)
    assert names == ["x", "y", "z"]
    write_matrix_csv(tmp_path / "b.csv", m)
    back, names = read_matrix_csv(tmp_path / "b.csv")
    np.testing.assert_array_equal(back, m)
    assert names is None


def test_matrix_csv_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n3\n")
    with pytest.raises(InputFormatError) as info:
        read_matrix_csv(tmp_path / "bad.csv")
    assert info.value.line == 3
    (tmp_path / "nan.csv").write_text("1,2\n3,x\n")
    with pytest.raises(InputFormatError):
        read_matrix_csv(tmp_path / "nan.csv")


def test_edge_list_roundtrip(tmp_path):
    es = [EdgeSet(6, frozenset({(0, 1), (2, 5)})), EdgeSet(6, frozenset({(3, 4)}))]
    write_truth_edges(tmp_path / "t.tsv", es)
    assert read_edge_sets(tmp_path / "t.tsv") == es
    theta = np.eye(6)
    theta[0, 1] = theta[1, 0] = -0.25
    theta[2, 5] = theta[5, 2] = 0.125
    pc = -theta.copy()
    write_estimated_edges(tmp_path / "e.tsv", es[0], theta, pc)
    table = read_edge_table(tmp_path / "e.tsv")
    assert table["p"] == 6
    assert [r["theta_ij"] for r in table["rows"]] == [-0.25, 0.125]
    assert read_edge_sets(tmp_path / "e.tsv") == [es[0]]


def test_edge_list_line_numbered_errors(tmp_path):
    f = tmp_path / "bad.tsv"
    f.write_text("# p=4\ni\tj\tgroup\n1\t2\t1\n3\tx\t1\n")
    with pytest.raises(InputFormatError) as info:
        read_edge_table(f)
    assert info.value.line == 4 and ":4:" in str(info.value)
    f.write_text("# p=4\ni\tj\n1\t9\n")
    with pytest.raises(InputFormatError):
        read_edge_table(f)
    f.write_text("i\tj\n2\t2\n")
    with pytest.raises(InputFormatError):
        read_edge_table(f)


@pytest.fixture(scope="module")
def pipeline_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(SIM + ["--out", str(root / "sim")]) == 0
    inputs = f"{root / 'sim' / 'data_group1.csv'},{root / 'sim' / 'data_group2.csv'}"
    assert main(["infer", "--inputs", inputs, *FAST, "--out", str(root / "res")]) == 0
    return root, inputs


def test_simulate_outputs(pipeline_dirs):
    root, _ = pipeline_dirs
    sim = root / "sim"
    man = read_json(sim / "manifest.json")
    assert man["measured_similarity"] == 1.0 and man["seed"] == 7
    for k, n in ((1, 50), (2, 70)):
        m, names = read_matrix_csv(sim / f"data_group{k}.csv")
        assert m.shape == (n, 15) and names[0] == "V1"
        prec, _ = read_matrix_csv(sim / f"precision_group{k}.csv")
        assert prec.shape == (15, 15)
    truth = read_edge_sets(sim / "truth_edges.tsv")
    assert len(truth) == 2 and all(len(t) == round(0.12 * 105) for t in truth)


def test_simulate_byte_identical(tmp_path):
    main(SIM + ["--out", str(tmp_path / "a")])
    main(SIM + ["--out", str(tmp_path / "b")])
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_infer_outputs(pipeline_dirs):
    root, _ = pipeline_dirs
    res = read_json(root / "res" / "result.json")
    assert res["K"] == 2 and res["p"] == 15
    assert res["lambda1"] in parse_grid("0.1:0.6:4")
    assert res["lambda2"] in parse_grid("0:0.1:3")
    assert len(res["variability"]) == 4 and len(res["ebic"]) == 3
    assert set(res["timings"]) == {"covariance", "lambda1", "lambda2", "final"}
    assert res["config"]["stability"]["beta1"] == 0.1 and res["seed"] == 3
    for k in (1, 2):
        es = read_edge_sets(root / "res" / f"edges_group{k}.tsv")[0]
        assert len(es) == res["n_edges"][k - 1]


def test_infer_thread_count_does_not_change_results(pipeline_dirs, tmp_path):
    root, inputs = pipeline_dirs
    assert main(["infer", "--inputs", inputs, *FAST, "--threads", "2",
                 "--out", str(tmp_path / "r2")]) == 0
    a = read_json(root / "res" / "result.json")
    b = read_json(tmp_path / "r2" / "result.json")
    a.pop("timings"), b.pop("timings")
    assert a == b
    for k in (1, 2):
        assert ((root / "res" / f"edges_group{k}.tsv").read_bytes()
                == (tmp_path / "r2" / f"edges_group{k}.tsv").read_bytes())


def test_infer_single_group(pipeline_dirs, tmp_path):
    root, _ = pipeline_dirs
    assert main(["infer", "--inputs", str(root / "sim" / "data_group1.csv"), *FAST,
                 "--out", str(tmp_path)]) == 0
    assert read_json(tmp_path / "result.json")["K"] == 1


def test_infer_column_mismatch_exit_code(tmp_path, capsys):
    write_matrix_csv(tmp_path / "a.csv", np.random.default_rng(0).normal(size=(10, 3)))
    write_matrix_csv(tmp_path / "b.csv", np.random.default_rng(1).normal(size=(10, 4)))
    code = main(["infer", "--inputs", f"{tmp_path / 'a.csv'},{tmp_path / 'b.csv'}",
                 "--out", str(tmp_path / "o")])
    assert code == 2
    assert "column count mismatch" in capsys.readouterr().err


def test_infer_solver_stage_exit_code(tmp_path, capsys):
    # constant column in a subsample -> the lambda1 stage aborts
    x = np.random.default_rng(0).normal(size=(10, 3))
    x[:, 2] = 0.0
    x[0, 2] = 1.0
    write_matrix_csv(tmp_path / "a.csv", x)
    code = main(["infer", "--inputs", str(tmp_path / "a.csv"), "--nsample", "10",
                 "--subsample-cap", "0.2", "--seed", "3", "--lambda1-grid", "0.1:0.5:2",
                 "--out", str(tmp_path / "o")])
    assert code == 3
    assert "lambda1" in capsys.readouterr().err


def test_unwritable_output_fails_before_compute(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(SIM + ["--out", str(blocker / "sub")]) == 2


def test_evaluate_perfect_and_empty(pipeline_dirs, tmp_path):
    root, _ = pipeline_dirs
    truth = read_edge_sets(root / "sim" / "truth_edges.tsv")
    theta = np.eye(15)
    for k, t in enumerate(truth, start=1):
        write_estimated_edges(tmp_path / f"g{k}.tsv", t, theta, theta)
    out = tmp_path / "m.json"
    assert main(["evaluate", "--estimates", f"{tmp_path / 'g1.tsv'},{tmp_path / 'g2.tsv'}",
                 "--truth", str(root / "sim" / "truth_edges.tsv"), "--out", str(out)]) == 0
    m = json.loads(out.read_text())
    assert all(g["precision"] == 1.0 and g["recall"] == 1.0 for g in m["groups"])
    assert m["pairwise_mcc"] == [[1.0, 1.0], [1.0, 1.0]]

    write_estimated_edges(tmp_path / "empty.tsv", EdgeSet(15, frozenset()), theta, theta)
    assert main(["evaluate", "--estimates", f"{tmp_path / 'empty.tsv'},{tmp_path / 'g2.tsv'}",
                 "--truth", str(root / "sim" / "truth_edges.tsv"), "--out", str(out)]) == 0
    m = json.loads(out.read_text())
    assert m["groups"][0]["precision"] is None and m["groups"][0]["recall"] == 0.0
    assert '"precision": null' in out.read_text()


def test_evaluate_three_identical_groups(tmp_path):
    e = EdgeSet(5, frozenset({(0, 1), (1, 2)}))
    write_truth_edges(tmp_path / "t.tsv", [e, e, e])
    for k in range(3):
        write_estimated_edges(tmp_path / f"e{k}.tsv", e, np.eye(5), np.eye(5))
    files = ",".join(str(tmp_path / f"e{k}.tsv") for k in range(3))
    assert main(["evaluate", "--estimates", files, "--truth", str(tmp_path / "t.tsv"),
                 "--out", str(tmp_path / "m.json")]) == 0
    m = read_json(tmp_path / "m.json")
    assert np.allclose(m["pairwise_mcc"], 1.0)


def test_evaluate_malformed_edge_list(tmp_path, capsys):
    (tmp_path / "bad.tsv").write_text("# p=5\ni\tj\n1\t2\n1\n")
    write_truth_edges(tmp_path / "t.tsv", [EdgeSet(5, frozenset())])
    code = main(["evaluate", "--estimates", str(tmp_path / "bad.tsv"),
                 "--truth", str(tmp_path / "t.tsv"), "--out", str(tmp_path / "m.json")])
    assert code == 2
    assert "bad.tsv:4" in capsys.readouterr().err
