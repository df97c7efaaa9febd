import json

import numpy as np
import pytest

from paritybench import LogicalProblem, build_embedding, embed, encode, write_instance
from paritybench.cli import RunConfig, main
from paritybench.experiments import read_table


@pytest.fixture
def inst(tmp_path):
    path = tmp_path / "i.json"
    assert main(["gen", "--n", "6", "--seed", "3", "--out", str(path)]) == 0
    assert main(["solve", str(path)]) == 0
    return path


def test_gen_reports_sizes(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["gen", "--n", "14", "--range", "0.25", "--seed", "1", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "slhz k=91" in text and "me k=70" in text
    assert len(json.loads(out.read_text())["couplings"]) == 91


def test_gen_rejects_n1(tmp_path, capsys):
    assert main(["gen", "--n", "1", "--out", str(tmp_path / "x.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_gen_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        main(["gen", "--n", "9", "--seed", "4", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_gen_unwritable_path_exits_1(tmp_path):
    assert main(["gen", "--n", "4", "--out", str(tmp_path / "no" / "dir.json")]) == 1


def test_solve_ferromagnet_n2(tmp_path, capsys):
    path = tmp_path / "f.json"
    write_instance(LogicalProblem.from_couplings(2, {(1, 2): 0.5}), path)
    assert main(["solve", str(path)]) == 0
    text = capsys.readouterr().out
    assert "energy -0.5" in text and "states 2" in text
    first = (tmp_path / "f.json.truth.json").read_bytes()
    main(["solve", str(path)])
    assert (tmp_path / "f.json.truth.json").read_bytes() == first


def test_solve_cap(tmp_path, capsys):
    path = tmp_path / "big.json"
    main(["gen", "--n", "25", "--out", str(path)])
    assert main(["solve", str(path)]) == 2
    assert "enumeration cap" in capsys.readouterr().err


def test_run_without_sidecar_exits_1(tmp_path):
    path = tmp_path / "i.json"
    main(["gen", "--n", "5", "--out", str(path)])
    rc = main(["run", "--instance", str(path), "--scheme", "logical", "--arm", "a",
               "--samples", "8", "--reps", "4"])
    assert rc == 1


def test_mismatched_sidecar_rejected(inst, tmp_path):
    other = tmp_path / "o.json"
    main(["gen", "--n", "6", "--seed", "99", "--out", str(other)])
    rc = main(["run", "--instance", str(other), "--truth", str(inst) + ".truth.json",
               "--scheme", "logical", "--arm", "a", "--samples", "8", "--reps", "4"])
    assert rc == 1


def test_run_logical_arm_c_exits_2(inst):
    rc = main(["run", "--instance", str(inst), "--scheme", "logical", "--arm", "c",
               "--beta", "1", "--gamma", "1", "--samples", "8", "--reps", "4"])
    assert rc == 2


def test_run_zero_success_exits_0(tmp_path):
    path = tmp_path / "i.json"
    main(["gen", "--n", "12", "--seed", "2", "--out", str(path)])
    main(["solve", str(path)])
    out = tmp_path / "c.tsv"
    rc = main(["run", "--instance", str(path), "--scheme", "slhz", "--arm", "a",
               "--samples", "4", "--reps", "10", "--out", str(out)])
    assert rc == 0
    _, rows = read_table(out.open())
    assert float(rows[-1]["success"]) == 0.0


def test_run_table_and_header_round_trip(inst, tmp_path):
    out = tmp_path / "c.tsv"
    argv = ["run", "--instance", str(inst), "--scheme", "slhz", "--arm", "c", "--beta", "8",
            "--gamma", "1", "--samples", "64", "--reps", "20", "--seed", "7", "--out", str(out)]
    assert main(argv) == 0
    meta, rows = read_table(out.open())
    assert [int(r["M"]) for r in rows] == [1, 2, 4, 8, 16, 32, 64]
    cfg = RunConfig.from_header(meta)
    assert cfg.scheme == "slhz" and cfg.beta == 8.0 and cfg.reps == 20
    again = tmp_path / "again.tsv"
    cfg.out = str(again)
    assert main(cfg.to_argv()) == 0
    # the reproduced table differs only in the echoed output path
    a = out.read_text().replace(str(out), "OUT")
    b = again.read_text().replace(str(again), "OUT")
    assert a == b


def test_sweep_one_cell_equals_run(inst, tmp_path):
    run_out, sweep_out = tmp_path / "r.tsv", tmp_path / "s.tsv"
    common = ["--instance", str(inst), "--scheme", "me", "--arm", "b", "--samples", "32",
              "--reps", "30", "--seed", "5"]
    main(["run", *common, "--beta", "4", "--gamma", "2", "--out", str(run_out)])
    main(["sweep", *common, "--betas", "4", "--gammas", "2", "--out", str(sweep_out)])
    _, run_rows = read_table(run_out.open())
    meta, sweep_rows = read_table(sweep_out.open())
    assert len(sweep_rows) == 1
    assert sweep_rows[0]["success"] == run_rows[-1]["success"]
    assert meta["argmax"] == {"beta": 4.0, "gamma": 2.0}


def test_sweep_grid_and_header(inst, tmp_path):
    out = tmp_path / "s.tsv"
    rc = main(["sweep", "--instance", str(inst), "--scheme", "slhz3", "--arm", "c",
               "--betas", "1,4", "--gammas", "0.5,2,8", "--samples", "16", "--reps", "10",
               "--out", str(out)])
    assert rc == 0
    meta, rows = read_table(out.open())
    assert len(rows) == 6
    assert RunConfig.from_header(meta).betas == [1.0, 4.0]


def test_sweep_rejects_arm_a(inst):
    rc = main(["sweep", "--instance", str(inst), "--scheme", "slhz", "--arm", "a",
               "--betas", "1", "--gammas", "1", "--samples", "8", "--reps", "2"])
    assert rc == 2


def test_run_identical_across_thread_counts(inst, tmp_path):
    outs = []
    for threads in ("1", "8"):
        out = tmp_path / "t.tsv"
        main(["run", "--instance", str(inst), "--scheme", "me", "--arm", "c", "--beta", "4",
              "--gamma", "1", "--samples", "128", "--reps", "40", "--seed", "3",
              "--threads", threads, "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_decode_slhz(tmp_path, capsys):
    Z = np.array([1, -1, -1, 1, 1, -1], dtype=np.int8)
    r = encode(Z)
    r[2] = -r[2]
    f = tmp_path / "r.txt"
    f.write_text(" ".join(map(str, r)) + "\n# comment\n" + " ".join(map(str, encode(-Z))) + "\n")
    assert main(["decode", "--scheme", "slhz", "--n", "6", "--readout", str(f)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "line\tlogical\tconverged\titerations"
    assert lines[1].split("\t")[1:] == ["1 -1 -1 1 1 -1", "1", "1"]
    assert lines[2].split("\t")[1:] == ["1 -1 -1 1 1 -1", "1", "0"]


def test_decode_me(tmp_path, capsys):
    e = build_embedding(5)
    Z = np.array([1, 1, -1, 1, -1], dtype=np.int8)
    f = tmp_path / "r.txt"
    f.write_text(",".join(map(str, embed(Z, e))) + "\n")
    assert main(["decode", "--scheme", "me", "--n", "5", "--readout", str(f)]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "0\t1 1 -1 1 -1"


def test_decode_bad_file(tmp_path):
    f = tmp_path / "r.txt"
    f.write_text("1 x -1\n")
    assert main(["decode", "--scheme", "slhz", "--n", "3", "--readout", str(f)]) == 1
