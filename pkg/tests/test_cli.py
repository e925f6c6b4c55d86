import io
import json

import pytest

from abelian_info import __version__, cli
from abelian_info.errors import ConsistencyError


def run(argv):
    out = io.StringIO()
    code = cli.run(argv, stdout=out)
    return code, out.getvalue()


def run_json(argv):
    code, text = run(argv)
    assert code == 0, text
    return json.loads(text)


@pytest.fixture
def bsc01(tmp_path):
    path = tmp_path / "bsc01.json"
    path.write_text(json.dumps({"rows": [[0.9, 0.1], [0.1, 0.9]]}))
    return path


@pytest.fixture
def dyadic_code(tmp_path):
    path = tmp_path / "code.json"
    path.write_text(json.dumps({"code_dim": 2, "codewords": ["0", "10", "110", "111"]}))
    return path


def test_entropy():
    report = run_json(["entropy", "--probs", "0.5,0.5"])
    assert report["entropy_bits"] == 1.0
    assert report["meta"]["tool"] == "abelian-info"
    assert report["meta"]["version"] == __version__
    assert report["meta"]["command"] == "entropy"
    assert report["meta"]["seed"] == 0


def test_entropy_renormalize():
    code, _ = run(["entropy", "--probs", "1,1"])
    assert code == 2
    report = run_json(["entropy", "--probs", "1,1", "--renormalize"])
    assert report["entropy_bits"] == 1.0


def test_invalid_input_exits_2(capsys):
    code, out = run(["entropy", "--probs", "0.5,abc"])
    assert code == 2
    assert out == ""
    assert capsys.readouterr().err.startswith("error: ")


def test_computation_failure_exits_1(monkeypatch, capsys):
    def broken(omega):
        raise ConsistencyError("cross-check failed")

    monkeypatch.setattr(cli, "shannon_entropy", broken)
    code, _ = run(["entropy", "--probs", "0.5,0.5"])
    assert code == 1
    assert "cross-check failed" in capsys.readouterr().err


def test_usage_errors_exit_2():
    assert run(["no-such-command"])[0] == 2
    assert run(["entropy"])[0] == 2


def test_version(capsys):
    assert run(["--version"])[0] == 0
    assert __version__ in capsys.readouterr().out


def test_kraft():
    report = run_json(["kraft", "--base", "2", "--lengths", "1,2,3,3"])
    assert report["holds"] is True
    assert report["slack"] == 0


def test_channel_info(bsc01):
    report = run_json(["channel", "info", "--matrix", str(bsc01), "--input-probs", "0.5,0.5"])
    assert report["mutual_information"] == pytest.approx(0.531004, abs=1e-6)
    assert report["useless"] is False
    assert report["lossless"] is False
    assert report["lossless_partition"] is None
    assert report["meta"]["command"] == "channel info"


def test_channel_capacity():
    report = run_json(["channel", "capacity", "--bsc", "0.1"])
    assert report["capacity"] == pytest.approx(0.531004, abs=1e-6)


def test_channel_without_matrix_is_rejected():
    assert run(["channel", "info", "--input-probs", "0.5,0.5"])[0] == 2


def test_code_sim_and_zk():
    report = run_json(["channel", "code-sim", "--bsc", "0.05", "--rate", "0.4", "--k", "4,8",
                       "--trials", "3", "--seed", "7"])
    assert [s["codebook_size"] for s in report["summaries"]] == [4, 10]
    assert len(report["trials"]) == 6
    assert report["meta"]["seed"] == 7
    report = run_json(["channel", "zk", "--bsc", "0.05", "--rate", "0.4", "--k", "8", "--eps", "0.1"])
    assert report["holds"] is True
    assert report["bound"] == pytest.approx(2 ** -0.8)


def test_rate_too_high():
    code, _ = run(["channel", "code-sim", "--bsc", "0.1", "--rate", "2", "--k", "3"])
    assert code == 2


def test_global_options_before_subcommand():
    report = run_json(["--seed", "9", "channel", "code-sim", "--bsc", "0.1", "--rate", "0.5", "--k", "4"])
    assert report["meta"]["seed"] == 9
    assert report["trials"][0]["seed"] == 9


def test_budget_flag():
    code, _ = run(["aep", "--probs", "0.3,0.7", "--n", "16", "--eps", "0.1", "--method", "enumerate",
                   "--budget", "10"])
    assert code == 2
    report = run_json(["aep", "--probs", "0.3,0.7", "--n", "16", "--eps", "0.1", "--method", "enumerate"])
    assert report["method"] == "enumerate"


def test_aep_csv():
    code, text = run(["aep", "--probs", "0.3,0.7", "--n", "25,50,100,200", "--eps", "0.1", "--format", "csv"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("n,eps,entropy,prob_mass")
    assert len(lines) == 5
    assert [line.split(",")[0] for line in lines[1:]] == ["25", "50", "100", "200"]


def test_aep_lenient():
    report = run_json(["aep", "--probs", "1,0", "--n", "10", "--eps", "0.1", "--lenient"])
    assert report["count"] == 1
    assert report["dropped_symbols"] == [1]
    assert run(["aep", "--probs", "1,0", "--n", "10", "--eps", "0.1"])[0] == 2


def test_cdf():
    report = run_json(["cdf", "--probs", "0.25,0.25,0.5", "--values", "2,2,5", "--t", "2"])
    assert report["cdf"] == 0.5
    assert report["strict"] == 0
    assert report["jump_points"] == [2.0, 5.0]


def test_binomial_and_waiting():
    assert run_json(["binomial", "--n", "4", "--k", "2", "--p", "0.3"])["cdf"] == pytest.approx(0.9163)
    assert run_json(["waiting", "--pattern", "1", "--t", "3"])["cdf"] == pytest.approx(0.9375)


def test_waiting_for_single_symbol_runs_long():
    report = run_json(["waiting", "--pattern", "1", "--t", "60"])
    assert report["cdf"] == pytest.approx(1 - 2.0 ** -61)


def test_ragged_matrices_exit_2(tmp_path, capsys):
    path = tmp_path / "ragged.json"
    path.write_text(json.dumps({"rows": [[0.9, 0.1], [0.5]]}))
    assert run(["channel", "info", "--matrix", str(path)])[0] == 2
    assert capsys.readouterr().err.startswith("error: ")
    path.write_text(json.dumps({"rows": [[0.75, 0.25], [0.5]], "initial": [0.4, 0.6]}))
    assert run(["markov", "--file", str(path), "--path", "01"])[0] == 2
    assert capsys.readouterr().err.startswith("error: ")


def test_markov(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({"rows": [[0.75, 0.25], [0.25, 0.75]], "initial": [0.4, 0.6]}))
    report = run_json(["markov", "--file", str(path), "--path", "01"])
    assert report["path_probability"] == pytest.approx(0.15)
    assert report["closed_form"] == pytest.approx(0.15)
    path.write_text(json.dumps({"rows": [[0.75, 0.25], [0.5, 0.6]]}))
    assert run(["markov", "--file", str(path), "--path", "01"])[0] == 2


def test_code_commands(dyadic_code):
    report = run_json(["code", "check", "--code", str(dyadic_code), "--probs", "0.5,0.25,0.125,0.125"])
    assert report["prefix_free"] is True
    assert report["kraft_slack"] == 0
    assert report["avg_len"] == pytest.approx(1.75)
    assert report["noiseless_holds"] is True
    assert run_json(["code", "encode", "--code", str(dyadic_code), "--symbols", "0,3,1"])["encoded"] == "011110"
    assert run_json(["code", "decode", "--code", str(dyadic_code), "--stream", "011110"])["decoded"] == [0, 3, 1]
    assert run(["code", "decode", "--code", str(dyadic_code), "--stream", "0111100"])[0] == 0
    assert run(["code", "decode", "--code", str(dyadic_code), "--stream", "01"])[0] == 2


def test_missing_file_exits_2(tmp_path):
    assert run(["code", "check", "--code", str(tmp_path / "missing.json")])[0] == 2


def test_independence():
    report = run_json(["independence", "--probs", "0.25,0.25,0.25,0.25", "--dims", "2,2"])
    assert report["independent"] is True
    report = run_json(["independence", "--probs", "0.5,0,0,0.5", "--dims", "2,2"])
    assert report["independent"] is False
    assert report["defect"] == pytest.approx(0.25)
    assert report["marginals"] == [[0.5, 0.5], [0.5, 0.5]]
    assert run(["independence", "--probs", "0.5,0.5", "--dims", "2,2"])[0] == 2
