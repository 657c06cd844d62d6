import json

import pytest

from memsat.cli import main
from memsat.cnf import parse_dimacs, serialize_dimacs


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_json(out):
    return json.loads(out)


class TestGenerate:
    def test_writes_dimacs_and_sidecar(self, tmp_path, capsys):
        cnf = tmp_path / "x.cnf"
        code, out, err = run_cli(
            capsys, "generate", "-N", "10", "-r", "4.3", "--seed", "7", "-o", str(cnf)
        )
        assert code == 0
        inst = parse_dimacs(cnf.read_text())
        assert inst.num_vars == 10 and inst.num_clauses == 43
        sidecar = json.loads((tmp_path / "x.cnf.json").read_text())
        assert sidecar["config"]["seed"] == 7
        assert sidecar["config"]["p0"] == 0.08
        assert len(sidecar["planted"]) == 10
        assert sidecar["instance_digest"] == inst.digest
        stdout = read_json(out)
        assert stdout == sidecar

    def test_planted_sidecar_satisfies_instance(self, tmp_path, capsys):
        cnf = tmp_path / "y.cnf"
        run_cli(capsys, "generate", "-N", "12", "-r", "7", "--seed", "3", "-o", str(cnf))
        from memsat.cnf import evaluate

        inst = parse_dimacs(cnf.read_text())
        sidecar = json.loads((tmp_path / "y.cnf.json").read_text())
        assert evaluate(inst, [bool(b) for b in sidecar["planted"]])

    def test_p0_flag_respected(self, tmp_path, capsys):
        cnf = tmp_path / "p.cnf"
        code, out, _ = run_cli(capsys, "generate", "-N", "10", "-r", "4.3",
                               "--p0", "0.1", "--seed", "1", "-o", str(cnf))
        assert code == 0
        assert read_json(out)["config"]["p0"] == 0.1

    def test_bad_config_exits_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "generate", "-N", "10", "-r", "4.3", "--p0", "0.5",
            "-o", str(tmp_path / "z.cnf"),
        )
        assert code == 2
        assert "error" in err


@pytest.fixture
def planted_cnf(tmp_path, capsys):
    cnf = tmp_path / "inst.cnf"
    run_cli(capsys, "generate", "-N", "10", "-r", "4.3", "--seed", "7", "-o", str(cnf))
    capsys.readouterr()
    return cnf


@pytest.fixture
def unsat_cnf(tmp_path, unsat_toy):
    path = tmp_path / "unsat.cnf"
    path.write_text(serialize_dimacs(unsat_toy))
    return path


class TestSolve:
    def test_sat_exit_zero_and_record(self, planted_cnf, capsys):
        code, out, err = run_cli(capsys, "solve", str(planted_cnf), "--seed", "1",
                                 "--max-steps", "200000")
        assert code == 0
        payload = read_json(out)
        assert payload["record"]["outcome"] == "SAT"
        assert payload["config"]["params"]["zeta"] == 0.001
        assert payload["config"]["params"]["xl_max"] == 430_000.0
        assert payload["config"]["params"]["dt"] == 2.0**-5
        assert payload["config"]["seed"] == 1

    def test_budget_exhausted_exit_one(self, unsat_cnf, capsys):
        code, out, _ = run_cli(capsys, "solve", str(unsat_cnf), "--max-steps", "500")
        assert code == 1
        assert read_json(out)["record"]["outcome"] == "budget_exhausted"

    def test_replay_from_resolved_config(self, planted_cnf, capsys):
        code, out, _ = run_cli(capsys, "solve", str(planted_cnf), "--seed", "5",
                               "--max-steps", "200000")
        payload = read_json(out)
        cfg = payload["config"]
        argv = [
            "solve", cfg["cnf"],
            "--seed", str(cfg["seed"]),
            "--max-steps", str(cfg["max_steps"]),
            "--check-every", str(cfg["check_every"]),
            "--precision", cfg["precision"],
            "--engine", cfg["engine"],
            "--dt", repr(cfg["params"]["dt"]),
            "--alpha", repr(cfg["params"]["alpha"]),
            "--beta", repr(cfg["params"]["beta"]),
            "--gamma", repr(cfg["params"]["gamma"]),
            "--delta", repr(cfg["params"]["delta"]),
            "--epsilon", repr(cfg["params"]["epsilon"]),
            "--zeta", repr(cfg["params"]["zeta"]),
            "--rigidity-ties", cfg["params"]["rigidity_ties"],
        ]
        code2, out2, _ = run_cli(capsys, *argv)
        replay = read_json(out2)
        a, b = payload["record"], replay["record"]
        a.pop("wall_time"), b.pop("wall_time")
        assert a == b

    def test_hw_engine_record_has_cycles(self, planted_cnf, capsys):
        code, out, _ = run_cli(capsys, "solve", str(planted_cnf), "--engine", "hw",
                               "--seed", "2", "--max-steps", "200000")
        assert code == 0
        rec = read_json(out)["record"]
        assert rec["outcome"] == "SAT"
        assert rec["cycles"] == rec["steps"] * 44
        assert "saturation" in rec

    def test_hw_engine_bits_flags(self, planted_cnf, capsys):
        code, out, _ = run_cli(capsys, "solve", str(planted_cnf), "--engine", "hw",
                               "--int-bits", "11", "--frac-bits", "24",
                               "--seed", "2", "--max-steps", "200000")
        assert code == 0
        cfg = read_json(out)["config"]
        assert cfg["int_bits"] == 11 and cfg["frac_bits"] == 24

    def test_trace_csv_written(self, planted_cnf, tmp_path, capsys):
        trace = tmp_path / "trace.csv"
        code, out, _ = run_cli(capsys, "solve", str(planted_cnf), "--seed", "1",
                               "--max-steps", "200000", "--trace", str(trace),
                               "--trace-every", "5")
        assert code == 0
        lines = trace.read_text().strip().split("\n")
        assert lines[0] == "t,unsat_clauses,max_clause_value,max_xl"
        steps = read_json(out)["record"]["steps"]
        import math

        assert len(lines) - 1 == math.ceil(steps / 5)
        last = lines[-1].split(",")
        assert int(last[0]) == steps
        assert int(last[1]) == 0  # SAT run ends with no unsatisfied clauses

    def test_trace_rejected_for_hw_engine(self, planted_cnf, tmp_path, capsys):
        code, _, err = run_cli(capsys, "solve", str(planted_cnf), "--engine", "hw",
                               "--trace", str(tmp_path / "t.csv"))
        assert code == 2

    def test_backend_flag_gives_identical_record(self, planted_cnf, capsys):
        _, out_a, _ = run_cli(capsys, "solve", str(planted_cnf), "--seed", "4",
                              "--max-steps", "200000", "--backend", "numba")
        _, out_b, _ = run_cli(capsys, "solve", str(planted_cnf), "--seed", "4",
                              "--max-steps", "200000", "--backend", "numpy")
        a, b = read_json(out_a)["record"], read_json(out_b)["record"]
        a.pop("wall_time"), b.pop("wall_time")
        assert a == b

    def test_malformed_cnf_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cnf"
        bad.write_text("p cnf 2 1\n1 2 0\n")
        code, _, err = run_cli(capsys, "solve", str(bad))
        assert code == 2
        assert "line 2" in err

    def test_missing_file_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "solve", "/nonexistent.cnf")
        assert code == 2

    def test_out_flag_writes_file(self, planted_cnf, tmp_path, capsys):
        out_path = tmp_path / "rec.json"
        code, out, _ = run_cli(capsys, "solve", str(planted_cnf), "--seed", "1",
                               "--max-steps", "200000", "-o", str(out_path))
        assert code == 0
        assert out == ""
        assert json.loads(out_path.read_text())["record"]["outcome"] == "SAT"


class TestBench:
    def test_csv_to_stdout(self, capsys):
        code, out, err = run_cli(capsys, "bench", "--sizes", "10", "--ratios", "4.3",
                                 "--instances", "2", "--max-steps", "300000")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("N,ratio,seed")
        assert len(lines) == 3

    def test_json_embeds_resolved_config(self, tmp_path, capsys):
        out_path = tmp_path / "rows.json"
        code, _, _ = run_cli(capsys, "bench", "--sizes", "10", "--ratios", "4.3",
                             "--instances", "2", "--max-steps", "300000",
                             "--format", "json", "-o", str(out_path))
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert payload["config"]["sizes"] == [10]
        assert payload["config"]["base_seed"] == 2200
        assert len(payload["results"]) == 2

    def test_csv_out_writes_config_sidecar(self, tmp_path, capsys):
        out_path = tmp_path / "rows.csv"
        code, _, _ = run_cli(capsys, "bench", "--sizes", "10", "--ratios", "4.3",
                             "--instances", "2", "--max-steps", "300000", "-o", str(out_path))
        assert code == 0
        sidecar = json.loads((tmp_path / "rows.csv.config.json").read_text())
        assert sidecar["config"]["instances"] == 2

    def test_config_file(self, tmp_path, capsys):
        cfg_path = tmp_path / "sweep.json"
        cfg_path.write_text(json.dumps({"sizes": [10], "ratios": [4.3], "instances": 2,
                                        "max_steps": 300000}))
        code, out, _ = run_cli(capsys, "bench", "--config", str(cfg_path))
        assert code == 0
        assert len(out.strip().split("\n")) == 3


class TestFitAndLuts:
    def test_fit_from_bench_csv(self, tmp_path, capsys):
        out_path = tmp_path / "rows.csv"
        run_cli(capsys, "bench", "--sizes", "10,14,20", "--ratios", "4.3",
                "--instances", "3", "--max-steps", "300000", "-o", str(out_path))
        code, out, err = run_cli(capsys, "fit", str(out_path), "--ratio", "4.3")
        assert code == 0
        fit = read_json(out)["fit"]
        assert "exponent" in fit and "prefactor" in fit and "exponent_stderr" in fit
        assert len(fit["points"]) == 3

    def test_fit_too_few_points_exits_2(self, tmp_path, capsys):
        out_path = tmp_path / "rows.csv"
        run_cli(capsys, "bench", "--sizes", "10", "--ratios", "4.3", "--instances", "2",
                "--max-steps", "300000", "-o", str(out_path))
        code, _, err = run_cli(capsys, "fit", str(out_path), "--ratio", "4.3")
        assert code == 2

    def test_estimate_luts_with_board(self, capsys):
        code, out, _ = run_cli(capsys, "estimate-luts", "90", "--board", "XC7A100T")
        assert code == 0
        payload = read_json(out)
        assert payload["luts"] == 57_606
        assert payload["board"]["fits"] is True
        assert payload["board"]["max_vars"] == 99

    def test_estimate_luts_vu9p(self, capsys):
        code, out, _ = run_cli(capsys, "estimate-luts", "7938", "--board", "VU9P")
        payload = read_json(out)
        assert payload["board"]["max_vars"] == 7_938
        assert payload["board"]["fits"] is True

    def test_unknown_board_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "estimate-luts", "90", "--board", "NOPE")
        assert code == 2


class TestUsage:
    def test_missing_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "x.cnf", "--warp-speed"])
        assert exc.value.code == 2
