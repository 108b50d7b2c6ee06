import json

import numpy as np
import pytest

from provnmf.cli import main
from provnmf.errors import NonFiniteError, ParseError, RaggedRowsError
from provnmf.instances import gen_planted_product
from provnmf.matrix_io import parse_matrix_csv, parse_matrix_text, write_matrix_csv

MIDPOINT = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def midpoint(tmp_path):
    path = tmp_path / "m.csv"
    write_matrix_csv(path, MIDPOINT)
    return path


class TestMatrixIO:
    def test_identity(self):
        np.testing.assert_array_equal(parse_matrix_text("1,0\n0,1\n"), np.eye(2))

    def test_comments_and_blank_lines(self):
        np.testing.assert_array_equal(parse_matrix_text("# header\n1,2\n\n3,4\n"),
                                      [[1, 2], [3, 4]])

    def test_ragged(self):
        with pytest.raises(RaggedRowsError) as info:
            parse_matrix_text("1,0\n0\n")
        assert info.value.line == 2

    @pytest.mark.parametrize("text", ["1,nan\n", "inf,1\n"])
    def test_non_finite(self, text):
        with pytest.raises(NonFiniteError):
            parse_matrix_text(text)

    def test_bad_token(self):
        with pytest.raises(ParseError) as info:
            parse_matrix_text("1,2\n3,x\n")
        assert (info.value.line, info.value.col) == (2, 2)

    def test_empty(self):
        with pytest.raises(ParseError):
            parse_matrix_text("# nothing\n")

    def test_round_trip_exact(self, tmp_path):
        m = np.random.default_rng(0).normal(size=(4, 3))
        write_matrix_csv(tmp_path / "x.csv", m)
        np.testing.assert_array_equal(parse_matrix_csv(tmp_path / "x.csv"), m)


class TestCommands:
    def test_separable_midpoint(self, capsys, midpoint, tmp_path):
        code, rep = run(capsys, "separable", midpoint, "-r", 2, "--out", tmp_path)
        assert code == 0 and rep["outcome"] == "Success"
        w = parse_matrix_csv(tmp_path / "W.csv")
        assert sorted(map(tuple, w)) == [(0.0, 1.0), (1.0, 0.0)]
        assert rep["schema"] == 1 and rep["command"] == "separable"
        assert rep["residual_fro"] <= 1e-12

    def test_not_separable(self, capsys, tmp_path):
        path = tmp_path / "c.csv"
        write_matrix_csv(path, [[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]])
        code, rep = run(capsys, "separable", path, "-r", 2, "--out", tmp_path)
        assert code == 2 and rep["outcome"] == "NotSeparable"

    def test_robust_infeasible_params(self, capsys, midpoint, tmp_path):
        code, rep = run(capsys, "robust", midpoint, "--eps", 0.01, "--alpha", 0.5,
                        "--out", tmp_path)
        assert code == 3 and rep["error"] == "InfeasibleParamsError"

    def test_robust_success(self, capsys, midpoint, tmp_path):
        code, rep = run(capsys, "robust", midpoint, "--eps", 0.001, "--alpha", 1.0,
                        "--out", tmp_path)
        assert code == 0 and rep["found_r"] == 2

    def test_verify(self, capsys, midpoint, tmp_path):
        write_matrix_csv(tmp_path / "A.csv", MIDPOINT)
        write_matrix_csv(tmp_path / "W.csv", np.eye(2))
        code, rep = run(capsys, "verify", midpoint, tmp_path / "A.csv", tmp_path / "W.csv",
                        "--tol", 1e-7)
        assert code == 0 and rep["ok"]
        write_matrix_csv(tmp_path / "W.csv", 2 * np.eye(2))
        code, rep = run(capsys, "verify", midpoint, tmp_path / "A.csv", tmp_path / "W.csv")
        assert code == 2 and rep["outcome"] == "Rejected"

    def test_ragged_input(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,0\n0\n")
        code, rep = run(capsys, "separable", path, "-r", 1)
        assert code == 1 and rep["error"] == "RaggedRowsError"

    def test_missing_file(self, capsys, tmp_path):
        code, rep = run(capsys, "sf", tmp_path / "none.csv", "-r", 2)
        assert code == 1

    def test_sf_and_reverify(self, capsys, tmp_path):
        _, _, m = gen_planted_product(6, 5, 3, seed=0)
        write_matrix_csv(tmp_path / "m.csv", m)
        code, rep = run(capsys, "sf", tmp_path / "m.csv", "-r", 3, "--out", tmp_path)
        assert code == 0
        code, _ = run(capsys, "verify", tmp_path / "m.csv", tmp_path / "A.csv",
                      tmp_path / "W.csv", "--tol", 1e-7)
        assert code == 0

    def test_sf_rank_mismatch(self, capsys, tmp_path):
        write_matrix_csv(tmp_path / "m.csv", np.eye(3))
        code, rep = run(capsys, "sf", tmp_path / "m.csv", "-r", 2)
        assert code == 3 and rep["error"] == "RankMismatchError"

    def test_nmf_infeasible(self, capsys, tmp_path):
        write_matrix_csv(tmp_path / "m.csv", np.eye(3))
        code, rep = run(capsys, "nmf", tmp_path / "m.csv", "-r", 2, "--out", tmp_path)
        assert code == 2 and rep["outcome"] == "ProvablyInfeasible"

    def test_approx(self, capsys, tmp_path):
        write_matrix_csv(tmp_path / "m.csv", [[1, 2], [2, 4]])
        code, rep = run(capsys, "approx", tmp_path / "m.csv", "-r", 1, "--eps", 1e-3,
                        "--out", tmp_path)
        assert code == 0 and rep["relative_residual"] <= 1e-2

    def test_enum_partitions(self, capsys, tmp_path):
        write_matrix_csv(tmp_path / "m.csv", [[1, 0, -1], [0, 1, 0]])
        code, rep = run(capsys, "enum-partitions", tmp_path / "m.csv", "-s", 2, "-k", 2)
        assert code == 0 and rep["n_hyperplane_partitions"] > 0
        assert rep["n_simplicial_partitions"] > 0

    def test_enum_rank_too_high(self, capsys, tmp_path):
        write_matrix_csv(tmp_path / "m.csv", np.eye(3))
        code, rep = run(capsys, "enum-partitions", tmp_path / "m.csv", "-s", 2)
        assert code == 3

    @pytest.mark.parametrize("kind,expected", [("separable", "M.csv"),
                                               ("gadget", "gadget.json"),
                                               ("intermediate-simplex",
                                                "intermediate-simplex.json")])
    def test_gen(self, capsys, tmp_path, kind, expected):
        code, rep = run(capsys, "gen", kind, "--out", tmp_path, "-n", 8, "-m", 5, "-r", 2)
        assert code == 0 and (tmp_path / expected).exists()

    def test_gen_eps_too_large(self, capsys, tmp_path):
        code, rep = run(capsys, "gen", "gadget", "--eps-g", 0.1, "--out", tmp_path)
        assert code == 3


class TestReports:
    def test_residuals_match_files(self, capsys, tmp_path):
        _, _, m = gen_planted_product(5, 6, 2, seed=4)
        write_matrix_csv(tmp_path / "m.csv", m)
        code, rep = run(capsys, "nmf", tmp_path / "m.csv", "-r", 2, "--out", tmp_path)
        assert code == 0
        a, w = parse_matrix_csv(tmp_path / "A.csv"), parse_matrix_csv(tmp_path / "W.csv")
        resid = m - a @ w
        assert abs(rep["residual_fro"] - np.linalg.norm(resid)) <= 1e-10
        assert abs(rep["residual_row_l1_max"] - np.abs(resid).sum(axis=1).max()) <= 1e-10

    @pytest.mark.parametrize("cmd", [["sf", "-r", 3], ["approx", "-r", 2, "--eps", 0.05,
                                                      "--max-candidates", 500]])
    def test_determinism(self, capsys, tmp_path, cmd):
        _, _, m = gen_planted_product(6, 5, 3, seed=2)
        write_matrix_csv(tmp_path / "m.csv", m)
        outputs = []
        for _ in range(2):
            code, rep = run(capsys, cmd[0], tmp_path / "m.csv", *cmd[1:], "--seed", 9,
                            "--out", tmp_path / "out")
            assert code == 0
            rep.pop("wall_time")
            outputs.append((rep, (tmp_path / "out" / "A.csv").read_bytes(),
                            (tmp_path / "out" / "W.csv").read_bytes()))
        assert outputs[0] == outputs[1]

    def test_seed_from_environment(self, capsys, midpoint, tmp_path, monkeypatch):
        monkeypatch.setenv("NMF_SEED", "17")
        code, rep = run(capsys, "separable", midpoint, "-r", 2, "--out", tmp_path)
        assert rep["seed"] == 17
