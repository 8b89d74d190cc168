import json
import subprocess
import sys

import numpy as np
import pytest

from fanobound import verify
from fanobound.bounds import BoundReport
from fanobound.cli import main

INSTANCE = {
    "prior": [0.5, 0.5],
    "obs_laws": [[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]],
    "loss": [[0, 1, 10], [10, 1, 0]],
    "l_max": 10,
}
SAME = {"prior": [0.3, 0.7], "obs_laws": [[0.2, 0.5, 0.3]] * 2, "loss": [[0, 2, 6], [4, 1, 8]], "l_max": 8}
BANDIT = {
    "arms": 2,
    "horizon": 2,
    "reward_alphabet": [0, 1],
    "reward_probs": [[[0.3, 0.7], [0.6, 0.4]], [[0.6, 0.4], [0.3, 0.7]]],
    "policy": {"kind": "greedy"},
}


@pytest.fixture
def write(tmp_path):
    def _write(obj, name="f.json"):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)

    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestBound:
    def test_cvar_json(self, capsys, write):
        code, out, _ = run(capsys, "bound", "cvar", "--alpha", "0.9", "--div", "kl", "--ref", "mixture", write(INSTANCE))
        assert code == 0
        rep = json.loads(out)
        assert rep["bound"] <= rep["exact"] and rep["verdict"] == "exact_holds"

    def test_zero_budget_two_sided(self, capsys, write):
        code, out, _ = run(capsys, "bound", "two-sided", "--transform", "hinge:t=0,lmax=8", write(SAME))
        rep = json.loads(out)
        assert code == 0 and rep["bound"] == rep["upper"]

    @pytest.mark.parametrize("kind,flags", [
        ("one-sided", ["--transform", "laplace:lam=0.3"]),
        ("quantile", ["--delta", "1"]),
        ("hinge", ["--t", "1"]),
        ("cvar-pinsker", ["--alpha", "0.5"]),
        ("two-sided", ["--transform", "clipped:tau=2", "--ref", "model:1", "--div", "hellinger"]),
    ])
    def test_every_kind(self, capsys, write, kind, flags):
        code, out, _ = run(capsys, "bound", kind, *flags, write(INSTANCE))
        assert code == 0 and json.loads(out)["verdict"] == "exact_holds"

    def test_reference_file(self, capsys, write):
        ref = write({"reference": [0.2, 0.2, 0.6]}, "ref.json")
        code, out, _ = run(capsys, "bound", "hinge", "--t", "0", "--ref", ref, write(INSTANCE))
        assert code == 0 and json.loads(out)["reference"] == "explicit"

    def test_csv_and_json_agree(self, capsys, write):
        path = write(INSTANCE)
        _, js, _ = run(capsys, "bound", "cvar", "--alpha", "0.9", path)
        _, cs, _ = run(capsys, "bound", "cvar", "--alpha", "0.9", "--format", "csv", path)
        assert BoundReport.from_csv(cs).to_dict() == BoundReport.from_json(js).to_dict()

    def test_table(self, capsys, write):
        code, out, _ = run(capsys, "bound", "quantile", "--delta", "1", "--format", "table", write(INSTANCE))
        assert code == 0 and "delta_star" in out


class TestErrors:
    def test_malformed_json(self, capsys, write):
        code, out, err = run(capsys, "bound", "quantile", "--delta", "1.0", write('{"prior": [1'))
        assert code == 2 and out == "" and "json" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "bound", "quantile", "--delta", "1", str(tmp_path / "nope.json"))[0] == 2

    def test_missing_field_named(self, capsys, write):
        bad = {k: v for k, v in INSTANCE.items() if k != "obs_laws"}
        code, _, err = run(capsys, "bound", "quantile", "--delta", "1", write(bad))
        assert code == 2 and "obs_laws" in err

    def test_ragged_rows(self, capsys, write):
        bad = dict(INSTANCE, obs_laws=[[0.5, 0.5], [0.1, 0.3, 0.6]])
        code, _, err = run(capsys, "bound", "quantile", "--delta", "1", write(bad))
        assert code == 2 and "obs_laws" in err

    def test_row_sum(self, capsys, write):
        bad = dict(INSTANCE, obs_laws=[[0.6, 0.3, 0.2], [0.1, 0.3, 0.6]])
        code, _, err = run(capsys, "bound", "quantile", "--delta", "1", write(bad))
        assert code == 3 and "obs_laws[0]" in err

    def test_loss_range(self, capsys, write):
        bad = dict(INSTANCE, loss=[[0, 1, 11], [10, 1, 0]])
        assert run(capsys, "bound", "hinge", "--t", "1", write(bad))[0] == 3

    def test_usage_errors(self, capsys, write):
        path = write(INSTANCE)
        assert run(capsys, "bound", "cvar", path)[0] == 2
        assert run(capsys, "bound", "two-sided", "--transform", "gamma:k=1", path)[0] == 2
        assert run(capsys, "bound", "hinge", "--t", "1", "--ref", "candidates", path)[0] == 2
        assert run(capsys, "bound", "cvar", "--alpha", "1.5", path)[0] == 3
        with pytest.raises(SystemExit) as exc:
            main(["bound", "cvar", "--tol", "-1", path])
        assert exc.value.code == 2


class TestBandit:
    def test_cvar(self, capsys, write):
        code, out, _ = run(capsys, "bandit", write(BANDIT), "cvar", "--alpha", "0.9")
        rep = json.loads(out)
        assert code == 0 and rep["bound"] <= rep["exact"]
        assert rep["quantities"]["n_transcripts"] == 16
        np.testing.assert_allclose(rep["quantities"]["mutual_information"], rep["budget"])

    def test_identical_models(self, capsys, write):
        same = dict(BANDIT, horizon=1, policy="uniform", reward_probs=[BANDIT["reward_probs"][0]] * 2)
        code, out, _ = run(capsys, "bandit", write(same), "cvar", "--alpha", "0.9")
        rep = json.loads(out)
        assert code == 0 and rep["quantities"]["mutual_information"] == 0.0
        np.testing.assert_allclose(rep["bound"], rep["exact"], atol=1e-8)

    def test_cap_exceeded(self, capsys, write):
        big = dict(BANDIT, horizon=20)
        code, out, err = run(capsys, "bandit", write(big), "cvar", "--alpha", "0.9")
        assert code == 3 and out == "" and "cap" in err

    def test_bad_policy(self, capsys, write):
        assert run(capsys, "bandit", write(dict(BANDIT, policy="thompson")), "cvar", "--alpha", "0.9")[0] == 2


class TestVerifyAndMc:
    def test_empty_verify(self, capsys):
        code, out, _ = run(capsys, "verify", "--iterations", "0")
        assert code == 0 and json.loads(out)["violations"] == 0

    def test_violation_exit(self, capsys, monkeypatch):
        monkeypatch.setattr(verify, "exact_cvar_pairs", lambda inst, alpha: -1.0)
        code, out, err = run(capsys, "verify", "--iterations", "1", "--seed", "4")
        assert code == 1 and json.loads(out)["violations"] > 0 and "[4, 0]" in err

    def test_seed_env(self, capsys, monkeypatch):
        monkeypatch.setenv("FANOBOUND_SEED", "99")
        _, out, _ = run(capsys, "verify", "--iterations", "0")
        assert json.loads(out)["config"]["seed"] == 99
        monkeypatch.setenv("FANOBOUND_SEED", "abc")
        assert run(capsys, "verify", "--iterations", "0")[0] == 2

    def test_mc(self, capsys, write):
        code, out, _ = run(capsys, "mc", "--transform", "clipped:tau=5", "--samples", "2000", write(INSTANCE))
        rep = json.loads(out)
        assert code == 0 and 0 <= rep["estimate"] <= 1 and rep["samples"] == 2000

    def test_module_entry_point(self, write):
        proc = subprocess.run(
            [sys.executable, "-m", "fanobound", "bound", "hinge", "--t", "1", write(INSTANCE)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0 and json.loads(proc.stdout)["theorem"] == "hinge_lower"
