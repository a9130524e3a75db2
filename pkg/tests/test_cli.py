import json
from fractions import Fraction as F

import pytest

from pandora_matching.cli import main
from pandora_matching.repro import indistinguishable_edge, no_dessert_edge


@pytest.fixture
def edge_file(tmp_path):
    path = tmp_path / "edge.json"
    path.write_text(json.dumps(no_dessert_edge(F(1, 2)).instance.to_json_obj()))
    return str(path)


@pytest.fixture
def indist_file(tmp_path):
    path = tmp_path / "indist.json"
    path.write_text(json.dumps(indistinguishable_edge().instance.to_json_obj()))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestIndexCommands:
    def test_index(self, tmp_path, capsys):
        box = indistinguishable_edge().instance.edges[0].box(("i", "j"))
        path = tmp_path / "box.json"
        path.write_text(json.dumps(box.to_json_obj()))
        code, out, _ = run_cli(capsys, "index", "--instance", str(path))
        assert code == 0
        assert json.loads(out) == {"sigma": "1", "sigma_float": 1.0}

    def test_nested_index(self, tmp_path, capsys):
        from pandora_matching.instance import edge_to_basket

        edge = no_dessert_edge(F(1, 2)).instance.edges[0]
        tree = edge_to_basket(edge, ("i", "j"))
        path = tmp_path / "tree.json"
        path.write_text(json.dumps(tree.to_json_obj()))
        code, out, _ = run_cli(capsys, "nested-index", "--instance", str(path))
        doc = json.loads(out)
        assert code == 0
        assert doc["sigma1"] == "1"
        assert doc["tree"]["sigma"]["exact"] == "1"


class TestRunCommand:
    def test_oriented_desc_canonical(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "oriented-desc")
        doc = json.loads(out)
        assert code == 0
        assert doc["welfare"]["exact"] == "1/2"

    def test_oriented_desc_reverse(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "oriented-desc", "--orientation", "reverse")
        assert json.loads(out)["welfare"]["exact"] == "1/4"

    def test_inline_orientation(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "oriented-desc",
                               "--orientation", '[["j", "i"]]')
        assert json.loads(out)["welfare"]["exact"] == "1/4"

    def test_best_of_two(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "best-of-two")
        doc = json.loads(out)
        assert doc["welfare"]["exact"] == "1/2"
        assert doc["orientation"] == [["i", "j"]]

    def test_randomized_exact(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "randomized")
        assert json.loads(out)["welfare"]["exact"] == "3/8"

    def test_csv_format(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "oriented-desc", "--format", "csv",
                               "--with-opt")
        lines = out.strip().splitlines()
        assert lines[0] == "instance,policy,orientation,mode,value_exact,value_float,ratio_to_opt"
        fields = lines[1].split(",")
        assert fields[1] == "oriented-desc"
        assert fields[4] == "1/2" and fields[5] == "0.5" and fields[6] == "1"

    def test_montecarlo_deterministic(self, edge_file, capsys):
        args = ("run", "--instance", edge_file, "--policy", "oriented-desc",
                "--mode", "montecarlo", "--seed", "9", "--trials", "2000")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0 and out1 == out2
        doc = json.loads(out1)
        assert doc["welfare"]["stderr"] > 0

    def test_montecarlo_without_seed_fails(self, edge_file, capsys):
        code, _, err = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "oriented-desc", "--mode", "montecarlo")
        assert code == 2 and "seed" in err

    def test_sample_trace(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "oriented-desc", "--trace-seed", "3")
        doc = json.loads(out)
        assert "sample_trace" in doc and "welfare" in doc["sample_trace"]

    def test_bundled_policy(self, indist_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", indist_file,
                               "--policy", "bundled")
        assert code == 0
        assert json.loads(out)["welfare"]["exact"] == "0"

    def test_vertex_based_policy(self, indist_file, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", indist_file,
                               "--policy", "vertex-based")
        assert json.loads(out)["welfare"]["exact"] == "-3/2"

    def test_vertex_based_on_joint_edge_fails_cleanly(self, tmp_path, capsys):
        from pandora_matching.instance import EdgeSpec, MatchingInstance

        e = EdgeSpec.joint("a", "b", 1, 1, [("x", "y", F(2), F(1))])
        path = tmp_path / "joint.json"
        path.write_text(json.dumps(MatchingInstance("ab", [e]).to_json_obj()))
        code, _, err = run_cli(capsys, "run", "--instance", str(path),
                               "--policy", "vertex-based")
        assert code == 2 and "independent" in err

    def test_bad_orientation_spec(self, edge_file, capsys):
        code, _, err = run_cli(capsys, "run", "--instance", edge_file,
                               "--policy", "oriented-desc", "--orientation", "bogus")
        assert code == 2 and "orientation" in err


class TestOracleCommand:
    def test_free_opt(self, indist_file, capsys):
        code, out, _ = run_cli(capsys, "oracle", "--instance", indist_file,
                               "--constraint", "free")
        doc = json.loads(out)
        assert code == 0 and doc["value"] == "1/4"

    def test_oriented_opt(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "oracle", "--instance", edge_file,
                               "--constraint", "oriented", "--orientation", "reverse")
        assert json.loads(out)["value"] == "1/4"

    def test_trace_flag(self, indist_file, capsys):
        code, out, _ = run_cli(capsys, "oracle", "--instance", indist_file, "--trace")
        doc = json.loads(out)
        assert doc["optimal_action_trace"]["action"] == "open"


class TestReproCommand:
    def test_defaults_pass(self, capsys):
        code, out, _ = run_cli(capsys, "repro")
        doc = json.loads(out)
        assert code == 0 and doc["mismatches"] == 0

    def test_only_with_params(self, capsys):
        code, out, _ = run_cli(capsys, "repro", "--only", "no-dessert-edge",
                               "--alpha", "1/8", "--format", "csv")
        assert code == 0
        assert "sigma1_ij,7" in out

    def test_mismatch_exit_code(self, capsys, monkeypatch):
        from pandora_matching import repro as repro_mod
        from pandora_matching.repro import NamedInstance, indistinguishable_edge

        named = indistinguishable_edge()
        broken = NamedInstance(named.name, {}, named.instance,
                               (("opt_free", named.table[2][1], F(1, 3)),))
        monkeypatch.setattr(repro_mod, "build", lambda name, **kw: broken)
        code, out, _ = run_cli(capsys, "repro", "--only", "indistinguishable-edge")
        assert code == 1


class TestCheckCommand:
    def test_all_checks_pass(self, edge_file, capsys):
        code, out, _ = run_cli(capsys, "check", "--instance", edge_file)
        doc = json.loads(out)
        assert code == 0 and doc["all_passed"]
        names = {c["name"] for c in doc["checks"]}
        assert "greedy-equivalence-forward" in names
        assert "opt-bound" in names

    def test_missing_instance_file(self, capsys):
        code, _, err = run_cli(capsys, "check", "--instance", "/nonexistent.json")
        assert code == 2 and "cannot read" in err
