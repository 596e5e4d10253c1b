import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from helpers import random_near_identity_change, so3_bivector
from poislin import corpus
from poislin.cli import (
    InputError,
    ProblemSpec,
    _killing_signature,
    main,
    parse_problem,
    print_problem,
    problem_from_dict,
)
from poislin.polyalg import Jet, format_polynomial, pushforward

F = Fraction


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_problem(tmp_path, data, name="prob.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


SO3_PROBLEM = {
    "kind": "poisson",
    "variables": ["x", "y", "z"],
    "order": 6,
    "brackets": {"x,y": "z", "y,z": "x", "z,x": "y"},
}


# ---------------------------------------------------------------------------
# parsing


def test_parse_problem_builds_the_bivector():
    spec = parse_problem(json.dumps(SO3_PROBLEM))
    assert spec.kind == "poisson"
    assert spec.names == ("x", "y", "z")
    assert spec.order == 6
    assert spec.scheduler == "doubling"
    assert spec.radius == 1
    z = Jet(3, 6, {(0, 0, 1): 1})
    assert spec.payload.entry(0, 1) == z
    # reversed key orientation carried the sign
    assert spec.payload.entry(2, 0) == Jet(3, 6, {(0, 1, 0): 1})


def test_parse_problem_polynomial_grammar():
    prob = {"kind": "poisson", "variables": ["x", "y"], "order": 3,
            "brackets": {"x,y": "x - 1/2*y^2"}}
    spec = parse_problem(json.dumps(prob))
    assert spec.payload.entry(0, 1) == Jet(2, 3, {(1, 0): 1,
                                                  (0, 2): F(-1, 2)})


def test_parse_problem_positions_polynomial_errors():
    prob = dict(SO3_PROBLEM, brackets={"x,y": "x + ", "y,z": "x", "z,x": "y"})
    with pytest.raises(InputError, match=r"line 1, column 5"):
        parse_problem(json.dumps(prob))


def test_parse_problem_positions_json_errors():
    with pytest.raises(InputError, match=r"line 2, column"):
        parse_problem('{\n "kind": poisson\n}')


def test_parse_problem_rejects_bad_schemas():
    with pytest.raises(InputError, match="kind"):
        parse_problem(json.dumps({"kind": "spin"}))
    with pytest.raises(InputError, match="duplicates"):
        parse_problem(json.dumps(dict(SO3_PROBLEM,
                                      variables=["x", "x", "z"])))
    with pytest.raises(InputError, match="unknown name"):
        parse_problem(json.dumps(dict(SO3_PROBLEM,
                                      brackets={"x,w": "z"})))
    with pytest.raises(InputError, match="appears twice"):
        parse_problem(json.dumps(dict(SO3_PROBLEM,
                                      brackets={"x,y": "z", "y,x": "-z"})))
    with pytest.raises(InputError, match="Jacobi"):
        parse_problem(json.dumps(dict(SO3_PROBLEM,
                                      brackets={"x,y": "z + x^2",
                                                "y,z": "x", "z,x": "y"})))


def test_print_then_parse_identity_for_each_kind():
    specs = [problem_from_dict(corpus.get(name).problem())
             for name in corpus.names()]
    assert {spec.kind for spec in specs} == {"poisson", "action", "algebroid"}
    for spec in specs:
        assert parse_problem(print_problem(spec)) == spec


def test_print_then_parse_keeps_scheduler_radius_and_levi():
    prob = dict(SO3_PROBLEM, scheduler="degree", radius="2/3")
    spec = parse_problem(json.dumps(prob))
    assert spec.scheduler == "degree"
    assert spec.radius == F(2, 3)
    again = parse_problem(print_problem(spec))
    assert again == spec


# ---------------------------------------------------------------------------
# killing signature


def test_killing_signature_exact_cases():
    assert _killing_signature([[-2, 0, 0], [0, -2, 0], [0, 0, -2]]) == (0, 3, 0)
    assert _killing_signature([[2, 0, 0], [0, 2, 0], [0, 0, -2]]) == (2, 1, 0)
    # hyperbolic plane needs the off-diagonal pivot path
    assert _killing_signature([[0, 1], [1, 0]]) == (1, 1, 0)
    assert _killing_signature([[0, 0], [0, 0]]) == (0, 0, 2)


# ---------------------------------------------------------------------------
# commands in process


def test_analyze_so3(tmp_path, capsys):
    path = write_problem(tmp_path, SO3_PROBLEM)
    code, out, _ = run_cli(capsys, ["analyze", path])
    assert code == 0
    report = json.loads(out)
    cls = report["classification"]
    assert cls["semisimple"] is True
    assert cls["compact_type"] is True
    assert cls["radical_dimension"] == 0
    assert cls["killing_signature"] == {"positive": 0, "negative": 3, "zero": 0}
    assert cls["killing_form"][0] == ["-2", "0", "0"]
    assert report["verified"] is True


def test_check_reports_input_errors_with_exit_1(tmp_path, capsys):
    path = write_problem(tmp_path, dict(SO3_PROBLEM,
                                        brackets={"x,y": "z + x^2",
                                                  "y,z": "x", "z,x": "y"}))
    code, out, err = run_cli(capsys, ["check", path])
    assert code == 1
    assert out == ""
    assert "Jacobi" in err


def test_linearize_perturbed_so3(tmp_path, capsys):
    rng = random.Random(41)
    moved = pushforward(so3_bivector(6),
                        random_near_identity_change(rng, 3, 6, max_extra=2))
    names = ["x", "y", "z"]
    brackets = {}
    for i in range(3):
        for j in range(i + 1, 3):
            entry = moved.entry(i, j)
            if not entry.is_zero():
                brackets[f"{names[i]},{names[j]}"] = format_polynomial(entry, names)
    path = write_problem(tmp_path, {"kind": "poisson", "variables": names,
                                    "order": 6, "brackets": brackets})
    code, out, _ = run_cli(capsys, ["linearize", path])
    assert code == 0
    report = json.loads(out)
    assert report["result"]["status"] == "linearized"
    assert report["verified"] is True
    assert report["result"]["normal_form"]["brackets"] == {
        "x,y": "z", "x,z": "-y", "y,z": "x"}
    blocks = [step["block"] for step in report["trace"]["steps"]]
    assert blocks == sorted(blocks)
    assert report["trace"]["radius"] == "1"


def test_linearize_obstruction_exits_2(tmp_path, capsys):
    path = write_problem(tmp_path, corpus.get("abelian-x2").problem())
    code, out, _ = run_cli(capsys, ["linearize", path])
    assert code == 2
    report = json.loads(out)
    result = report["result"]
    assert result["status"] == "obstructed"
    assert result["obstruction"]["verified"] is True
    assert result["obstruction"]["degree"] == 2
    assert result["obstruction"]["cocycle"]
    for item in result["obstruction"]["functional"]:
        assert F(item["value"]) != 0
    assert report["trace"]["steps"][-1]["obstructed"]


def test_levi_command_with_embedded_factor(tmp_path, capsys):
    path = write_problem(tmp_path, corpus.get("gl2-levi").problem(5))
    code, out, _ = run_cli(capsys, ["levi", path])
    assert code == 0
    report = json.loads(out)
    assert report["result"]["status"] == "normal-form"
    assert report["result"]["semisimple_block"] == 3
    assert report["result"]["residual_block"] == 1
    assert report["verified"] is True
    assert report["result"]["normal_form"]["brackets"] == {
        "x,y": "-z", "x,z": "-y", "y,z": "x"}


def test_levi_command_with_factor_file(tmp_path, capsys):
    prob = corpus.get("gl2-levi").problem(4)
    block = prob.pop("levi_factor")
    path = write_problem(tmp_path, prob)
    factor = tmp_path / "split.json"
    factor.write_text(json.dumps(block))
    code, out, _ = run_cli(capsys, ["levi", path, "--levi-factor", str(factor)])
    assert code == 0
    assert json.loads(out)["verified"] is True
    code, _, err = run_cli(capsys, ["levi", path])
    assert code == 1
    assert "levi_factor" in err


def test_levi_command_rejects_bad_factor(tmp_path, capsys):
    prob = corpus.get("gl2-levi").problem(4)
    prob["levi_factor"] = {
        "s": [["1", "0", "0", "0"], ["0", "1", "0", "0"],
              ["0", "0", "0", "1"]],
        "r": [["0", "0", "1", "0"]],
    }
    path = write_problem(tmp_path, prob)
    code, _, err = run_cli(capsys, ["levi", path])
    assert code == 1
    assert "levi factor rejected" in err


def test_algebroid_command(tmp_path, capsys):
    path = write_problem(tmp_path, corpus.get("so3-coadjoint-algebroid").problem())
    code, out, _ = run_cli(capsys, ["algebroid", path])
    assert code == 0
    report = json.loads(out)
    assert report["result"]["status"] == "linearized"
    assert report["verified"] is True
    frame = report["result"]["change"]["frame"]
    assert [row[i] for i, row in enumerate(frame)] == ["1", "1", "1"]
    code, _, err = run_cli(capsys, ["algebroid",
                                    write_problem(tmp_path, SO3_PROBLEM,
                                                  "so3.json")])
    assert code == 1
    assert "algebroid" in err


def test_cohomology_command(tmp_path, capsys):
    path = write_problem(tmp_path, SO3_PROBLEM)
    for degree in (1, 2):
        code, out, _ = run_cli(capsys, ["cohomology", path,
                                        "--degree", str(degree),
                                        "--module-degree", "2"])
        assert code == 0
        report = json.loads(out)
        assert report["result"]["h_dim"] == 0
    code, _, err = run_cli(capsys, ["cohomology", path, "--degree", "2"])
    assert code == 1
    assert "module-degree" in err


def test_scheduler_and_radius_overrides(tmp_path, capsys):
    path = write_problem(tmp_path, SO3_PROBLEM)
    code, out, _ = run_cli(capsys, ["linearize", path,
                                    "--scheduler", "degree",
                                    "--radius", "1/2"])
    assert code == 0
    report = json.loads(out)
    assert report["trace"]["scheduler"] == "degree"
    assert report["trace"]["radius"] == "1/2"
    code, _, err = run_cli(capsys, ["linearize", path, "--radius", "-1"])
    assert code == 1
    assert "positive" in err


def test_max_degree_validation(tmp_path, capsys):
    path = write_problem(tmp_path, SO3_PROBLEM)
    code, out, _ = run_cli(capsys, ["linearize", path, "--max-degree", "3"])
    assert code == 0
    assert json.loads(out)["trace"]["target_order"] == 3
    code, _, err = run_cli(capsys, ["linearize", path, "--max-degree", "9"])
    assert code == 1
    assert "exceeds" in err


def test_out_flag_and_text_format(tmp_path, capsys):
    path = write_problem(tmp_path, SO3_PROBLEM)
    target = tmp_path / "report.txt"
    code, out, _ = run_cli(capsys, ["analyze", path, "--format", "text",
                                    "--out", str(target)])
    assert code == 0
    assert out == ""
    text = target.read_text()
    assert "poislin analyze" in text
    assert "semisimple True" in text


# ---------------------------------------------------------------------------
# corpus


def test_corpus_list_names(capsys):
    code, out, _ = run_cli(capsys, ["corpus", "list"])
    assert code == 0
    report = json.loads(out)
    assert [e["name"] for e in report["entries"]] == [
        "abelian-x2", "gl2-levi", "guillemin-sternberg-action",
        "sl2-linear", "so3-coadjoint-algebroid", "so3-linear",
        "weinstein-sl2-flat",
    ]


def test_corpus_run_unknown_entry(capsys):
    code, _, err = run_cli(capsys, ["corpus", "run", "nope"])
    assert code == 1
    assert "unknown corpus entry" in err


def test_corpus_run_single_entry(capsys):
    code, out, _ = run_cli(capsys, ["corpus", "run", "abelian-x2"])
    assert code == 2
    report = json.loads(out)
    assert report["corpus_entry"]["name"] == "abelian-x2"
    assert report["result"]["status"] == "obstructed"


def test_corpus_run_all(capsys):
    code, out, _ = run_cli(capsys, ["corpus", "run", "--all"])
    assert code == 0
    report = json.loads(out)
    assert len(report["reports"]) == 7
    for sub in report["reports"]:
        assert sub["verified"] is True


def test_corpus_flat_entry_is_linear_with_identity_change(capsys):
    for order in (3, 7):
        code, out, _ = run_cli(capsys, ["corpus", "run", "weinstein-sl2-flat",
                                        "--max-degree", str(order)])
        assert code == 0
        report = json.loads(out)
        assert report["input"]["order"] == order
        assert report["result"]["change"] == {"x": "x", "y": "y", "z": "z"}
        assert report["result"]["normal_form"]["brackets"] == {
            "x,y": "-z", "x,z": "-y", "y,z": "x"}
        assert report["trace"]["steps"] == []
        assert "blind to flat terms" in report["corpus_entry"]["notes"]


# ---------------------------------------------------------------------------
# module invocation


def test_module_entry_point_runs_in_a_subprocess(tmp_path):
    path = write_problem(tmp_path, SO3_PROBLEM)
    done = subprocess.run(
        [sys.executable, "-m", "poislin", "analyze", str(path)],
        capture_output=True, text=True,
    )
    assert done.returncode == 0
    report = json.loads(done.stdout)
    assert report["classification"]["semisimple"] is True

    bad = subprocess.run(
        [sys.executable, "-m", "poislin", "linearize", str(tmp_path / "no.json")],
        capture_output=True, text=True,
    )
    assert bad.returncode == 1
    assert "error" in bad.stderr
