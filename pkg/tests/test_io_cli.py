import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustcommit.cli import main
from robustcommit.core import ValidationError, check_downward_closed, robust_value
from robustcommit.io import (
    GENERATOR_KINDS,
    build_instance,
    dumps,
    fmt,
    format_dimacs,
    generate_instance,
    parse_dimacs_cnf,
    parse_instance,
    parse_solution,
    serialize_instance,
)

FIG = {"format_version": 1, "type": "intervals", "jobs": [[1, 3, 10], [2, 5, 8], [4, 7, 2], [6, 9, 8], [8, 10, 10]]}
ABC = {"format_version": 1, "type": "explicit", "n": 3, "maximal_sets": [[0], [1, 2]], "weights": [3, 2, 2]}


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, obj in {"fig": FIG, "abc": ABC}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        paths[name] = str(p)
    cnf = tmp_path / "f.cnf"
    cnf.write_text("c tiny\np cnf 3 1\n1 2 3 0\n")
    paths["cnf"] = str(cnf)
    return paths


def test_parse_examples():
    inst = parse_instance(json.dumps(FIG))
    assert len(inst.jobs) == 5
    abc = parse_instance(json.dumps(ABC))
    assert abc.system.maximal_sets() == (0b001, 0b110)
    with pytest.raises(ValidationError):
        parse_instance(json.dumps({**FIG, "jobs": [[3, 3, 1]]}))


def test_parse_rejections():
    with pytest.raises(ValidationError, match="unknown field"):
        build_instance({**FIG, "colour": "red"})
    with pytest.raises(ValidationError, match="line 1"):
        parse_instance("{not json")
    with pytest.raises(ValidationError, match="downward"):
        build_instance({"format_version": 1, "type": "explicit", "n": 2, "feasible_sets": [[], [0, 1]]})
    with pytest.raises(ValidationError):
        build_instance({"format_version": 1, "type": "graph", "n_vertices": 2, "edges": [[0, 1], [1, 0]]})
    with pytest.raises(ValidationError):
        build_instance({**ABC, "weights": [1.5, 2, 2]})
    with pytest.raises(ValidationError):
        build_instance({**FIG, "format_version": 2})


def test_rationals():
    assert fmt(4) == 4 and fmt("6/4") == "3/2"
    inst = build_instance({**ABC, "weights": ["1/2", "4/2", 3]})
    assert [str(x) for x in inst.weights] == ["1/2", "2", "3"]
    assert json.loads(serialize_instance(inst))["weights"] == ["1/2", 2, 3]


def test_dimacs():
    phi = parse_dimacs_cnf("c comment\np cnf 3 1 \n 1 2 3 0")
    assert phi.n_vars == 3 and phi.clauses == ((1, 2, 3),)
    assert parse_dimacs_cnf(format_dimacs(phi)) == phi
    with pytest.raises(ValidationError, match="arity"):
        parse_dimacs_cnf("p cnf 2 1\n1 2 0\n")
    with pytest.raises(ValidationError):
        parse_dimacs_cnf("p cnf 2 1\n1 2 3 0\n")
    with pytest.raises(ValidationError, match="header"):
        parse_dimacs_cnf("p dnf 3 1\n1 2 3 0\n")


def test_generators_are_deterministic():
    a = dumps(generate_instance("intervals", {"n": 9, "horizon": 20, "wmax": 20}, 1))
    b = dumps(generate_instance("intervals", {"n": 9, "horizon": 20, "wmax": 20}, 1))
    assert a == b
    g = generate_instance("bipartite-graph", {"n": 8, "p": "0.4"}, 7)
    assert len(g["bipartition"]) == 8
    inst = build_instance(generate_instance("explicit", {"n": 4}, 3))
    assert check_downward_closed(inst.system)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(GENERATOR_KINDS), st.integers(0, 2**63 - 1), st.integers(0, 7))
def test_round_trip(kind, seed, n):
    inst = build_instance(generate_instance(kind, {"n": n}, seed))
    again = parse_instance(serialize_instance(inst))
    assert again == inst
    assert again.weights == inst.weights


def test_cli_examples(files, capsys):
    code, out, _ = run(["solve", "ris", "--instance", files["fig"]], capsys)
    sol = parse_solution(out)
    assert code == 0 and sol["robust_value"] == 18 and sol["first_stage"] == [0, 4]
    code, out, _ = run(["eval", "--instance", files["fig"], "--first-stage", "0,2,4"], capsys)
    assert code == 0 and json.loads(out)["robust_value"] == 12
    code, out, _ = run(["check", "matroid", "--instance", files["abc"]], capsys)
    body = json.loads(out)
    assert body["is_matroid"] is False and body["witness"]["a"] == 0


def test_solution_reproduced_by_eval(files, capsys):
    for cmd in (["solve", "ris"], ["solve", "rp"]):
        _, out, _ = run([*cmd, "--instance", files["fig"]], capsys)
        sol = parse_solution(out)
        stage = ",".join(map(str, sol["first_stage"]))
        _, out2, _ = run(["eval", "--instance", files["fig"], "--first-stage", stage], capsys)
        assert parse_solution(out2)["robust_value"] == sol["robust_value"]
        inst = parse_instance(open(files["fig"]).read())
        assert robust_value(inst.system, inst.weights, sol["first_stage"]).worst_case_value == sol["robust_value"]


def test_cli_lambda_and_reductions(files, capsys):
    code, out, _ = run(["solve", "ris", "--instance", files["fig"], "--lambda", "-1"], capsys)
    assert code == 0 and json.loads(out)["w_opt"] == 8
    code, out, _ = run(["solve", "ris", "--instance", files["fig"], "--lambda", "-11"], capsys)
    assert json.loads(out)["feasible"] is False
    code, out, _ = run(["reduce", "sat2rwss", "--cnf", files["cnf"], "--r", "2"], capsys)
    assert json.loads(out)["threshold"] == 80
    code, out, _ = run(["reduce", "sat2rbm", "--cnf", files["cnf"]], capsys)
    body = json.loads(out)
    assert body["target_matching_size"] == 4
    assert build_instance(body["instance"]).system.n == 10


def test_cli_exit_codes(files, tmp_path, capsys):
    code, _, err = run(["solve", "rp", "--instance", str(tmp_path / "missing.json")], capsys)
    assert code == 2 and json.loads(err)["error"] == "input"
    code, _, err = run(["solve", "rmb", "--instance", files["fig"]], capsys)
    assert code == 2 and len(err.strip().splitlines()) == 1
    code, _, _ = run(["solve", "nonsense"], capsys)
    assert code == 2
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"format_version": 1, "type": "explicit", "n": 17, "maximal_sets": [list(range(17))]}))
    code, _, err = run(["solve", "rp", "--instance", str(big)], capsys)
    assert code == 3 and json.loads(err)["error"] == "budget"


def test_cli_out_file(files, tmp_path, capsys):
    target = tmp_path / "sol.json"
    code, out, _ = run(["solve", "ris", "--instance", files["fig"], "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert parse_solution(target.read_text())["robust_value"] == 18
