from __future__ import annotations

import json

import numpy as np
import pytest

from orbithull.cli import main
from orbithull.matcore import matrix_to_json


@pytest.fixture
def write(tmp_path):
    def _write(name, matrix):
        path = tmp_path / name
        obj = matrix if isinstance(matrix, (list, dict)) else matrix_to_json(matrix)
        path.write_text(json.dumps(obj))
        return str(path)

    return _write


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_check_majorization_exit_codes(write, capsys):
    a = write("a.json", np.diag([2.0, 1, 1]))
    b = write("b.json", np.diag([3.0, 1, 0]))
    code, report = run(["check-majorization", a, b], capsys)
    assert code == 0
    assert report["result"]["partial_sums"] and report["result"]["level_sets"]
    assert report["result"]["slack"] == pytest.approx([1, 1, 0])
    code, report = run(["check-majorization", b, a], capsys)
    assert code == 1
    assert report["result"]["first_violation"] == 0


def test_non_hermitian_input_is_exit_2(write, capsys):
    bad = write("bad.json", [[0.0, 1.0], [0.0, 0.0]])
    ok = write("ok.json", np.eye(2))
    assert main(["check-majorization", bad, ok]) == 2
    assert "error" in capsys.readouterr().err


def test_malformed_and_missing_files(write, tmp_path, capsys):
    ok = write("ok.json", np.eye(2))
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    assert main(["check-majorization", str(garbage), ok]) == 2
    assert main(["check-majorization", str(tmp_path / "missing.json"), ok]) == 2
    three = write("three.json", np.eye(3))
    assert main(["check-majorization", three, ok]) == 2
    assert main(["membership", ok, ok, "--orbit", "sideways"]) == 2
    assert main(["membership", ok, ok, "--tol", "-1"]) == 2
    capsys.readouterr()


def test_certify_verify_round_trip(write, tmp_path, capsys):
    rng = np.random.default_rng(0)
    B = np.diag(rng.standard_normal(4))
    U = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    A = 0.4 * B + 0.6 * U @ B @ U.conj().T
    a = write("a.json", A)
    b = write("b.json", B)
    cert_path = tmp_path / "cert.json"
    assert main(["certify", a, b, "--output", str(cert_path)]) == 0
    assert main(["verify", str(cert_path)]) == 0
    capsys.readouterr()
    # tamper with a weight
    report = json.loads(cert_path.read_text())
    report["result"]["certificate"]["weights"][0] += 0.05
    cert_path.write_text(json.dumps(report))
    assert main(["verify", str(cert_path)]) == 1
    capsys.readouterr()


def test_certify_non_majorized(write, capsys):
    a = write("a.json", np.diag([3.0, 1, 0]))
    b = write("b.json", np.diag([2.0, 1, 1]))
    code, report = run(["certify", a, b], capsys)
    assert code == 1
    assert report["result"]["index"] == 0


def test_certify_equal_pair_single_term(write, capsys):
    b = write("b.json", np.diag([3.0, 1, 0]))
    code, report = run(["certify", b, b], capsys)
    assert code == 0
    assert len(report["result"]["certificate"]["weights"]) == 1


def test_membership_exit_codes(write, capsys):
    B = np.diag([1.0, -1.0, 2.0, -2.0])
    b = write("b.json", B)
    shifted = write("s.json", B + np.eye(4))
    code, report = run(["membership", b, b], capsys)
    assert code == 0 and report["result"]["status"] == "inside"
    code, report = run(["membership", shifted, b], capsys)
    assert code == 1
    assert report["result"]["lower_bound"] == pytest.approx(2.0, abs=1e-9)


def test_membership_heuristic_undecided(write, capsys):
    rng = np.random.default_rng(2)
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = write("b.json", B)
    far = write("far.json", B + 5 * np.eye(3))
    code, report = run(["membership", far, b, "--max-iter", "20", "--restarts", "2"], capsys)
    assert code == 3
    assert report["result"]["status"] == "undecided"


def test_duel_exit_codes(write, capsys):
    half = write("half.json", np.diag([0.5, 0.5]))
    proj = write("proj.json", np.diag([1.0, 0.0]))
    five = write("five.json", np.diag([5.0, 5.0]))
    assert run(["duel", half, proj, five], capsys)[0] == 0
    assert run(["duel", proj, half, half], capsys)[0] == 1
    rng = np.random.default_rng(3)
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = write("nb.json", B)
    a = write("na.json", B + 4 * np.eye(3))
    assert run(["duel", a, b, b, "--restarts", "2"], capsys)[0] == 3


def test_weighted_duel(write, capsys):
    half = write("half.json", np.diag([0.5, 0.5]))
    proj = write("proj.json", np.diag([1.0, 0.0]))
    five = write("five.json", np.diag([5.0, 5.0]))
    rho = write("rho.json", np.eye(2) / 2)
    code, report = run(["duel", half, proj, five, "--state", rho], capsys)
    assert code == 0 and report["result"]["faithful"]
    bad_rho = write("bad_rho.json", np.eye(2))
    assert main(["duel", half, proj, five, "--state", bad_rho]) == 2


@pytest.mark.parametrize(
    "name,extra",
    [("c2-counterexample", []), ("halfspace", ["--trials", "500"]), ("inclusion-chain", ["--trials", "10"])],
)
def test_demos_pass(name, extra, capsys):
    code, report = run(["demo", name, *extra], capsys)
    assert code == 0
    assert report["command"] == f"demo {name}"


def test_equivalence_demo_small(capsys):
    code, report = run(["demo", "equivalence-suite", "--trials", "3"], capsys)
    assert code == 0
    assert report["result"]["agreement_rate"] == 1.0


def test_unknown_demo(capsys):
    assert main(["demo", "nope"]) == 2
    capsys.readouterr()


def test_report_is_deterministic_modulo_timestamp(write, capsys):
    B = np.diag([1.0, -1.0, 2.0])
    b = write("b.json", B)
    s = write("s.json", B + 0.1 * np.eye(3))
    _, first = run(["membership", s, b, "--seed", "5"], capsys)
    _, second = run(["membership", s, b, "--seed", "5"], capsys)
    first.pop("timestamp")
    second.pop("timestamp")
    assert first == second
    assert first["config"]["seed"] == 5
    assert "tolerances" in first
