import io
import json
import subprocess
import sys

import numpy as np
import pytest

from singroot.cli import EXIT_BREADTH, EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_PARSE, main, perturbed_guess


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def write(tmp_path, text, name="sys.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_report(tmp_path):
    f = write(tmp_path, "name: sq\nvars: x\npoly: x^2\nroot: 0\nguess: 0.01\n")
    code, out = run(["run", f, "--tol", "0.5"])
    assert code == EXIT_OK
    assert "sweep" in out and "digits: 2.0 -> 16.0" in out and "status: converged" in out


def test_json_output(tmp_path):
    f = write(tmp_path, "vars: x\npoly: x^2\nroot: 0\nguess: 0.01\n")
    code, out = run(["run", f, "--tol", "0.5", "--json"])
    data = json.loads(out)
    assert code == 0 and data["status"] == "converged"
    assert data["sweeps"][0]["mu"] == 2 and data["sweeps"][0]["x"] == [[0.0, 0.0]]


def test_perturb_is_seeded():
    a = perturbed_guess([1, 2], 1e-2, 7)
    b = perturbed_guess([1, 2], 1e-2, 7)
    np.testing.assert_array_equal(a, b)
    assert np.linalg.norm(a - [1, 2]) == pytest.approx(1e-2)
    assert np.all(a.imag == 0)


def test_deterministic_reports():
    _, a = run(["bench", "Ojika1", "--json"])
    _, b = run(["bench", "Ojika1", "--json"])
    strip = lambda s: [{k: v for k, v in d.items() if k != "seconds"} for d in [json.loads(s)]]
    assert strip(a) == strip(b)


def test_parse_error_exit(tmp_path, capsys):
    f = write(tmp_path, "vars: x, y\npoly: x^\n")
    code, _ = run(["run", f])
    assert code == EXIT_PARSE
    assert "line 2" in capsys.readouterr().err
    assert run(["run", str(tmp_path / "missing.txt")])[0] == EXIT_PARSE
    f = write(tmp_path, "vars: x\npoly: x^2\n", "noguess.txt")
    assert run(["run", f])[0] == EXIT_PARSE
    assert run(["run", f, "--tol", "abc"])[0] == EXIT_PARSE
    assert run(["frobnicate"])[0] == EXIT_PARSE


def test_breadth_violation_exit(tmp_path):
    f = write(tmp_path, "vars: x, y\npoly: x^2\npoly: y^2\nguess: 0.001, 0.001\n")
    assert run(["run", f, "--tol", "1e-2", "--max-sweeps", "3"])[0] == EXIT_BREADTH


def test_no_convergence_exit(tmp_path):
    f = write(tmp_path, "vars: x, y\npoly: x^2 - y\npoly: y^2\nroot: 0, 0\nguess: 0.01, 0.001\n")
    assert run(["run", f, "--max-sweeps", "1"])[0] == EXIT_NO_CONVERGENCE


def test_regular_root_without_fallback(tmp_path):
    f = write(tmp_path, "vars: x, y\npoly: x - 1\npoly: y + 2\nguess: 1.01, -2\n")
    assert run(["run", f, "--tol", "1e-4"])[0] == EXIT_OK
    assert run(["run", f, "--tol", "1e-4", "--no-fallback-newton", "--max-sweeps", "2"])[0] == EXIT_BREADTH


def test_bench_and_list():
    code, out = run(["bench", "Ojika3"])
    assert code == EXIT_OK and "Ojika3" in out
    code, out = run(["list"])
    assert code == EXIT_OK and "Decker2" in out and "mu=4" in out


def test_module_entry_point(tmp_path):
    f = write(tmp_path, "vars: x\npoly: x^2\nguess: 0.01\n")
    proc = subprocess.run([sys.executable, "-m", "singroot", "run", f, "--tol", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0 and "status: converged" in proc.stdout
