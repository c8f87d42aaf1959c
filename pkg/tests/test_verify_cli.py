import json
import subprocess
import sys

import pytest

from ellsix.cli import EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, evaluate, main
from ellsix.verify import (SUITES, ConfigError, SamplingError, SuiteConfig, condition_limit,
                           load_config, report_csv, report_json, run_suite, sample_params,
                           substream)


# ---------------------------------------------------------------- configuration

def test_load_config_text():
    cfg = load_config(text="""
[verify]
seed = 17
threads = 2
suites = theta_kernel, ebt   ; two suites
[ranges]
p_max = 0.3
[caps]
sixj_size = 1
[tolerances]
ebt = 1e-7
[trials]
ebt = 4
""")
    assert cfg.seed == 17 and cfg.threads == 2
    assert cfg.suites == ["theta_kernel", "ebt"]
    assert cfg.p_max == 0.3 and cfg.caps["sixj_size"] == 1
    assert cfg.tolerance_for(SUITES["ebt"]) == 1e-7
    assert cfg.trials_for(SUITES["ebt"]) == 4
    assert cfg.trials_for(SUITES["theta_kernel"]) == SUITES["theta_kernel"].trials


@pytest.mark.parametrize("text", [
    "[bogus]\nx = 1\n",
    "[verify]\ncolour = red\n",
    "[verify]\nseed = -1\n",
    "[verify]\nthreads = 0\n",
    "[ranges]\np_max = 1.5\n",
    "[ranges]\nq_min = 0.9\nq_max = 0.5\n",
    "[caps]\nsixj_size = 3\n",
    "[caps]\nwidth = 3\n",
    "[tolerances]\nebt = 0\n",
    "[tolerances]\nnot_a_suite = 1e-3\n",
    "[trials]\nebt = -2\n",
    "[verify]\nseed = abc\n",
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        load_config(text=text)


def test_config_file_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))


def test_condition_limit_tracks_tolerance():
    assert condition_limit(1e-7) == 1e5
    assert condition_limit(1e-10) < 1e4
    assert condition_limit(1e-30) == 1e3


# ---------------------------------------------------------------- sampling

def test_sample_params_deterministic_and_distinct():
    a = sample_params(SuiteConfig(seed=0), "phi")
    b = sample_params(SuiteConfig(seed=0), "phi")
    c = sample_params(SuiteConfig(seed=1), "phi")
    d = sample_params(SuiteConfig(seed=2), "phi")
    assert a == b
    assert c != d
    assert abs(a["p"]) <= 0.5 and 0.4 <= abs(a["q"]) <= 0.9


def test_sample_params_exhaustion_names_denominator():
    cfg = SuiteConfig(q_min=1.0, q_max=1.0, q_arg_max=0.0)
    with pytest.raises(SamplingError, match="theta\\(q\\)"):
        sample_params(cfg, "phi")


def test_substreams_are_independent_of_order():
    x = [substream(3, "ebt", i).random() for i in range(4)]
    y = [substream(3, "ebt", i).random() for i in reversed(range(4))]
    assert x == y[::-1]
    assert len(set(x)) == 4


# ---------------------------------------------------------------- running

def _small(**kw):
    cfg = SuiteConfig(suites=["theta_kernel", "ft_jackson", "weights_symmetry"], **kw)
    cfg.trial_overrides = {"theta_kernel": 30, "ft_jackson": 6, "weights_symmetry": 2}
    return cfg


def test_run_suite_report_shape():
    rep = run_suite(_small())
    assert rep["passed"] is True and rep["errored"] is False
    assert [r["suite"] for r in rep["suites"]] == ["theta_kernel", "ft_jackson", "weights_symmetry"]
    for r in rep["suites"]:
        assert set(r) >= {"suite", "anchor", "trials", "max_residual", "tolerance", "rejected",
                          "residuals", "passed", "wall_time"}
        assert len(r["residuals"]) == r["trials"]
        assert r["max_residual"] == max(r["residuals"])
    assert "residuals" not in json.loads(report_json(rep))["suites"][0]
    assert "residuals" in json.loads(report_json(rep, with_residuals=True))["suites"][0]
    lines = report_csv(rep).splitlines()
    assert lines[0] == "suite,trial,residual" and len(lines) == 1 + 30 + 6 + 2


def test_threads_do_not_change_residuals():
    a = run_suite(_small(threads=1))
    b = run_suite(_small(threads=4))
    assert report_csv(a) == report_csv(b)


def test_empty_selection():
    rep = run_suite(SuiteConfig(suites=[]))
    assert rep["suites"] == [] and rep["passed"] is True


def test_tolerance_override_fails():
    cfg = SuiteConfig(suites=["ft_jackson"], tolerances={"ft_jackson": 1e-30})
    cfg.trial_overrides = {"ft_jackson": 5}
    rep = run_suite(cfg)
    assert rep["passed"] is False


# ---------------------------------------------------------------- command line

def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_verify_pass_and_outputs(tmp_path, capsys):
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    code, out, _ = _run(["verify", "--suite", "ebt", "--trials", "5", "--seed", "3",
                         "--json", str(js), "--csv", str(cs)], capsys)
    assert code == EXIT_OK
    assert "PASS" in out
    rep = json.loads(js.read_text())
    assert rep["seed"] == 3 and rep["suites"][0]["suite"] == "ebt"
    assert cs.read_text().startswith("suite,trial,residual\n")


def test_cli_verify_deliberate_failure(capsys):
    code, out, _ = _run(["verify", "--suite", "ft_jackson", "--trials", "5",
                         "--tolerance", "ft_jackson=1e-30"], capsys)
    assert code == EXIT_FAIL
    assert "FAIL" in out


def test_cli_verify_empty_selection(capsys):
    code, _, _ = _run(["verify", "--suite", "", "-q"], capsys)
    assert code == EXIT_OK


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "nope"],
    ["verify", "--tolerance", "ebt"],
    ["verify", "--tolerance", "ebt=-1"],
    ["verify", "--config", "/nonexistent/cfg.ini"],
    ["verify", "--threads", "0"],
])
def test_cli_verify_usage_errors(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == EXIT_USAGE
    assert "error" in err


def test_cli_verify_with_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[verify]\nseed = 5\nsuites = ebt\ntrials = 3\n")
    code, out, _ = _run(["verify", "--config", str(cfg)], capsys)
    assert code == EXIT_OK and "ebt" in out


def test_cli_argparse_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_eval_theta_zero(capsys):
    code, out, _ = _run(["eval", "theta", "--inline", '{"x": 1, "p": 0.1}'], capsys)
    assert code == EXIT_OK
    assert json.loads(out) == {"re": 0.0, "im": 0.0}


def test_eval_r6j_parity(capsys):
    args = {"S": [0], "T": [], "U": [], "V": [], "w": [1.1], "z": [0.9], "lam": 0.3,
            "p": 0.1, "q": 0.5}
    code, out, _ = _run(["eval", "r6j", "--inline", json.dumps(args)], capsys)
    assert code == EXIT_OK
    assert json.loads(out) == {"re": 0.0, "im": 0.0, "reason": "parity"}


def test_eval_r6j_reports_method():
    args = {"S": [0], "T": [0], "U": [], "V": [], "w": [1.1], "z": [0.9], "lam": 0.3,
            "p": 0.1, "q": 0.5, "method": "rat2"}
    assert evaluate("r6j", args)["method"] == "rat2"


def test_eval_dwpf_matches_phi_with_prefactor(tmp_path, capsys):
    w, z = [[1.1, 0.2], [0.8, -0.3]], [[0.9, 0.1], "1.2-0.4j"]
    lam, p, q = {"re": 0.3, "im": 0.1}, 0.1, [0.55, 0.25]
    f = tmp_path / "a.json"
    f.write_text(json.dumps({"lam": lam, "w": w, "z": z, "p": p, "q": q}))
    code, out, _ = _run(["eval", "dwpf", "--args", str(f)], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    dw = complex(d["re"], d["im"])

    from ellsix.core import EllipticParams
    P = EllipticParams(p, complex(*q))
    lamc = 0.3 + 0.1j
    ph = evaluate("phi", {"w": w, "z": z, "a": [P.qpow(-lamc).real, P.qpow(-lamc).imag],
                          "p": p, "q": q})
    pref = P.theta(P.q) ** 2 / P.poch(P.qpow(-lamc - 2), 2)
    assert abs(dw - pref * complex(ph["re"], ph["im"])) <= 1e-12 * abs(dw)


@pytest.mark.parametrize("expr,args", [
    ("poch", {"x": 1.2, "k": 3, "q": 0.5}),
    ("pf", {"lam": 0.3, "w": [1.1], "z": [0.9], "q": 0.5,
            "boundary": {"a": [1], "b": [-1], "c": [-1], "d": [1]}}),
    ("vnm", {"a": 1.1, "b": [8, 1.3], "c": [1.2, 1.4, 1.5], "z": [0.9],
             "termination": ["b", 3], "q": 0.5}),
    ("f", {"u": [1], "y": [1], "a": 1.3, "b": 0.8, "c": 1.1, "x": [0.9], "N": [2], "q": 0.5}),
    ("g", {"u": [1], "y": [1], "a": 1.3, "b": 0.8, "c": 1.1, "x": [0.9], "N": [2], "q": 0.5}),
    ("weight", {"y": [1], "a": 1.3, "b": 0.8, "c": 1.1, "x": [0.9], "N": [2], "q": 0.5}),
    ("gamma", {"u": [1], "a": 1.3, "b": 0.8, "c": 1.1, "x": [0.9], "N": [2], "q": 0.5}),
])
def test_eval_other_expressions(expr, args):
    rec = evaluate(expr, args)
    assert set(rec) >= {"re", "im"}


def test_eval_singular(capsys):
    code, out, _ = _run(["eval", "poch", "--inline", '{"x": 0.5, "k": -1, "q": 0.5}'], capsys)
    assert code == EXIT_NUMERIC
    assert json.loads(out)["error"] == "singular"


@pytest.mark.parametrize("argv", [
    ["eval", "theta"],
    ["eval", "theta", "--inline", "{}", "--args", "x.json"],
    ["eval", "theta", "--inline", "{not json"],
    ["eval", "theta", "--inline", '{"x": "abc"}'],
    ["eval", "theta", "--inline", "[1, 2]"],
    ["eval", "nosuch", "--inline", "{}"],
    ["eval", "poch", "--inline", '{"x": 1.1, "k": 1.5, "q": 0.5}'],
    ["eval", "poch", "--inline", '{"x": 1.1, "k": 1}'],
    ["eval", "theta", "--inline", '{"x": 1.1, "p": 2}'],
    ["eval", "r6j", "--inline", '{"S": [], "T": [], "U": [], "V": [], "w": [], "z": [], '
                                '"lam": 0, "q": 0.5, "method": "magic"}'],
])
def test_eval_usage_errors(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == EXIT_USAGE
    assert err.startswith("ellsix: error:")


def test_suites_listing(capsys):
    code, out, _ = _run(["suites"], capsys)
    assert code == EXIT_OK
    assert len(out.splitlines()) == len(SUITES)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ellsix", "eval", "theta", "--inline",
                           '{"x": 0.5, "p": 0}'], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"re": 0.5, "im": 0.0}
