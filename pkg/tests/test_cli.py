import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lqgnest import cli
from lqgnest import experiments as ex


def test_empty_config_gives_defaults(tmp_path):
    f = tmp_path / "c.ini"
    f.write_text("")
    spec = cli.parse_config(f, "rate_invariance")
    assert spec.params == {} and spec.seed == 0
    assert spec.resolved() == ex.REGISTRY["rate_invariance"].defaults


def test_duplicate_key_names_both_lines():
    text = "[experiment]\nname = rate_invariance\n\n[params]\ndraws = 3\n# note\ndraws = 4\n"
    with pytest.raises(cli.ConfigError, match="lines 5 and 7"):
        cli.parse_config_text(text)


@pytest.mark.parametrize("text,msg", [
    ("[experiment]\nname = nope\n", "unknown experiment"),
    ("[experiment]\nname = rate_invariance\n[params]\nfoo = 1\n", "line 4: unknown parameter"),
    ("[experiment]\nname = rate_invariance\n[extra]\na = 1\n", "unknown section"),
    ("[experiment]\nname = rate_invariance\n[params]\ndraws = many\n", "line 4"),
    ("draws = 3\n", "outside of any section"),
])
def test_config_errors(text, msg):
    with pytest.raises(cli.ConfigError, match=msg):
        cli.parse_config_text(text)


def test_samples_maps_to_sample_key():
    assert cli.ExperimentSpec("power_theta", samples=123).resolved()["n"] == 123
    assert cli.ExperimentSpec("rate_invariance", samples=5).resolved()["draws"] == 5


names = st.sampled_from(sorted(ex.REGISTRY))


@settings(max_examples=40, deadline=None)
@given(names, st.integers(0, 2**31), st.sampled_from(["json", "csv"]), st.integers(1, 4), st.data())
def test_render_parse_round_trip(name, seed, fmt, workers, data):
    defaults = ex.REGISTRY[name].defaults
    keys = data.draw(st.lists(st.sampled_from(sorted(defaults)), unique=True, max_size=3)) if defaults else []
    params = {}
    for k in keys:
        d = defaults[k]
        if isinstance(d, bool):
            params[k] = data.draw(st.booleans())
        elif isinstance(d, int):
            params[k] = data.draw(st.integers(1, 10**6))
        elif isinstance(d, float):
            params[k] = data.draw(st.floats(-1e6, 1e6, allow_nan=False))
    spec = cli.ExperimentSpec(name, params, seed=seed, format=fmt, workers=workers)
    assert cli.parse_config_text(cli.render_config(spec)) == spec


def test_unknown_experiment_exit_code(capsys):
    assert cli.main(["run", "nope"]) == 1
    assert cli.main(["run", "rate_invariance", "-p", "bogus=1"]) == 1


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for n in ex.REGISTRY:
        assert n in out


def test_deterministic_output_and_sidecar(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        assert cli.main(["run", "rate_invariance", "--format", "csv", "--out", str(f), "-p", "draws=2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().count(b"\r\n") > 2
    prov = json.loads((tmp_path / "a.csv.provenance.json").read_text())
    assert prov["params"]["draws"] == 2 and "wall_time_s" in prov
    j = tmp_path / "r.json"
    assert cli.main(["run", "rate_invariance", "--out", str(j), "-p", "draws=2", "--seed", "4"]) == 0
    obj = json.loads(j.read_text())
    assert obj["passed"] and obj["provenance"]["seed"] == 4 and obj["criterion"] == 11


def test_workers_do_not_change_results(tmp_path):
    outs = []
    for w in (1, 2):
        f = tmp_path / f"w{w}.json"
        assert cli.main(["run", "sigma_radius_consistency", "--out", str(f), "--workers", str(w), "-p", "n_pairs=6"]) == 0
        obj = json.loads(f.read_text())
        outs.append(obj["rows"])
    assert outs[0] == outs[1]


def test_failure_exit_code():
    assert cli.main(["run", "rate_invariance", "-p", "draws=1", "-p", "tol=1e-30"]) == 2


def test_console_entry():
    r = subprocess.run([sys.executable, "-m", "lqgnest.cli", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "rate_invariance" in r.stdout
