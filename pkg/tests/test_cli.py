import csv
import io
import json

import numpy as np
import pytest

from gefbounds import catalog as cat
from gefbounds.campaign import COLUMNS, Campaign, run_campaign, to_csv, to_json, trial_state
from gefbounds.cli import main, measure, roof_report
from gefbounds.qmat import StateError, make_rng, random_density, random_haar_pure
from gefbounds.roof import RoofConfig


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------- state files


@pytest.mark.parametrize("state", [
    random_haar_pure((2, 3, 2), make_rng(1)),
    random_density((2, 2, 2), 3, make_rng(2)),
    cat.werner(0.37),
])
def test_state_file_round_trip_is_bit_exact(state, tmp_path):
    path = tmp_path / "s.json"
    cat.save_state(state, path)
    back = cat.load_state(path)
    assert back.dims == state.dims
    a = getattr(state, "amplitudes", None)
    if a is None:
        assert np.array_equal(back.matrix, state.matrix)
    else:
        assert np.array_equal(back.amplitudes, a)


def test_loader_rejects_invalid_files():
    bad = [
        "not json",
        json.dumps({"dims": [2], "kind": "pure"}),
        json.dumps({"dims": [2, 2], "kind": "pure", "data": [[1, 0]] * 4}),
        json.dumps({"dims": [2, 2], "kind": "pure", "data": [[1, 0]] * 3}),
        json.dumps({"dims": [2], "kind": "mixed", "data": [[0.5, 0], [0.3, 0], [0, 0], [0.5, 0]]}),
        json.dumps({"dims": [2], "kind": "mixed", "data": [[1.5, 0], [0, 0], [0, 0], [-0.5, 0]]}),
        json.dumps({"dims": [2], "kind": "other", "data": [[1, 0], [0, 0]]}),
    ]
    for text in bad:
        with pytest.raises(StateError):
            cat.loads_state(text)


def test_loader_repairs_small_defects():
    m = np.diag([0.5 + 4e-9, 0.5])
    text = json.dumps({"dims": [2], "kind": "mixed",
                       "data": [[float(x), 0.0] for x in m.ravel()]})
    rho = cat.loads_state(text)
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-15)


def test_catalog_names_build():
    for name in cat.NAMES:
        state = cat.named_state(name)
        assert state.dims
    with pytest.raises(StateError):
        cat.named_state("nope")
    with pytest.raises(StateError):
        cat.werner(1.5)


# ------------------------------------------------------------------- campaign


def test_trial_states_are_reproducible():
    c = Campaign(seed=5, trials=3, kind="mixed", rank=(2, 8))
    a, b = trial_state(c, 2), trial_state(c, 2)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, trial_state(c, 1).matrix)


def test_campaign_validation():
    with pytest.raises(StateError):
        Campaign(kind="weird")
    with pytest.raises(StateError):
        Campaign(kind="mixed", rank=(2, 9))
    with pytest.raises(StateError):
        Campaign(ids=("NOPE",))


def test_workers_do_not_change_output():
    c = Campaign(seed=9, trials=4, kind="mixed", rank=(2, 3), ids=("T1", "M3U", "M3L0"),
                 roof=RoofConfig(restarts=1, max_evals=150))
    assert to_csv(run_campaign(c, 1)) == to_csv(run_campaign(c, 2))


def test_csv_and_json_reports():
    rows = run_campaign(Campaign(seed=1, trials=2))
    text = to_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert tuple(parsed[0]) == COLUMNS
    assert len(parsed) == 1 + len(rows)
    body = json.loads(to_json(rows))
    assert body["summary"]["records"] == len(rows)
    assert body["summary"]["violated"] == 0


# ------------------------------------------------------------------------ cli


def test_coeffs_command(capsys):
    code, out, _ = run(["coeffs"], capsys)
    assert code == 0
    assert "1/6 1/3" in out and "13/42" in out and "2/7 + 1/21*g2" in out
    assert "FAIL" not in out
    code, out, _ = run(["coeffs", "--format", "json"], capsys)
    assert json.loads(out)["ok"] is True


def test_catalog_command_writes_loadable_file(capsys, tmp_path):
    path = tmp_path / "w.json"
    assert run(["catalog", "w3", "--out", str(path)], capsys)[0] == 0
    assert cat.load_state(path).dims == (2, 2, 2)
    code, out, _ = run(["catalog", "--list"], capsys)
    assert code == 0 and "eb_ac2" in out


def test_measure_command(capsys):
    code, out, _ = run(["measure", "ghz", "--n", "3"], capsys)
    body = json.loads(out)
    assert code == 0
    assert body["gef_original"]["total"] == pytest.approx(1.0, abs=1e-12)
    assert body["gef_modified"]["total"] == pytest.approx(1.0, abs=1e-12)
    assert body["entropies"]["AB"] == pytest.approx(1.0, abs=1e-12)


def test_measure_library_on_werner():
    body = measure(cat.werner(0.9))
    assert body["gef"]["value"] == pytest.approx(0.7893549609887846, abs=1e-12)
    assert body["gef"]["estimate"] is False


def test_roof_command(capsys, tmp_path):
    path = tmp_path / "r.json"
    cat.save_state(cat.bell_with_noise(), path)
    code, out, _ = run(["roof", "--state", str(path), "--roof-restarts", "2"], capsys)
    body = json.loads(out)
    assert code == 0
    assert body["value"] == pytest.approx(5 / 6, abs=1e-6)
    assert body["diagnostics"]["gamma2"] == pytest.approx(0.5, abs=1e-6)
    assert sum(body["decomposition"]["probabilities"]) == pytest.approx(1.0)


def test_roof_eof_functional_and_strict(capsys):
    report = roof_report(cat.werner(0.9), "eof", RoofConfig(restarts=1, max_evals=2000))
    assert report["value"] == pytest.approx(0.7893549609887846, abs=5e-3)
    code, _, err = run(["roof", "werner", "--p", "0.9", "--functional", "eof",
                        "--roof-restarts", "1", "--roof-iters", "20", "--strict"], capsys)
    assert code == 1 and "converge" in err


def test_verify_command(capsys, tmp_path):
    path = tmp_path / "v.csv"
    code, _, err = run(["verify", "--seed", "3", "--trials", "3", "--out", str(path)], capsys)
    assert code == 0 and "violated=0" in err
    rows = list(csv.DictReader(open(path)))
    assert {r["trial"] for r in rows} == {"0", "1", "2"}
    assert {r["seed"] for r in rows} == {"3"}


def test_verify_reports_violations_with_exit_1(capsys):
    code, out, err = run(["verify", "bell_bell", "--ineq", "P4L1-0"], capsys)
    assert code == 1
    assert "violated" in out and "violated=1" in err


def test_invalid_input_exit_codes(capsys, tmp_path):
    assert run(["measure", "nope"], capsys)[0] == 2
    assert run(["verify", "--trials", "2"], capsys)[0] == 2
    assert run(["verify", "--seed", "1", "--dims", "2"], capsys)[0] == 2
    assert run(["verify", "--seed", "1", "--rank", "3-1"], capsys)[0] == 2
    assert run(["verify", "--seed", "1", "--ineq", "NOPE"], capsys)[0] == 2
    assert run(["measure", "--state", str(tmp_path / "missing.json")], capsys)[0] == 2
    assert run(["measure"], capsys)[0] == 2
    assert run(["roof", "w3", "--functional", "eof"], capsys)[0] == 2
    assert run([], capsys)[0] == 2
