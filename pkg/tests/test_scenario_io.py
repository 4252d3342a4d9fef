import json
from pathlib import Path

import numpy as np
import pytest

from loadcoupling import (Network, Scenario, ScenarioError, SyntheticSpec, from_gain_table,
                          generate_synthetic, is_satisfiable, load_scenario, save_scenario)
from loadcoupling.scenario_io import dumps, loads, to_dict

DATA = Path(__file__).parent / "data"


def test_toy_fixture():
    scn = load_scenario(DATA / "toy_r2.json")
    assert scn.network.n == 2
    assert sorted(set(scn.network.gains.ravel())) == [1 / 3, 1.0]
    np.testing.assert_array_equal(scn.d_min, [2.0, 2.0])


def test_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    gains = rng.uniform(1e-12, 1.0, size=(3, 5)) * np.pi
    net = Network([[0, 3], [1], [2, 4]], gains, 1.234567890123e-13)
    scn = Scenario(net, rng.uniform(0.01, 1, size=5), p_cap=[1.5, 2.5, 3.5],
                   metadata={"bandwidth_hz": 180e3}, solver={"outer_tol": 1e-6})
    path = tmp_path / "s.json"
    save_scenario(scn, path)
    back = load_scenario(path)
    np.testing.assert_array_equal(back.network.gains, gains)
    np.testing.assert_array_equal(back.d_min, scn.d_min)
    np.testing.assert_array_equal(back.p_cap, scn.p_cap)
    assert back.network.noise_power == net.noise_power
    assert back.network.users == net.users
    assert dumps(back) == path.read_text()


def _doc():
    return to_dict(load_scenario(DATA / "toy_r1.json"))


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d.update(d_min=[1.0, 0.0]), "user 1"),
    (lambda d: d.update(d_min=[1.0, -2.0]), "user 1"),
    (lambda d: d["gains"][1].__setitem__(0, -0.5), "gain[1, 0]"),
    (lambda d: d["gains"][0].append(1.0), "cell 0"),
    (lambda d: d.update(n_cells=3), "users must list 3"),
    (lambda d: d.update(version=99), "version"),
    (lambda d: d.update(format="other"), "format"),
    (lambda d: d.pop("noise_power"), "noise_power"),
    (lambda d: d.update(users=[[0], [0]]), "user 0"),
    (lambda d: d.update(p_cap=[1.0, 0.0]), "cell 1"),
    (lambda d: d.update(solver={"bogus": 1}), "bogus"),
    (lambda d: d["gains"][0].__setitem__(1, "x"), "cell 0, user 1"),
])
def test_invalid_scenarios(mutate, needle):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ScenarioError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        loads(json.dumps(doc))


def test_rejects_nan_text():
    text = json.dumps(_doc()).replace("0.3333333333333333", "NaN", 1)
    with pytest.raises(ScenarioError, match="not finite"):
        loads(text)


def test_parse_error_has_position():
    with pytest.raises(ScenarioError, match="line 1"):
        loads("{not json")


def test_missing_file():
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario("/nonexistent/scenario.json")


def test_iap_options_from_scenario():
    scn = loads(json.dumps({**_doc(), "solver": {"outer_tol": 1e-7, "mode": "synchronous"},
                            "p_cap": 3.0}))
    opts = scn.iap_options(inner_tol=1e-11)
    assert opts.outer_tol == 1e-7 and opts.inner_tol == 1e-11
    assert opts.mode.value == "synchronous"
    np.testing.assert_array_equal(opts.p_cap, [3.0, 3.0])


def test_generator_is_deterministic():
    spec = SyntheticSpec(n_cells=6, users_per_cell=3, seed=42)
    assert dumps(generate_synthetic(spec)) == dumps(generate_synthetic(spec))
    other = SyntheticSpec(n_cells=6, users_per_cell=3, seed=43)
    assert dumps(generate_synthetic(spec)) != dumps(generate_synthetic(other))


def test_generator_single_cell():
    scn = generate_synthetic(SyntheticSpec(n_cells=1, users_per_cell=1, seed=0))
    assert scn.network.n == 1 and scn.network.num_users == 1
    assert scn.network.gains[0, 0] > 0


def test_generator_full_scale_is_satisfiable():
    scn = generate_synthetic(SyntheticSpec(n_cells=148, users_per_cell=10, seed=1))
    assert scn.network.gains.shape == (148, 1480)
    assert is_satisfiable(scn.network, scn.d_min).satisfiable


def test_generator_rejects_bad_spec():
    with pytest.raises(ScenarioError):
        SyntheticSpec(n_cells=0)
    with pytest.raises(ScenarioError):
        SyntheticSpec(exponent=0.0)


def test_from_gain_table():
    g_db = np.array([[-80.0, -100.0, -np.inf], [-95.0, -70.0, -90.0]])
    scn = from_gain_table(g_db, [0, 1, 1], 1e-12, 0.1)
    assert scn.network.users == ((0,), (1, 2))
    assert scn.network.gains[0, 2] == 0.0
    assert scn.network.gains[0, 0] == pytest.approx(1e-8)
