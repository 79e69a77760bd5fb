import json

import pytest

from setrisk import dd
from setrisk._rational import q
from setrisk.cli import main
from setrisk.polytope import UpperPoly

BASE = {
    "tree": {"m": 1, "K": 2, "dt": ["1/4", "1/4"]},
    "market": {"S0": ["1"], "up": ["2"], "lam": ["1/10"]},
    "payoff": {"kind": "exchange"},
    "verify": {"samples": 20, "seed": 5},
}

D3 = {
    "tree": {"m": 2, "K": 2},
    "market": {"S0": [1, 2], "up": [2, "3/2"], "lam": ["1/10", "1/20"]},
    "payoff": {"kind": "basket_put", "strike": "3"},
    "verify": {"samples": 10, "seed": 1},
}


def write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, data, *args, out="out"):
    cfg = write_config(tmp_path, data)
    return main([args[0], "--config", cfg, "--out", str(tmp_path / out), *args[1:]])


def numbers_are_strings(obj):
    if isinstance(obj, dict):
        return all(numbers_are_strings(v) for k, v in obj.items() if k not in ("node", "level", "dim", "path"))
    if isinstance(obj, list):
        return all(numbers_are_strings(v) for v in obj)
    return not isinstance(obj, (int, float)) or isinstance(obj, bool)


def test_risk_writes_levels(tmp_path):
    assert run(tmp_path, BASE, "risk") == 0
    out = tmp_path / "out"
    for k in range(3):
        data = json.loads((out / f"risk_level_{k}.json").read_text())
        assert len(data["nodes"]) == 2**k
        assert numbers_are_strings(data["nodes"])
    root = json.loads((out / "risk_level_0.json").read_text())["nodes"][0]["set"]
    assert root["H"] == [{"a": ["10", "9"], "b": "3978/1225"}, {"a": ["10", "11"], "b": "5746/1225"}]
    rows = (out / "scalarizations.csv").read_text().splitlines()
    assert rows[0] == "level,node,w,value"
    assert "0,0,1 1,2431/6125" in rows
    summary = json.loads((out / "summary.json").read_text())
    assert [lvl["nodes"] for lvl in summary["levels"]] == [1, 2, 4]


def test_zero_table_gives_cones(tmp_path):
    data = dict(BASE, payoff={"kind": "table", "values": [[0, 0]] * 4})
    assert run(tmp_path, data, "risk") == 0
    leaves = json.loads((tmp_path / "out" / "risk_level_2.json").read_text())["nodes"]
    top = UpperPoly.from_json(leaves[3]["set"])
    # two up moves: mid 4, bid 18/5, ask 22/5
    assert top == UpperPoly.from_hrep(2, [((1, q("18/5")), 0), ((1, q("22/5")), 0)])


@pytest.mark.parametrize("broken", [
    {k: v for k, v in BASE.items() if k != "market"},
    dict(BASE, payoff={"kind": "nope"}),
    dict(BASE, market={"S0": ["1"], "up": ["1/2"], "lam": ["1/10"]}),
    dict(BASE, tree={"m": 1, "K": 1, "dt": ["2"]}),
    dict(BASE, payoff={"kind": "table", "values": [[0, 0]]}),
    dict(BASE, r=["1", "0"]),
])
def test_bad_config_exit_2(tmp_path, broken):
    assert run(tmp_path, broken, "risk") == 2


def test_missing_config_file(tmp_path):
    assert main(["risk", "--config", str(tmp_path / "none.json")]) == 2


def test_driver_closed_form_verdict(tmp_path):
    assert run(tmp_path, BASE, "driver", "--t", "1", "--z", '{"1": ["1", "0"]}') == 0
    data = json.loads((tmp_path / "out" / "driver_t1.json").read_text())
    assert [v["member"] for v in data["closed_form"]] == [True, True]


def test_driver_zero_and_d3(tmp_path):
    assert run(tmp_path, BASE, "driver", "--t", "0") == 0
    assert run(tmp_path, D3, "driver", "--t", "1", "--z", '{"1": [1, 0, 0], "12": ["1/2", 1, -1]}', out="o3") == 0
    data = json.loads((tmp_path / "o3" / "driver_t1.json").read_text())
    assert len(data["closed_form"]) == 4 and all(v["member"] for v in data["closed_form"])


@pytest.mark.parametrize("z", ['{"3": [1, 0]}', '{"1": [1]}', '[1, 2]', '{"1": [0.5, 1]}'])
def test_driver_bad_z(tmp_path, z):
    assert run(tmp_path, BASE, "driver", "--t", "1", "--z", z) == 2


def test_driver_bad_time(tmp_path):
    assert run(tmp_path, BASE, "driver", "--t", "2") == 2


def test_verify_passes_and_is_deterministic(tmp_path):
    assert run(tmp_path, BASE, "verify", out="a") == 0
    assert run(tmp_path, BASE, "verify", out="b") == 0
    for name in ("verify_bsdi.json", "verify_svbsde.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = json.loads((tmp_path / "a" / "verify_svbsde.json").read_text())
    assert report["ok"] and len(report["backstep"]) == 2


def test_verify_workers_same_output(tmp_path):
    assert run(tmp_path, BASE, "verify", "bsdi", out="a") == 0
    assert run(tmp_path, BASE, "verify", "bsdi", "--workers", "2", out="b") == 0
    assert (tmp_path / "a" / "verify_bsdi.json").read_bytes() == (tmp_path / "b" / "verify_bsdi.json").read_bytes()


def test_replay_of_corrupted_risk_file(tmp_path):
    assert run(tmp_path, BASE, "risk", out="r") == 0
    path = tmp_path / "r" / "risk_level_1.json"
    data = json.loads(path.read_text())
    data["nodes"][0]["set"]["H"][0]["b"] = "7"
    data["nodes"][0]["set"].pop("V")
    path.write_text(json.dumps(data))
    code = run(tmp_path, dict(BASE, verify={"bsdi": False, "svbsde": False}), "verify", "--replay",
               str(tmp_path / "r"), out="v")
    assert code == 1
    report = json.loads((tmp_path / "v" / "verify_replay.json").read_text())
    assert report["mismatches"][0]["node"] == 1


def test_plotdata(tmp_path):
    assert run(tmp_path, BASE, "plotdata", "--level", "0") == 0
    rows = (tmp_path / "out" / "plot_level_0.csv").read_text().splitlines()
    assert rows[0] == "level,node,kind,x0,x1"
    assert any(",vertex," in r for r in rows) and any(",ray," in r for r in rows)
    assert run(tmp_path, BASE, "plotdata", "--level", "2", out="leaf") == 0


def test_plotdata_rejects_d4(tmp_path):
    data = {
        "tree": {"m": 3, "K": 1},
        "market": {"S0": [1, 1, 1], "up": [2, 2, 2], "lam": [0, 0, 0]},
        "payoff": {"kind": "table", "values": [[0, 0, 0, 0]] * 8},
    }
    assert run(tmp_path, data, "plotdata", "--level", "0") == 2


def test_max_dim_flag(tmp_path):
    old = dd.MAX_DIM
    try:
        assert run(tmp_path, BASE, "risk", "--max-dim", "1") == 2
    finally:
        dd.set_max_dim(old)
