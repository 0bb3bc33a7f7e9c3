import math

import numpy as np
import pytest

from bangbang.lab.cli import main
from bangbang.lab.config import ConfigError, load_config, parse_config
from bangbang.lab.fitting import exp_beats_power, fit_scaling, fit_xy
from bangbang.lab.io import read_csv, rows_to_text
from bangbang.lab.report import classify, table1_report
from bangbang.lab.runner import run

BASE = {
    "sizes": [4, 8],
    "instances": [{"kind": "ramp"}],
    "algorithms": [{"kind": "QAOA", "protocol": "ramp"}],
}


def cfg(**over):
    d = {k: (list(v) if isinstance(v, list) else v) for k, v in BASE.items()}
    d.update(over)
    return parse_config(d)


def test_qaoa_ramp_sweep_rows():
    rows = run(cfg(sizes=[4, 8, 16, 32, 64]))
    assert [r.n for r in rows] == [4, 8, 16, 32, 64]
    assert all(abs(r.success - 1) < 1e-10 for r in rows)


def test_empty_sizes():
    assert run(cfg(sizes=[])) == []


def test_row_count_and_order():
    c = cfg(
        sizes=[8, 4],
        seeds=[1, 0],
        instances=[{"kind": "ramp"}, {"kind": "spike", "a": 0.5, "b": 0.5}],
        algorithms=[{"kind": "QAOA"}, {"kind": "SA", "rounds": 3, "budget_per_n2": 1, "exclude_sizes": [4]}],
    )
    rows = run(c)
    assert len(rows) == 2 * 2 * 2 * 2 - 2 * 2
    keys = [(r.instance, r.algorithm, r.n, r.seed) for r in rows]
    assert keys[0] == ("ramp", "QAOA-ramp", 8, 1)
    assert all(-1e-12 <= r.success <= 1 + 1e-12 for r in rows)


def test_rerun_is_bit_identical():
    c = cfg(
        sizes=[8, 12],
        seeds=[3],
        instances=[{"kind": "spike", "a": 0.5, "b": 0.5}],
        algorithms=[{"kind": "SA", "mode": "walkers", "walkers": 300, "rounds": 3, "budget_per_n2": 1},
                    {"kind": "BBSA", "protocol": "spike-hop", "mode": "walkers", "walkers": 300}],
    )
    a = rows_to_text(run(c))
    b = rows_to_text(run(c, threads=3))
    assert a == b
    assert "wall_time" not in a.splitlines()[0]
    assert a.endswith("\r\n")


@pytest.mark.parametrize(
    "patch, where",
    [
        ({"algorithms": [{"kind": "QAOA", "protocol": "nope"}]}, "algorithms[0].protocol"),
        ({"algorithms": [{"kind": "SA", "mode": "walkers", "walkers": -1}]}, "algorithms[0].walkers"),
        ({"algorithms": [{"kind": "SA", "bogus": 1}]}, "algorithms[0].bogus"),
        ({"instances": [{"kind": "spike", "a": 0.5}]}, "instances[0].b"),
        ({"instances": [{"kind": "ramp", "lambda": 1.0}]}, "instances[0].lambda"),
        ({"sizes": [4, "x"]}, "sizes[1]"),
        ({"algorithms": [{"kind": "SA", "schedule": {"temperatures": [[-1, 2]]}}]}, "algorithms[0].schedule"),
        ({"algorithms": [{"kind": "BBSA", "protocol": "schedule"}]}, "algorithms[0].schedule"),
    ],
)
def test_config_errors_name_the_key(patch, where):
    d = dict(BASE)
    d.update(patch)
    with pytest.raises(ConfigError) as err:
        parse_config(d)
    assert err.value.path == where


def test_fit_examples():
    x = np.arange(2, 40, dtype=float)
    r = fit_xy(x, 3 * np.log(x), "log")
    assert r.slope == pytest.approx(3) and r.r2 == pytest.approx(1)
    assert exp_beats_power(x, 2 ** (-0.3 * x))
    assert not exp_beats_power(x, x**-1.5)
    with pytest.raises(ValueError):
        fit_xy(x, -x, "power")
    with pytest.raises(ValueError):
        fit_xy(x[:2], x[:2], "log")
    rows = [{"n": n, "t": 2 * math.log(n) + 1} for n in (4, 8, 16, 32)]
    assert fit_scaling(rows, "n", "t", "log").r2 > 0.999


def test_classify():
    ns = np.array([16, 32, 64, 128])
    assert classify(ns, [0.9, 0.91, 0.9, 0.9], "success")[0] == "succeeds-flat"
    assert classify(ns, 2.0 ** (-0.1 * ns), "min_gap")[0] == "fails-exp-trend"
    assert classify(ns, ns**-1.0, "min_gap")[0] == "succeeds-poly"
    assert classify(ns, np.log(ns), "time_to_mass")[0] == "succeeds-poly"
    assert classify(ns, [1, 2, 3, math.inf], "time_to_mass")[0] == "fails-exp-trend"


def test_report_verdicts():
    c = parse_config({
        "sizes": [32, 64, 96, 128, 160, 192, 224, 256],
        "instances": [{"kind": "spike", "a": 0.5, "b": 0.75}, {"kind": "spike", "a": 0.6, "b": 0.4},
                      {"kind": "bush", "lambda": 1.0}],
        "algorithms": [{"kind": "QAOA", "exclude_sizes": [32]}, {"kind": "QAO", "measure": "gap"}],
    })
    got = {(l.instance, l.algorithm): l.verdict for l in table1_report(c)}
    assert got[("bush-lambda-1", "QAO-gap")] == "succeeds-poly"
    assert got[("spike-0.6-0.4", "QAO-gap")] == "fails-exp-trend"
    assert got[("spike-0.5-0.75", "QAOA-ramp")] == "succeeds-flat"
    assert got[("spike-0.6-0.4", "QAOA-ramp")] == "succeeds-flat"


def test_cli_run_and_fit(tmp_path):
    conf = tmp_path / "c.toml"
    conf.write_text('sizes = [16, 32, 64]\n[[instances]]\nkind = "bush"\n'
                    '[[algorithms]]\nkind = "BBSA"\nmeasure = "time-to-mass"\n')
    out = tmp_path / "r.csv"
    assert main(["run", str(conf), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["n"] for r in rows] == [16, 32, 64]
    assert main(["fit", str(out), "--y", "time_to_mass", "--model", "log"]) == 0
    assert load_config(conf).sizes == (16, 32, 64)
    assert main(["run", str(conf), "--n", "8", "--format", "jsonl", "--out", str(tmp_path / "r.jsonl")]) == 0


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('sizes = [4]\n[[instances]]\nkind = "ramp"\n[[algorithms]]\nkind = "NOPE"\n')
    assert main(["run", str(bad)]) == 2
    assert "algorithms[0].kind" in capsys.readouterr().err
    broken = tmp_path / "broken.toml"
    broken.write_text("sizes = [4\n")
    assert main(["run", str(broken)]) == 2
    assert main(["sweep", "--instance", "spike", "--algorithm", "QAOA", "--a", "0.5", "--b", "0.75",
                 "--n", "16", "--angles", "0.785398,1.570796"]) == 0
    assert main(["sweep", "--instance", "ramp", "--algorithm", "QAOA", "--n", "8",
                 "--angles", "[0.1, 0.2, 0.3]"]) == 2
    assert main(["oracle-check", "--costs", "2", "--max-n", "5"]) == 0


def test_cli_gap_scan_plot_data(tmp_path):
    assert main(["gap-scan", "--instance", "bush", "--lambda", "1", "--n", "8", "--plot-dir", str(tmp_path),
                 "--out", str(tmp_path / "g.csv")]) == 0
    tsv = (tmp_path / "gap_bush-lambda-1_n8.tsv").read_text().splitlines()
    assert tsv[0] == "u\tgap" and len(tsv) > 100
    assert read_csv(tmp_path / "g.csv")[0]["min_gap"] > 0
