import csv
import math
import os

import pytest
import tomli
from hypothesis import given
from hypothesis import strategies as st

from weibull_relay.cli import bundled_scenarios, main
from weibull_relay.cli import runner as runner_mod
from weibull_relay.cli.config import (ConfigParseError, ConfigValidationError, load_scenario,
                                      parse_scenario, roundtrip, scenario_to_toml)
from weibull_relay.cli.report import ReportError, check_csv, report_agreement
from weibull_relay.cli.units import UnitError, format_quantity, parse_quantity
from weibull_relay.specfun import NonConvergenceError

SMALL = """
[scenario]
name = "small"
methods = ["exact", "asymptotic", "mc"]

[chain]
hops = 2
beta = 2.0
distance = ["80 m", "120 m"]
bandwidth = "200 MHz"
eirp = "20 dBm"

[sweep]
variable = "eirp"
start = "10 dBm"
stop = "40 dBm"
points = 4

[[metrics]]
kind = "outage"
gamma_th = "0 dB"

[[metrics]]
kind = "ber"
M = 16

[mc]
trials = 20000
seed = 4
"""


def _write(tmp_path, text, name="s.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# --- units ------------------------------------------------------------------------

@pytest.mark.parametrize("text,quantity,value", [
    ("23 dBm", "power_dbm", 23.0), ("1 W", "power_dbm", 30.0), ("200 MHz", "frequency_hz", 2e8),
    ("0.3km", "distance_m", 300.0), ("-174 dBm/Hz", "psd_dbm_hz", -174.0),
    ("73 GHz", "frequency_ghz", 73.0), ("500 mW", "power_w", 0.5), ("1e-3 dB/m", "loss_db_per_m", 1e-3),
])
def test_parse_quantity(text, quantity, value):
    assert parse_quantity(text, quantity) == pytest.approx(value)


@pytest.mark.parametrize("text,quantity", [
    ("23", "power_dbm"), (23.0, "power_dbm"), ("23 dbm", "power_dbm"), ("200 MHz", "power_dbm"),
    ("1 m m", "distance_m"), ("0 W", "power_dbm"), ("abc m", "distance_m"),
])
def test_parse_quantity_is_strict(text, quantity):
    with pytest.raises(UnitError):
        parse_quantity(text, quantity)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_format_roundtrip(v):
    for q in ("power_dbm", "ratio_db", "distance_m", "frequency_ghz"):
        assert parse_quantity(format_quantity(v, q), q) == v


# --- config ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(bundled_scenarios()))
def test_bundled_scenarios_roundtrip(name):
    sc = load_scenario(bundled_scenarios()[name])
    assert roundtrip(sc) == sc
    assert scenario_to_toml(roundtrip(sc)) == scenario_to_toml(sc)


def test_eight_bundled_scenarios():
    assert len(bundled_scenarios()) == 8


@given(st.floats(-20, 60), st.floats(1.0, 900.0), st.integers(2, 30), st.floats(0.5, 6.0))
def test_generated_scenario_roundtrip(eirp, dist, points, beta):
    data = tomli.loads(SMALL)
    data["chain"]["eirp"] = format_quantity(eirp, "power_dbm")
    data["chain"]["distance"] = format_quantity(dist, "distance_m")
    data["chain"]["beta"] = beta
    data["sweep"]["points"] = points
    sc = parse_scenario(data)
    assert roundtrip(sc) == sc


@pytest.mark.parametrize("mutate", [
    lambda d: d["metrics"][1].update(M=8),
    lambda d: d["sweep"].update(points=1),
    lambda d: d["scenario"].update(methods=[]),
    lambda d: d["chain"].update(eirp="20"),
    lambda d: d["chain"].update(distance=["1 m", "2 m", "3 m"]),
    lambda d: d["sweep"].update(variable="frequency"),
    lambda d: d["metrics"][0].update(gamma_th=1.0),
    lambda d: d["metrics"].append({"kind": "ber", "M": 4, "color": "red"}),
    lambda d: d.update(extra={}),
    lambda d: d["mc"].update(trials=0),
    lambda d: d["chain"].pop("beta"),
])
def test_validation_errors(mutate):
    data = tomli.loads(SMALL)
    mutate(data)
    with pytest.raises(ConfigValidationError):
        parse_scenario(data)


def test_parse_error(tmp_path):
    with pytest.raises(ConfigParseError):
        load_scenario(_write(tmp_path, "[scenario\nname = 1"))
    with pytest.raises(ConfigParseError):
        load_scenario(str(tmp_path / "missing.toml"))


# --- run --------------------------------------------------------------------------------

def test_run_writes_csv_schema(tmp_path):
    out = tmp_path / "out"
    assert main(["run", _write(tmp_path, SMALL), "--out", str(out)]) == 0
    files = sorted(os.listdir(out))
    assert files == ["small__base__ber_M16.csv", "small__base__outage.csv"]
    with open(out / "small__base__ber_M16.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["eirp_dbm", "exact", "asymptotic", "mc", "mc_half_width"]
    assert [float(r[0]) for r in rows[1:]] == [10.0, 20.0, 30.0, 40.0]
    # twelve significant digits
    assert all(len(r[1].replace(".", "").replace("-", "").split("e")[0].lstrip("0")) <= 12
               for r in rows[1:])


def test_rerun_is_byte_identical(tmp_path):
    path = _write(tmp_path, SMALL)
    main(["run", path, "--out", str(tmp_path / "a"), "--seed", "17"])
    main(["run", path, "--out", str(tmp_path / "b"), "--seed", "17"])
    for name in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_sweep_matches_serial(tmp_path):
    path = _write(tmp_path, SMALL)
    main(["run", path, "--out", str(tmp_path / "a")])
    main(["run", path, "--out", str(tmp_path / "b"), "--workers", "2"])
    for name in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_methods_and_trials_override(tmp_path):
    out = tmp_path / "out"
    main(["run", _write(tmp_path, SMALL), "--out", str(out), "--methods", "exact", "--trials", "10"])
    with open(out / "small__base__outage.csv", encoding="utf-8") as fh:
        assert next(csv.reader(fh)) == ["eirp_dbm", "exact"]


def test_exit_codes(tmp_path, capsys):
    assert main(["run", _write(tmp_path, "[scenario\n", "bad.toml")]) == 2
    bad_m = SMALL.replace("M = 16", "M = 8")
    assert main(["run", _write(tmp_path, bad_m, "m8.toml"), "--out", str(tmp_path)]) == 3
    assert "modulation order" in capsys.readouterr().err


def test_nonconvergence_exit_names_point(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NonConvergenceError("stalled")
    monkeypatch.setattr(runner_mod, "evaluate", boom)
    code = main(["run", _write(tmp_path, SMALL), "--out", str(tmp_path / "o"), "--methods", "exact"])
    assert code == 4
    assert "eirp_dbm=10" in capsys.readouterr().err


def test_bundled_name_resolves(tmp_path):
    assert main(["run", "bler", "--out", str(tmp_path), "--methods", "exact"]) == 0
    assert len(os.listdir(tmp_path)) == 2


def test_selftest_passes():
    assert main(["selftest"]) == 0


# --- report -----------------------------------------------------------------------------

def _csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh).writerows(rows)
    return str(path)


def test_report_flags_corrupted_exact(tmp_path):
    good = _csv(tmp_path / "g.csv", [["eirp_dbm", "exact", "mc", "mc_half_width"],
                                     [0, 0.1, 0.1005, 0.001], [10, 0.01, 0.0101, 0.0005]])
    text, rate, _ = report_agreement([good])
    assert rate == 1.0
    bad = _csv(tmp_path / "b.csv", [["eirp_dbm", "exact", "mc", "mc_half_width"],
                                    [0, 0.5, 0.1005, 0.001], [10, 0.01, 0.0101, 0.0005]])
    text, rate, results = report_agreement([bad])
    assert rate == 0.5 and "FLAG eirp_dbm=0" in text
    assert main(["report", str(tmp_path)]) == 1


def test_report_errors(tmp_path):
    empty = _csv(tmp_path / "e.csv", [])
    with pytest.raises(ReportError):
        check_csv(empty)
    header_only = _csv(tmp_path / "h.csv", [["eirp_dbm", "exact", "mc", "mc_half_width"]])
    with pytest.raises(ReportError):
        check_csv(header_only)
    no_mc = _csv(tmp_path / "n.csv", [["eirp_dbm", "exact"], [0, 1]])
    with pytest.raises(ReportError):
        check_csv(no_mc)
    assert main(["report", str(tmp_path / "nowhere")]) == 1


def test_report_on_healthy_run(tmp_path, capsys):
    out = tmp_path / "out"
    main(["run", _write(tmp_path, SMALL), "--out", str(out)])
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert "overall: 8/8" in capsys.readouterr().out
