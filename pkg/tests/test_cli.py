import csv
import io
import json
import math

import pytest

from defectwalk import cli
from defectwalk.config import (
    RunConfig,
    config_from_dict,
    initial_state,
    load_config,
    parse_anchors,
    parse_initial,
    parse_sites,
)
from defectwalk.errors import ConfigError, EigensolverFailure
from defectwalk.reporting import csv_text, format_value

S2 = 2**-0.5
PSTAR = {"p": [0.6], "q": [[0.8, 0.0]], "phi": [[[S2, 0.0], [S2, 0.0]]]}
H0 = {"p": [0.0], "q": [[1.0, 0.0]], "phi": [[S2, S2]]}
FLAT = {"p": [0.6], "q": [0.8], "phi": [[1.0, 0.0]]}
TWO_D = {"p": [0.6, 0.6], "q": [0.8, 0.8], "phi": [[0.5, 0.5], [0.5, 0.5]]}


@pytest.fixture
def write_config(tmp_path):
    def _write(params, **knobs):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"params": params, **knobs}))
        return str(path)

    return _write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# --- config parsing --------------------------------------------------------------


def test_defaults():
    cfg = config_from_dict({"params": PSTAR})
    assert (cfg.torus, cfg.steps, cfg.sign, cfg.horizon, cfg.sites) == (200, 100, 1, 4000, (-20, 20))


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        config_from_dict({"params": PSTAR, "bogus": 1})
    with pytest.raises(ConfigError, match="extra"):
        config_from_dict({"params": {**PSTAR, "extra": 0}})


@pytest.mark.parametrize(
    "knobs",
    [{"torus": 2}, {"torus": 5.5}, {"sign": "x"}, {"sites": "3..1"}, {"levels": 2}, {"sweep": {"q": [1]}}, {"initial": "0:(1)"}],
)
def test_bad_knobs(knobs):
    with pytest.raises(ConfigError):
        config_from_dict({"params": PSTAR, **knobs})


def test_parse_helpers():
    assert parse_sites("-10..10") == (-10, 10)
    assert parse_anchors("0,0;1,2") == ((0, 0), (1, 2))
    entries = parse_initial("0:(0.6,0.8i); 1:(0,-1e-3+2i)", 1)
    assert entries[(0,)][1] == 0.8j and entries[(1,)][1] == complex(-1e-3, 2)
    with pytest.raises(ConfigError):
        parse_initial("0,0:(1,0)", 1)
    with pytest.raises(ConfigError):
        parse_initial("0:(1,x)", 1)


def test_initial_state_default():
    cfg = config_from_dict({"params": TWO_D})
    psi = initial_state(cfg)
    assert psi.at((0, 0)).tolist() == [0, 1, 0, 0]


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(-0.0) == "0"
    assert format_value(math.inf) == "inf"
    assert csv_text(["a", "b"], [[1, None]]) == "a,b\n1,\n"


# --- commands -----------------------------------------------------------------------


def test_info_pstar(capsys, write_config):
    code, out, _ = run(capsys, "info", "--config", write_config(PSTAR))
    info = json.loads(out)
    assert code == 0
    assert info["band"] == pytest.approx([-0.8, 0.8])
    assert info["M_plus"] == 1 and info["M_minus"] == 1


def test_info_h0(capsys, write_config):
    info = json.loads(run(capsys, "info", "--config", write_config(H0))[1])
    assert info["full_circle"] and info["M_plus"] == 0 and info["M_minus"] == 0
    assert info["arc_endpoints"] == [0.0, math.pi]


def test_missing_phi(capsys, write_config):
    code, _, err = run(capsys, "info", "--config", write_config({"p": [0.6], "q": [0.8]}))
    assert code == 2 and "phi" in err


def test_spectrum_pstar(capsys, write_config, tmp_path):
    out_path = tmp_path / "spec.csv"
    code, out, _ = run(capsys, "spectrum", "--config", write_config(PSTAR), "--torus", "400", "--out", str(out_path))
    assert code == 0
    rows = read_csv(out_path.read_text())
    assert len(rows) == 800
    labels = [r["classification"] for r in rows]
    assert labels.count("plus_one") == 1 and labels.count("minus_one") == 1
    metrics = json.loads(out)
    assert metrics["hausdorff"] <= 0.05 and metrics["outliers"] == 0


def test_spectrum_small_and_flat(capsys, write_config):
    code, out, err = run(capsys, "spectrum", "--config", write_config(PSTAR), "--torus", "3")
    assert code == 0 and len(read_csv(out)) == 6
    assert json.loads(err)["dimension"] == 6
    code, out, _ = run(capsys, "spectrum", "--config", write_config(FLAT), "--torus", "20", "--operator", "T")
    assert all(float(r["re"]) == pytest.approx(0.6, abs=1e-12) for r in read_csv(out))
    code, out, _ = run(capsys, "spectrum", "--config", write_config(FLAT), "--torus", "20")
    rows = [r for r in read_csv(out) if r["classification"] == "band"]
    assert rows and all(float(r["cos_arg"]) == pytest.approx(0.6, abs=1e-10) for r in rows)


def test_spectrum_exit_codes(capsys, write_config, monkeypatch):
    assert run(capsys, "spectrum", "--config", write_config(PSTAR), "--torus", "5000")[0] == 4

    def broken(op):
        raise EigensolverFailure("did not converge")

    monkeypatch.setattr(cli, "torus_spectrum", broken)
    assert run(capsys, "spectrum", "--config", write_config(PSTAR), "--torus", "10")[0] == 3


def test_birth_profile_sums_to_one(capsys, write_config):
    for sign in ("+", "-"):
        code, out, err = run(capsys, "birth", "--config", write_config(PSTAR), "--sign", sign)
        assert code == 0
        total = sum(float(r["profile"]) for r in read_csv(out) if r["profile"])
        assert total == pytest.approx(1.0, abs=1e-10)
        assert json.loads(err)["residual"] <= 1e-10


def test_birth_radius(capsys, write_config):
    _, out, _ = run(capsys, "birth", "--config", write_config(PSTAR), "--radius", "2")
    rows = read_csv(out)
    assert {int(r["x"]) for r in rows} == set(range(-2, 3))
    by_site = {int(r["x"]): float(r["profile"]) for r in rows if r["profile"]}
    assert by_site[0] == pytest.approx(0.6) and by_site[-2] == pytest.approx(0.075)


def test_birth_h0_is_input_error(capsys, write_config):
    assert run(capsys, "birth", "--config", write_config(H0))[0] == 2


def test_birth_family(capsys, write_config):
    anchors = ";".join(f"{a},{b}" for a in range(3) for b in range(3))
    code, out, _ = run(capsys, "birth", "--config", write_config(TWO_D), "--anchors", anchors)
    report = json.loads(out)
    assert code == 0 and len(report["residuals"]) == 9
    assert max(report["residuals"]) <= 1e-12 and report["gram_smallest_eigenvalue"] > 1e-6


def test_evolve(capsys, write_config):
    code, out, err = run(capsys, "evolve", "--config", write_config(PSTAR), "--steps", "5", "--initial", "0:(0.6,0.8i)")
    assert code == 0
    rows = read_csv(out)
    assert sum(float(r["re"]) ** 2 + float(r["im"]) ** 2 for r in rows) == pytest.approx(1.0, abs=1e-12)
    assert json.loads(err)["window_radius"] == [6]


def test_measure(capsys, write_config):
    code, out, err = run(capsys, "measure", "--config", write_config(PSTAR), "--sites=-10..10")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 21
    assert max(float(r["abs_err"]) for r in rows) <= 1e-2
    assert json.loads(err)["total_mass_analytic"] == pytest.approx(0.6, abs=1e-10)


def test_measure_2d_rejected(capsys, write_config):
    assert run(capsys, "measure", "--config", write_config(TWO_D), "--horizon", "3")[0] == 2


def test_probe(capsys, write_config):
    code, out, err = run(capsys, "probe", "--config", write_config(PSTAR), "--lambda", "1")
    assert code == 0
    assert float(read_csv(out)[0]["value"]) == pytest.approx(-10.47198, abs=1e-4)
    code, out, err = run(capsys, "probe", "--config", write_config(PSTAR), "--lambda", "0.5")
    assert json.loads(err)["verdict"] == "InsideBandDivergent" and len(read_csv(out)) == 4
    assert run(capsys, "probe", "--config", write_config(PSTAR), "--lambda", "0.8")[0] == 2


def test_sweep(capsys, write_config):
    grid = [round(0.1 * k, 1) for k in range(1, 10)]
    code, out, _ = run(capsys, "sweep", "--config", write_config(PSTAR, sweep={"p": grid}))
    rows = read_csv(out)
    assert code == 0 and len(rows) == 9
    widths = [float(r["band_width"]) for r in rows]
    for p, w in zip(grid, widths):
        assert w == pytest.approx(2 * math.sqrt(1 - p * p), abs=1e-12)
    assert widths == sorted(widths, reverse=True)
    assert run(capsys, "sweep", "--config", write_config(PSTAR))[0] == 2


@pytest.mark.parametrize("command, extra", [("spectrum", ["--torus", "40"]), ("birth", []), ("measure", ["--horizon", "200"]), ("sweep", [])])
def test_byte_identical(capsys, write_config, tmp_path, command, extra):
    cfg = write_config(PSTAR, sweep={"p": [0.2, 0.5]})
    outs = []
    for k in range(2):
        path = tmp_path / f"out{k}.csv"
        assert run(capsys, command, "--config", cfg, "--out", str(path), *extra)[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert b"\r" not in outs[0]


def test_dump_config_roundtrip(capsys, write_config, tmp_path):
    cfg_path = write_config(TWO_D, anchors=[[0, 0], [1, 1]], initial="0,0:(0,1,0,0)")
    code, out, _ = run(capsys, "info", "--config", cfg_path, "--dump-config", "--torus", "12", "--sign", "-", "--lambda", "0.25")
    assert code == 0
    dumped = tmp_path / "dumped.json"
    dumped.write_text(out)
    again = load_config(dumped)
    assert again == config_from_dict(json.loads(out))
    assert again.torus == 12 and again.sign == -1 and again.lam == 0.25
    assert again.params == load_config(cfg_path).params
    assert isinstance(again, RunConfig)
