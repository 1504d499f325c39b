import json
import subprocess
import sys
from decimal import Decimal
from fractions import Fraction

import pytest
import yaml

from curvefreq.cli import decimal_string, dump_scenario, parse_scenario, run
from curvefreq.errors import ValidationError
from curvefreq.frequency import BUILTIN_SCENARIOS, builtin_scenario, frequency


def output(capsys, argv):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_freq_builtin(capsys):
    code, out, _ = output(capsys, ["freq", "--scenario", "builtin:genus2-figure8-noflip"])
    assert code == 0
    assert "frequency,1/48," in out


def test_appendix_check(capsys):
    code, out, _ = output(capsys, ["appendix-check"])
    lines = out.strip().splitlines()[1:]
    assert code == 0 and len(lines) == 16
    assert all(line.startswith("PASS") for line in lines)


def test_table(capsys):
    code, out, _ = output(capsys, ["table", "--K", "4"])
    rows = out.split("\n{")[0].strip().splitlines()
    assert code == 0 and len(rows) == 4
    assert rows[1].endswith("g^2") and rows[2].endswith("g^4") and rows[3].endswith("g^6")


def test_asym_csv_and_singularity_block(capsys):
    code, out, _ = output(capsys, ["asym", "--spec", "builtin:pants_figure8", "--N", "9"])
    assert code == 0
    csv_part, json_part = out.split("\n{", 1)
    lines = csv_part.strip().splitlines()
    assert lines[0] == "N,exact,main_term,ratio" and len(lines) == 10
    data = json.loads("{" + json_part)
    assert data["singularity"] == {"iota0": 1, "mu0": 2, "leading": "2", "parity": "odd"}
    code, out, _ = output(capsys, ["asym", "table", "--K", "3"])
    assert code == 0 and "g^5" in out


def test_tau_volume_lattice(capsys):
    assert output(capsys, ["tau", "--g", "2", "--d", "2", "3"])[1].splitlines()[1].startswith("tau,29/5760,")
    _, out, _ = output(capsys, ["volume", "--g", "1", "--n", "1"])
    assert out.splitlines()[1] == "b1^2,1/48"
    _, out, _ = output(capsys, ["lattice", "--g", "1", "--n", "1", "--b", "6"])
    assert out.splitlines()[1].startswith("6,2/3,")
    code, out, _ = output(capsys, ["lattice", "--g", "1", "--n", "2", "--norbury", "--scales", "1", "2"])
    assert code == 0 and len(out.splitlines()) == 3


def test_exit_codes(capsys, tmp_path):
    assert output(capsys, ["bogus"])[0] == 2
    assert output(capsys, ["tau", "--g", "1"])[0] == 2
    assert output(capsys, ["tau", "--g", "31", "--d", "91"])[0] == 1
    assert output(capsys, ["tau", "--g", "0", "--d", "1", "1"])[0] == 2
    assert output(capsys, ["freq", "--scenario", str(tmp_path / "missing.yaml")])[0] == 2
    assert output(capsys, ["lattice", "--g", "2", "--n", "1", "--b", "4"])[0] == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("meta: [1,\n")
    code, _, err = output(capsys, ["freq", "--scenario", str(bad)])
    assert code == 2 and "bad.yaml:2:1" in err


def test_out_json_and_csv(capsys, tmp_path):
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    run(["freq", "--scenario", "builtin:genus2-figure8-flip12", "--out", str(js)])
    run(["freq", "--scenario", "builtin:genus2-figure8-flip12", "--out", str(cs)])
    capsys.readouterr()
    doc = json.loads(js.read_text())
    assert doc["command"] == "freq" and "timings" not in doc
    assert ["frequency", "1/2880", decimal_string(Fraction(1, 2880))] in doc["rows"]
    assert cs.read_text().splitlines()[0] == "item,exact,decimal"
    run(["freq", "--scenario", "builtin:genus2-figure8-flip12", "--out", str(js), "--timings"])
    assert "frequency" in json.loads(js.read_text())["timings"]


def test_output_is_deterministic_across_jobs(capsys):
    _, a, _ = output(capsys, ["freq", "--scenario", "builtin:genus2-figure8-noflip", "--estimate", "30"])
    _, b, _ = output(capsys, ["freq", "--scenario", "builtin:genus2-figure8-noflip", "--estimate", "30", "--jobs", "4"])
    assert a == b


@pytest.mark.parametrize("q", [Fraction(1, 3), Fraction(2, 3), Fraction(-7, 174960), Fraction(10 ** 30, 7), Fraction(5)])
def test_decimal_string_is_correctly_rounded(q):
    text = decimal_string(q)
    d = Decimal(text)
    digits = len(d.as_tuple().digits)
    assert digits <= 20
    # the exact value lies within half a unit of the last printed digit
    unit = Fraction(10) ** (d.adjusted() - 19)
    assert abs(Fraction(d) - q) <= unit / 2


@pytest.mark.parametrize("name", BUILTIN_SCENARIOS)
def test_scenario_round_trip(name, tmp_path):
    s = builtin_scenario(name)
    text = dump_scenario(s)
    again = parse_scenario(text)
    assert again == s and dump_scenario(again) == text
    path = tmp_path / "s.yaml"
    path.write_text(text)
    assert run(["freq", "--scenario", str(path)]) == 0


def test_scenario_errors():
    doc = yaml.safe_load(dump_scenario(builtin_scenario("genus2-figure8-noflip")))
    doc["charts"][1]["incidence"][0] = [1, 1, 1]
    with pytest.raises(ValidationError, match="alpha2: incidence row 1 sums to 3"):
        parse_scenario(yaml.safe_dump(doc))
    doc = yaml.safe_load(dump_scenario(builtin_scenario("genus2-figure8-noflip")))
    del doc["Z"]
    with pytest.raises(ValidationError, match="missing section 'Z'"):
        parse_scenario(yaml.safe_dump(doc))
    doc = yaml.safe_load(dump_scenario(builtin_scenario("genus2-figure8-noflip")))
    doc["constants"]["sym"] = "two"
    with pytest.raises(ValidationError, match="constants.sym"):
        parse_scenario(yaml.safe_dump(doc))


def test_missing_k1_defaults_with_warning():
    doc = yaml.safe_load(dump_scenario(builtin_scenario("genus2-figure8-flip13")))
    del doc["constants"]["k1"]
    s = parse_scenario(yaml.safe_dump(doc))
    assert s.k1 == 1 and any("k1" in w for w in s.warnings)
    assert frequency(s).total == Fraction(1, 3072)


def test_json_scenario_accepted():
    doc = yaml.safe_load(dump_scenario(builtin_scenario("genus2-simple-sep")))
    assert frequency(parse_scenario(json.dumps(doc))).total == Fraction(1, 27648)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "curvefreq", "table", "--K", "2"],
                          capture_output=True, text=True, check=True)
    assert "g^4" in proc.stdout
