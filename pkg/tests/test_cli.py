import json
import os
import subprocess
import sys

import pytest

from orbitobs import arith, cli, codec, order
from orbitobs.cache import FactorCache

EC = '{"a4": "0", "a6": "-2", "P": ["3", "5"]}'


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


ROUND_TRIP = [
    ("order-spectrum", "--lambda", "2", "--nmax", "12", "--pmax", "1000000"),
    ("zsigmondy", "--lambda", "3/2", "--nmax", "10"),
    ("trichotomy", "--point", "2,4,1", "--curve", "1,1,2,1", "--d", "2", "--check", "5"),
    ("trichotomy", "--point", "4,2,1", "--curve", "1,16,1,1", "--d", "2"),
    ("line-intersect", "--point", "2,1,1", "--line", "1,1,-5", "--d", "2"),
    ("prop4", "--lambda", "2", "--xi", "3", "--d", "2"),
    ("prop4", "--lambda", "-1", "--xi", "1", "--d", "2"),
    ("ec-spectrum", "--curve", EC, "--nmax", "8", "--pmax", "10000"),
    ("ec-translate", "--curve", EC, "--target", "inf", "--d", "2"),
    ("ec-translate", "--curve", EC, "--target", '["3", "-5"]', "--d", "2", "--budget", "1"),
    ("zhat-limit", "--d", "6", "--m", "5"),
]


@pytest.mark.parametrize("argv", ROUND_TRIP, ids=lambda a: " ".join(a[:3]))
def test_json_round_trip(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1 and doc["command"] == argv[0]
    value = codec.from_envelope(doc)
    assert codec.encode(value) == doc["report"]
    again = codec.decode(json.loads(json.dumps(codec.encode(value))))
    assert again == value


def test_order_spectrum_report(capsys):
    code, out, _ = run(capsys, "order-spectrum", "--lambda", "2", "--nmax", "12",
                       "--pmax", "1000000")
    rep = codec.from_envelope(json.loads(out))
    assert code == 0 and rep.missing == (1, 6) and rep.proven_exceptional == (1, 6)
    assert all(c.verify() for c in rep.realized.values())
    code, out, _ = run(capsys, "order-spectrum", "--lambda", "2", "--nmax", "3", "--pmax", "10")
    rep = codec.from_envelope(json.loads(out))
    assert {n: c.p for n, c in rep.realized.items()} == {2: 3, 3: 7} and rep.missing == (1,)


def test_power_limit_transcript_fields(capsys):
    code, out, _ = run(capsys, "prop4", "--lambda", "2", "--xi", "3", "--d", "2")
    doc = json.loads(out)
    assert doc["outcome"] == "Refuted" and doc["lambda"] == "2" and doc["xi"] == "3"
    assert doc["witnesses"][0] == {"p": 5, "order": 4, "subject": "xi", "check_value": 3}


def test_zhat_alias(capsys):
    code, out, _ = run(capsys, "zhat", "--d", "6", "--m", "5")
    doc = json.loads(out)
    assert code == 0 and doc["command"] == "zhat-limit"
    assert doc["report"]["converges"] is False and doc["report"]["reason"]["prime"] == 2


def test_trichotomy_verdict(capsys):
    _, out, _ = run(capsys, "trichotomy", "--point", "2,4,1", "--curve", "1,1,2,1", "--d", "2")
    v = codec.from_envelope(json.loads(out)).verdict
    assert (v.entry_r, v.preperiod_i, v.period_q) == (0, 0, 1)
    _, out, _ = run(capsys, "trichotomy", "--point", "2,3,1", "--curve", "1,1,1,1", "--d", "2")
    v = codec.from_envelope(json.loads(out)).verdict
    assert v.intersection_exponents == ()


def test_csv_and_text_formats(capsys):
    code, out, _ = run(capsys, "order-spectrum", "--lambda", "2", "--nmax", "6",
                       "--pmax", "1000", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,status,p,order,group_order"
    assert lines[1] == "1,proven-exceptional,,," and lines[2] == "2,realized,3,2,2"
    code, out, _ = run(capsys, "ec-spectrum", "--curve", EC, "--nmax", "4", "--pmax", "1000",
                       "--format", "csv")
    assert code == 0 and out.splitlines()[2].startswith("2,realized,5,2,6")
    code, out, _ = run(capsys, "zhat-limit", "--d", "2", "--m", "0", "--format", "text")
    assert code == 0 and "converges" in out


EXIT_MATRIX = [
    # invalid input
    (("order-spectrum", "--lambda", "1", "--nmax", "5"), 1),
    (("order-spectrum", "--lambda", "0", "--nmax", "5"), 1),
    (("order-spectrum", "--lambda", "0.5", "--nmax", "5"), 1),
    (("trichotomy", "--point", "1,1,1", "--curve", "1,1,1,1", "--d", "2"), 1),
    (("trichotomy", "--point", "2,3", "--curve", "1,1,1,1", "--d", "2"), 1),
    (("trichotomy", "--point", "2,3,1", "--curve", "1,1,1,1", "--d", "2", "--format", "csv"), 1),
    (("line-intersect", "--point", "2,3,5", "--line", "1,1,1", "--d", "2"), 1),
    (("ec-spectrum", "--curve", '{"a4": "0", "a6": "0"}', "--point", '["0","0"]',
      "--nmax", "3"), 1),
    (("ec-spectrum", "--curve", '{"a4": "0", "a6": "-2", "P": ["3", "4"]}', "--nmax", "3"), 1),
    (("ec-spectrum", "--curve", '{"a4": "0", "a6": "4", "P": ["0", "2"]}', "--nmax", "3"), 1),
    (("ec-translate", "--curve", "not json", "--target", "inf", "--d", "2"), 1),
    (("zhat-limit", "--d", "1", "--m", "3"), 1),
    (("prop4", "--lambda", "2", "--xi", "3", "--d", "2", "--prime-budget", "0"), 1),
    (("no-such-command",), 1),
    (("order-spectrum", "--nmax", "5"), 1),
    # budget exhaustion
    (("order-spectrum", "--lambda", "2", "--nmax", "12", "--pmax", "100"), 2),
    (("zsigmondy", "--lambda", "2", "--nmax", "140", "--factor-effort", "10"), 2),
    (("prop4", "--lambda", "2", "--xi", "3", "--d", "2", "--prime-budget", "50"), 2),
    (("ec-translate", "--curve", EC, "--target", "inf", "--d", "2", "--prime-budget", "30"), 2),
    # success
    (("zhat-limit", "--d", "10", "--m", "-100"), 0),
    (("line-intersect", "--point", "2,1,1", "--line", "1,1,-4", "--d", "2"), 0),
]


@pytest.mark.parametrize("argv,expected", EXIT_MATRIX, ids=lambda a: " ".join(a) if isinstance(a, tuple) else str(a))
def test_exit_code_matrix(capsys, argv, expected):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    assert code == expected


def test_internal_error_exits_three(capsys, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("bug")
    monkeypatch.setattr(order, "order_spectrum", boom)
    code, _, err = run(capsys, "order-spectrum", "--lambda", "2", "--nmax", "3")
    assert code == 3 and "internal error" in err


def test_config_file_and_precedence(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("ORBITOBS_CACHE", raising=False)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# budgets\nprime_budget = 50\noutput_format = text\n")
    # the config file starves the power-limit search of primes
    code, _, _ = run(capsys, "prop4", "--lambda", "2", "--xi", "3", "--d", "2",
                     "--config", str(cfg))
    assert code == 2
    # flags beat the file
    code, out, _ = run(capsys, "prop4", "--lambda", "2", "--xi", "3", "--d", "2",
                       "--config", str(cfg), "--prime-budget", "100000", "--format", "json")
    assert code == 0 and json.loads(out)["outcome"] == "Refuted"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, _ = run(capsys, "zhat-limit", "--d", "2", "--m", "1", "--config", str(bad))
    assert code == 1


def test_env_var_sets_cache_path(tmp_path, capsys, monkeypatch):
    path = tmp_path / "env-cache.json"
    monkeypatch.setenv("ORBITOBS_CACHE", str(path))
    code, _, _ = run(capsys, "zsigmondy", "--lambda", "2", "--nmax", "20")
    assert code == 0 and path.exists()
    assert json.loads(path.read_text())["version"] == 1
    # an explicit flag still wins over the environment
    other = tmp_path / "flag-cache.json"
    run(capsys, "zsigmondy", "--lambda", "3", "--nmax", "5", "--cache", str(other))
    assert other.exists()


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "zhat-limit", "--d", "3", "--m", "9", "-o", str(dest))
    assert code == 0 and out == "" and json.loads(dest.read_text())["report"]["m"] == 9


def test_warm_and_cold_cache_give_identical_reports(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("ORBITOBS_CACHE", raising=False)
    cache = tmp_path / "factors.json"
    cases = [
        ("order-spectrum", "--lambda", "2", "--nmax", "36", "--pmax", "100000"),
        ("zsigmondy", "--lambda", "5/3", "--nmax", "24"),
        ("prop4", "--lambda", "7/2", "--xi", "5", "--d", "3"),
        ("ec-spectrum", "--curve", EC, "--nmax", "8", "--pmax", "10000"),
    ]
    for argv in cases:
        _, nocache, _ = run(capsys, *argv)
        _, cold, _ = run(capsys, *argv, "--cache", str(cache))
        size = len(FactorCache(cache))
        _, warm, _ = run(capsys, *argv, "--cache", str(cache))
        assert nocache == cold == warm
        assert len(FactorCache(cache)) == size
    assert len(FactorCache(cache)) > 0


def test_corrupt_cache_entries_are_dropped(tmp_path, capsys):
    path = tmp_path / "factors.json"
    good = {"91": [[7, 1], [13, 1]], "63": [[3, 2], [7, 1]]}
    corrupt = {"35": [[5, 1], [11, 1]], "77": [[77, 1]], "x": [[2, 1]], "15": "junk"}
    path.write_text(json.dumps({"version": 1, "entries": {**good, **corrupt}}))
    cache = FactorCache(path)
    assert cache.dropped == 4 and set(cache.entries) == {91, 63}
    # a poisoned entry must never reach results
    path.write_text(json.dumps({"version": 1, "entries": {"3": [[3, 1]], "6": [[2, 1], [5, 1]]}}))
    code, out, _ = run(capsys, "order-spectrum", "--lambda", "2", "--nmax", "8",
                       "--pmax", "1000", "--cache", str(path))
    assert code == 0
    rep = codec.from_envelope(json.loads(out))
    assert all(c.verify() for c in rep.realized.values())
    assert arith.factor(6).factors == ((2, 1), (3, 1))


def test_unreadable_cache_is_ignored(tmp_path):
    path = tmp_path / "factors.json"
    path.write_text("{not json")
    assert len(FactorCache(path)) == 0


def test_cache_save_merges_concurrent_writers(tmp_path):
    path = tmp_path / "factors.json"
    a, b = FactorCache(path), FactorCache(path)
    a.put(91, arith.factor(91))
    b.put(143, arith.factor(143))
    a.save()
    b.save()
    assert set(FactorCache(path).entries) == {91, 143}


def test_module_entry_point():
    env = dict(os.environ)
    env.pop("ORBITOBS_CACHE", None)
    res = subprocess.run([sys.executable, "-m", "orbitobs", "zhat-limit", "--d", "2", "--m", "4"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 0
    assert json.loads(res.stdout)["report"]["reason"]["m_norm"] == "1/4"
