import argparse
import json

import numpy as np
import pytest

from textfractal.config import (build_config, load_config_file, parse_fit_range, parse_q_range,
                                parse_scale_range)
from textfractal.errors import EmptyInput, InvalidConfig
from textfractal.report import read_series, write_csv, write_json, write_series


def test_parse_ranges():
    q = parse_q_range("7:0.25")
    assert q[0] == -7.0 and q[-1] == 7.0 and len(q) == 57 and 0.0 in q
    assert parse_q_range("-2:2:1") == (-2.0, -1.0, 0.0, 1.0, 2.0)
    assert parse_q_range("2") == parse_q_range("2:0.25")
    for bad in ("-1:2:0.5", "x", "0", "1:2:3:4"):
        with pytest.raises(InvalidConfig):
            parse_q_range(bad)
    assert parse_scale_range("6:2000") == (6, 2000, 50)
    assert parse_scale_range("6:2000:20") == (6, 2000, 20)
    assert parse_fit_range("16:500") == (16, 500)
    with pytest.raises(InvalidConfig):
        parse_fit_range("16")


def test_flags_override_file(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nseed = 3\nthreads = 2\n[mfdfa]\ndetrend_order = 3\n"
                   "[ingest]\nchapter_delimiter = ^CAP\\S+ \\d+$\n")
    vals = load_config_file(ini)
    args = argparse.Namespace(seed=9, threads=None, detrend_order=None, out="o", inputs=["x"])
    rc = build_config("analyze", args, vals)
    assert rc.seed == 9 and rc.threads == 2 and rc.mfdfa.m == 3
    assert rc.ingest.chapter_delimiter == r"^CAP\S+ \d+$"
    # threads and the output directory do not enter the hash
    rc2 = build_config("analyze", argparse.Namespace(seed=9, out="elsewhere", inputs=["x"]),
                       dict(vals, threads="1"))
    assert rc.digest(["abc"]) == rc2.digest(["abc"])
    assert rc.digest(["abc"]) != rc.digest(["abd"])


def test_config_errors(tmp_path):
    with pytest.raises(InvalidConfig):
        build_config("analyze", argparse.Namespace(), {"bogus": "1"})
    with pytest.raises(InvalidConfig):
        build_config("analyze", argparse.Namespace(), {"loglog": "maybe"})
    with pytest.raises(InvalidConfig):
        load_config_file(tmp_path / "missing.ini")
    rc = build_config("experiment", argparse.Namespace(),
                      {"keep_members": "yes", "n": "12", "permutation_file": "a.txt\nb.txt"})
    assert rc.extra == {"keep_members": True, "n": 12, "permutation_file": ["a.txt", "b.txt"]}


def test_series_round_trip(tmp_path):
    write_series(tmp_path / "s.csv", [3, 1, 4], "h1", "slv")
    text = (tmp_path / "s.csv").read_text()
    assert text == "# schema_version=1 config_hash=h1\nslv\n3\n1\n4\n"
    s = read_series(tmp_path / "s.csv")
    assert s.values.tolist() == [3, 1, 4] and s.values.dtype == np.int64
    write_series(tmp_path / "f.csv", [0.1, 2.5], "h1")
    assert read_series(tmp_path / "f.csv").values.tolist() == [0.1, 2.5]
    (tmp_path / "e.csv").write_text("# nothing\nvalue\n")
    with pytest.raises(EmptyInput):
        read_series(tmp_path / "e.csv")


def test_writers_are_deterministic(tmp_path):
    payload = {"b": np.float64(0.1), "a": [np.int64(2), 3.5], "c": {"z": True}}
    write_json(tmp_path / "x.json", payload, "hh")
    doc = json.loads((tmp_path / "x.json").read_text())
    assert doc == {"schema_version": 1, "config_hash": "hh", "a": [2, 3.5], "b": 0.1,
                   "c": {"z": True}}
    write_csv(tmp_path / "x.csv", ["k", "v"], [(1, 1 / 3)], "hh")
    assert (tmp_path / "x.csv").read_text().splitlines()[2] == "1,0.3333333333333333"
