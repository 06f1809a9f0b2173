import math

import numpy as np
import pytest

from bubblelab.reports import Plot, Table, format_value, write_report


def test_format_value():
    assert format_value(True) == "1" and format_value(np.bool_(False)) == "0"
    assert format_value(np.int64(3)) == "3"
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(math.pi)) == math.pi
    assert format_value(float("nan")) == "nan" and format_value(-np.inf) == "-inf"
    assert format_value('a,"b"') == '"a,""b"""'


def test_table_validates_rows():
    with pytest.raises(ValueError):
        Table("x", ("a", "b"), [(1,)])


def test_write_report(tmp_path):
    t = Table("solve", ("i", "r"), [(0, 1.5), (1, 0.25)], tag="history")
    p = Plot("solve", [("r", [0, 1], [1.5, 0.25])], tag="history")
    paths = write_report([t, p], tmp_path / "out")
    assert [q.rsplit("/", 1)[-1] for q in paths] == ["solve-history.csv", "solve-history.svg"]
    data = (tmp_path / "out" / "solve-history.csv").read_bytes()
    assert data == b"i,r\n0,1.5\n1,0.25\n"
    assert (tmp_path / "out" / "solve-history.svg").read_text().startswith("<svg")


def test_empty_report_writes_nothing(tmp_path):
    assert write_report([], tmp_path / "none") == []
    assert not (tmp_path / "none").exists()


def test_unwritable_directory(tmp_path):
    f = tmp_path / "file"
    f.write_text("")
    with pytest.raises(OSError):
        write_report([Table("x", ("a",), [(1,)])], f)
