import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from leverkit import __version__
from leverkit.exceptions import MatrixParseError
from leverkit.io import (
    CSV_COLUMNS,
    RunReport,
    dumps_reports,
    load_matrix,
    read_report,
    split_columns,
    write_matrix,
    write_report,
    write_reports_csv,
)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_basic(self, tmp_path):
        np.testing.assert_array_equal(load_matrix(_write(tmp_path, "a.csv", "1,2\n3,4")),
                                      [[1, 2], [3, 4]])

    def test_header_and_comments(self, tmp_path):
        p = _write(tmp_path, "a.csv", "# note\nx,y\n1,2\n# mid\n3,4\n")
        np.testing.assert_array_equal(load_matrix(p, header=True), [[1, 2], [3, 4]])

    def test_ragged(self, tmp_path):
        with pytest.raises(MatrixParseError) as exc:
            load_matrix(_write(tmp_path, "a.csv", "1,2\n3\n"))
        assert exc.value.line == 2

    def test_non_numeric(self, tmp_path):
        with pytest.raises(MatrixParseError) as exc:
            load_matrix(_write(tmp_path, "a.csv", "1,2\n3,x\n"))
        assert exc.value.line == 2 and "a.csv:2:" in str(exc.value)

    def test_non_finite(self, tmp_path):
        with pytest.raises(MatrixParseError):
            load_matrix(_write(tmp_path, "a.csv", "1,nan\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(MatrixParseError):
            load_matrix(_write(tmp_path, "a.csv", "# only a comment\n"))


class TestLoadMatrixMarket:
    def test_array_column_major(self, tmp_path):
        p = _write(tmp_path, "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n")
        np.testing.assert_array_equal(load_matrix(p), [[1, 2], [3, 4]])

    def test_coordinate(self, tmp_path):
        text = "%%MatrixMarket matrix coordinate real general\n% c\n2 3 2\n1 3 5.5\n2 1 -1\n"
        np.testing.assert_array_equal(load_matrix(_write(tmp_path, "a.mtx", text)),
                                      [[0, 0, 5.5], [-1, 0, 0]])

    def test_symmetric(self, tmp_path):
        text = "%%MatrixMarket matrix coordinate integer symmetric\n2 2 2\n1 1 1\n2 1 7\n"
        np.testing.assert_array_equal(load_matrix(_write(tmp_path, "a.mtx", text)),
                                      [[1, 7], [7, 0]])

    def test_skew_array(self, tmp_path):
        text = "%%MatrixMarket matrix array real skew-symmetric\n2 2\n3\n"
        np.testing.assert_array_equal(load_matrix(_write(tmp_path, "a.mtx", text)),
                                      [[0, -3], [3, 0]])

    @pytest.mark.parametrize("header", [
        "%%MatrixMarket matrix coordinate complex general",
        "%%MatrixMarket matrix coordinate pattern general",
        "%%MatrixMarket matrix array real hermitian",
        "%%MatrixMarket vector array real general",
    ])
    def test_unsupported_qualifiers(self, tmp_path, header):
        with pytest.raises(MatrixParseError) as exc:
            load_matrix(_write(tmp_path, "a.mtx", header + "\n1 1\n1\n"))
        assert exc.value.line == 1

    def test_entry_count(self, tmp_path):
        with pytest.raises(MatrixParseError):
            load_matrix(_write(tmp_path, "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n"))

    def test_out_of_range_coordinate(self, tmp_path):
        text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"
        with pytest.raises(MatrixParseError) as exc:
            load_matrix(_write(tmp_path, "a.mtx", text))
        assert exc.value.line == 3

    def test_matches_scipy(self, tmp_path, rng):
        from scipy.io import mmread, mmwrite
        x = rng.standard_normal((4, 3))
        mmwrite(str(tmp_path / "s.mtx"), x)
        np.testing.assert_array_equal(load_matrix(tmp_path / "s.mtx"), mmread(str(tmp_path / "s.mtx")))


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


class TestRoundTrip:
    @settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite),
           st.sampled_from(["a.csv", "a.mtx"]))
    def test_bit_identical(self, tmp_path, x, name):
        path = tmp_path / name
        write_matrix(x, path)
        y = load_matrix(path)
        assert y.shape == x.shape
        # -0.0 and 0.0 compare equal; everything else must match bit for bit
        assert (y == x).all() and np.array_equal(np.signbit(y), np.signbit(x))


class TestSplit:
    def test_half(self):
        x = np.arange(12.0).reshape(3, 4)
        pair = split_columns(x, 0.5)
        np.testing.assert_array_equal(pair.a, x[:, :2])
        np.testing.assert_array_equal(pair.b, x[:, 2:])

    def test_quarter_of_eight(self):
        assert split_columns(np.ones((2, 8)), 0.25).a.shape == (2, 2)

    def test_center(self, rng):
        pair = split_columns(rng.standard_normal((6, 5)) + 3, 0.5, center=True)
        np.testing.assert_allclose(pair.a.sum(axis=0), 0, atol=1e-9)
        np.testing.assert_allclose(pair.b.sum(axis=0), 0, atol=1e-9)

    @pytest.mark.parametrize("f", [0.0, 1.0, -0.2])
    def test_fraction_range(self, f):
        with pytest.raises(ValueError):
            split_columns(np.ones((2, 4)), f)

    def test_single_column(self):
        with pytest.raises(ValueError):
            split_columns(np.ones((3, 1)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.floats(0.01, 0.99))
    def test_reconstructs(self, n, f):
        x = np.arange(3.0 * n).reshape(3, n)
        pair = split_columns(x, f)
        np.testing.assert_array_equal(np.hstack([pair.a, pair.b]), x)


def _report(**kw):
    base = dict(algorithm="gcss", parameters={"epsilon": 0.1, "k": 3}, instance={"n": 4},
                selected=[1, 3], objective=0.1 + 0.2, objective_ratio=1 / 3,
                bounds={"b": 2.5e-300}, timings_ms={"total": 1.25})
    base.update(kw)
    return RunReport(**base)


class TestReports:
    def test_round_trip(self, tmp_path):
        r = _report()
        write_report(r, tmp_path / "r.json")
        assert read_report(tmp_path / "r.json") == r

    def test_list_round_trip(self, tmp_path):
        rs = [_report(), _report(algorithm="greedy", timings_ms=None)]
        write_report(rs, tmp_path / "r.json")
        assert read_report(tmp_path / "r.json") == rs

    def test_deterministic_modulo_timings(self):
        a = dumps_reports(_report(timings_ms={"total": 1.0}), timings=False)
        b = dumps_reports(_report(timings_ms={"total": 9.0}), timings=False)
        assert a == b

    def test_dry_run_schema(self):
        d = json.loads(dumps_reports(_report(timings_ms=None)))
        assert d["timings_ms"] is None and d["schema"] == "leverkit.run-report/1"
        assert d["version"] == __version__
        assert list(d) == ["algorithm", "parameters", "instance", "selected", "details",
                           "objective", "objective_ratio", "bounds", "status", "timings_ms",
                           "version", "schema"]

    def test_bad_schema(self):
        with pytest.raises(ValueError):
            RunReport.from_dict({"algorithm": "x", "schema": "other/0"})

    def test_csv_rows(self, tmp_path):
        write_reports_csv([_report(), _report(objective=None)], tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0].split(",") == list(CSV_COLUMNS) and len(lines) == 3

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            write_report(_report(), tmp_path / "missing" / "r.json")
