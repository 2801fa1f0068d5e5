import http.server
import math
import socket
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgafkit.errors import FetchError, NetworkError, ParseError, ValidationError
from qgafkit.marketdata import (
    PriceSeries,
    clean,
    count_missing,
    daily_returns,
    fetch_csv_url,
    interval_return,
    load_csv,
    net_return,
    parse_csv_text,
)

from .conftest import THREE_ROWS


def series(closes, start=1):
    dates = tuple(f"2021-03-{d:02d}" for d in range(start, start + len(closes)))
    return PriceSeries(dates, np.array(closes, dtype=float))


def test_load_three_rows(three_row_csv):
    s = load_csv(three_row_csv)
    assert len(s) == 3
    assert s.dates == ("2020-01-01", "2020-01-02", "2020-01-03")
    np.testing.assert_array_equal(s.closes, [100, 105, 84])


def test_unsorted_rows_are_sorted():
    text = "date,close\n2020-01-03,84\n2020-01-01,100\n2020-01-02,105\n"
    s = parse_csv_text(text)
    assert s == parse_csv_text(THREE_ROWS)


def test_invalid_calendar_date_names_line():
    with pytest.raises(ParseError) as info:
        parse_csv_text("date,close\n2020-13-40,1\n", source="x.csv")
    assert info.value.line == 2
    assert "x.csv:2" in str(info.value)


def test_non_numeric_close_is_parse_error():
    with pytest.raises(ParseError) as info:
        parse_csv_text("date,close\n2020-01-01,1\n2020-01-02,abc\n")
    assert info.value.line == 3


def test_duplicate_dates_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        parse_csv_text("date,close\n2020-01-01,1\n2020-01-01,2\n")


@pytest.mark.parametrize("text", ["", "date,close\n"])
def test_empty_input_rejected(text):
    with pytest.raises(ValidationError):
        parse_csv_text(text)


def test_custom_column_names():
    s = parse_csv_text("Day,Adj Close,Volume\n2020-01-01,10,5\n", ("Day", "Adj Close"))
    assert s.closes.tolist() == [10.0]


def test_missing_close_becomes_nan():
    s = parse_csv_text("date,close\n2020-01-01,100\n2020-01-02,\n2020-01-03,102\n")
    assert math.isnan(s.closes[1])
    assert count_missing(s) == (0, 1)


class _Handler(http.server.BaseHTTPRequestHandler):
    def do_GET(self):
        if self.path == "/prices.csv":
            body = THREE_ROWS.encode()
            self.send_response(200)
        elif self.path == "/junk":
            body = b"<html>nope</html>"
            self.send_response(200)
        else:
            body = b"not found"
            self.send_response(404)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def server():
    httpd = http.server.HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}"
    httpd.shutdown()


def test_fetch_matches_file(server, three_row_csv):
    assert fetch_csv_url(server + "/prices.csv") == load_csv(three_row_csv)


def test_fetch_404_carries_status(server):
    with pytest.raises(FetchError) as info:
        fetch_csv_url(server + "/missing.csv")
    assert info.value.status == 404
    assert not isinstance(info.value, NetworkError)


def test_fetch_non_csv_body(server):
    with pytest.raises(FetchError):
        fetch_csv_url(server + "/junk")


def test_fetch_connection_refused():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    with pytest.raises(NetworkError):
        fetch_csv_url(f"http://127.0.0.1:{port}/prices.csv", timeout=5)


def test_forward_fill():
    out = clean(series([100, np.nan, 102]), "forward_fill")
    assert out.closes.tolist() == [100, 100, 102]


def test_ma5_uses_five_prior_closes():
    out = clean(series([100, 102, 104, 106, 108, np.nan]), "ma5")
    assert out.closes[-1] == pytest.approx((100 + 102 + 104 + 106 + 108) / 5)
    assert out.closes[-1] == pytest.approx(104.0)


def test_ma5_with_fewer_than_five_priors():
    out = clean(series([100, 110, np.nan]), "ma5")
    assert out.closes[-1] == pytest.approx(105.0)


def test_ma5_ignores_filled_values():
    # the second gap averages observed closes only, not the first fill
    out = clean(series([100, np.nan, np.nan]), "ma5")
    assert out.closes.tolist() == [100, 100, 100]


def test_leading_gap_dropped():
    out = clean(series([np.nan, 100]), "forward_fill")
    assert out.closes.tolist() == [100]
    assert out.dates == ("2021-03-02",)


def test_all_missing_rejected():
    with pytest.raises(ValidationError):
        clean(series([np.nan, np.nan]))


def test_unknown_policy():
    with pytest.raises(ValidationError):
        clean(series([1.0]), "median")


def test_daily_returns_examples():
    r = daily_returns(series([100, 105, 84]))
    np.testing.assert_allclose(r.returns, [0.05, -0.2], rtol=0, atol=1e-15)
    assert r.dates == ("2021-03-02", "2021-03-03")
    assert daily_returns(series([50, 50, 50])).returns.tolist() == [0.0, 0.0]


def test_daily_returns_guards():
    with pytest.raises(ValidationError):
        daily_returns(series([100, 0]))
    with pytest.raises(ValidationError):
        daily_returns(series([100, np.nan]))
    with pytest.raises(ValidationError):
        daily_returns(series([100]))


def test_interval_return_examples():
    assert interval_return([0, 0, 0]) == 1.0
    assert interval_return([0.1, -0.1]) == pytest.approx(0.99, abs=1e-15)
    assert net_return([0.1, -0.1]) == pytest.approx(-0.01, abs=1e-15)
    with pytest.raises(ValidationError):
        interval_return([-1.0])
    with pytest.raises(ValidationError):
        interval_return([])


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 1e4), st.lists(st.floats(0.5, 2.0), min_size=1, max_size=60))
def test_returns_reconstruct_last_close(first, ratios):
    # daily ratios in [0.5, 2]: with r near -1, 1 + r cancels and float64
    # cannot hold 1e-12 relative error
    closes = list(first * np.cumprod([1.0] + ratios))
    r = daily_returns(series(closes)).returns
    rebuilt = closes[0] * interval_return(r)
    assert abs(rebuilt - closes[-1]) <= 1e-12 * closes[-1]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.one_of(st.none(), st.floats(1, 1000)), min_size=1, max_size=40),
       st.sampled_from(["forward_fill", "ma5"]))
def test_clean_leaves_no_gaps(values, policy):
    closes = [np.nan if v is None else v for v in values]
    s = series(closes)
    if all(v is None for v in values):
        with pytest.raises(ValidationError):
            clean(s, policy)
        return
    out = clean(s, policy)
    leading, _ = count_missing(s)
    assert len(out) == len(s) - leading
    assert not np.isnan(out.closes).any()
    observed = [v for v in values if v is not None]
    assert out.closes.min() >= min(observed) - 1e-9
    assert out.closes.max() <= max(observed) + 1e-9
