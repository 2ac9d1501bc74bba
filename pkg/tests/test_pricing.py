from datetime import datetime, timezone
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nftscope.chain import eth
from nftscope.pricing import (
    CollectionStatsBatch,
    FiatFeed,
    FiatRate,
    NoData,
    NoRateBefore,
    load_stats,
    months_before,
    speculative_price,
    to_usd,
)

from oracles import linear_rate

C = "0x" + "cc" * 20
DAY = 86400
NOW = int(datetime(2022, 6, 1, tzinfo=timezone.utc).timestamp())


def batch(end_days_ago, trades, volume, span=7):
    end = NOW - end_days_ago * DAY
    return CollectionStatsBatch(C, end - span * DAY, end, volume, trades)


def test_no_trades_in_lookback():
    q = speculative_price(C, NOW, [batch(200, 100, eth(500))])
    assert q.price == 0 and q.basis == "devalued_zero"


def test_too_few_trades():
    assert speculative_price(C, NOW, [batch(3, 49, eth(98))]).price == 0


def test_recent_average():
    q = speculative_price(C, NOW, [batch(3, 60, eth(120))])
    assert q.price == eth(2) and q.basis == "recent_average"


def test_latest_batch_prices_and_sum_gates():
    batches = [batch(40, 30, eth(30)), batch(3, 30, eth(90))]
    assert speculative_price(C, NOW, batches).price == eth(3)
    assert speculative_price(C, NOW, batches, min_trades=61).price == 0


def test_unknown_contract():
    with pytest.raises(NoData):
        speculative_price("0x" + "dd" * 20, NOW, [batch(3, 60, eth(1))])


def test_bad_batch():
    with pytest.raises(ValueError):
        CollectionStatsBatch(C, 10, 10, 0, 1)


def test_months_before_clamps_day():
    may31 = int(datetime(2022, 5, 31, 12, tzinfo=timezone.utc).timestamp())
    assert datetime.fromtimestamp(months_before(may31, 3), tz=timezone.utc) == datetime(2022, 2, 28, 12, tzinfo=timezone.utc)


def test_load_stats(tmp_path):
    p = tmp_path / "stats.jsonl"
    p.write_text(f'{{"contract": "{C.upper().replace("0X", "0x")}", "window_start": 1, "window_end": 2, "total_volume_wei": "5", "trade_count": 1}}\n')
    (b,) = load_stats(p)
    assert b.contract == C and b.total_volume == 5


def test_to_usd_exact():
    feed = FiatFeed([FiatRate(100, Decimal("1800.25")), FiatRate(200, Decimal("2000"))])
    assert to_usd(eth("1.5"), 150, feed) == Decimal("2700.375")
    assert to_usd(eth(1), 200, feed) == Decimal("2000")
    with pytest.raises(NoRateBefore):
        to_usd(1, 99, feed)


def test_fiat_csv(tmp_path):
    p = tmp_path / "rates.csv"
    p.write_text("timestamp,usd\n10,3000.5\n5,2000\n")
    feed = FiatFeed.load_csv(p)
    assert feed.rate_at(7).native_usd == Decimal(2000)


@given(st.lists(st.tuples(st.integers(0, 1000), st.integers(1, 10**6)), min_size=1, max_size=30), st.integers(0, 1100))
def test_rate_lookup_matches_scan(rows, at):
    rows = list({ts: r for ts, r in rows}.items())
    feed = FiatFeed(FiatRate(ts, Decimal(r)) for ts, r in rows)
    want = linear_rate(rows, at)
    if want is None:
        with pytest.raises(NoRateBefore):
            feed.rate_at(at)
    else:
        assert feed.rate_at(at).native_usd == Decimal(want[1])


@given(st.integers(50, 500), st.integers(1, 10**21), st.integers(0, 500), st.integers(1, 10**21), st.integers(8, 80))
def test_older_batch_never_changes_recent_average(n, vol, n_old, vol_old, days_ago):
    recent = batch(1, n, vol)
    before = speculative_price(C, NOW, [recent])
    older = batch(days_ago, n_old, vol_old)
    after = speculative_price(C, NOW, [older, recent])
    assert before.basis == after.basis == "recent_average" and before.price == after.price


def test_devalued_means_total_loss():
    from nftscope.payments import speculative_profit

    q = speculative_price(C, NOW, [batch(200, 100, eth(1))])
    assert q.basis == "devalued_zero" and speculative_profit(eth(3), q.price) == -eth(3)
