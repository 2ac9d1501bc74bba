"""Speculative collection pricing and fiat conversion."""

from __future__ import annotations

import calendar
import csv
import json
from bisect import bisect_right
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal, localcontext
from typing import Iterable, Sequence

from .chain import WEI_PER_ETH

DEFAULT_LOOKBACK_MONTHS = 3
DEFAULT_MIN_TRADES = 50


class NoData(LookupError):
    pass


class NoRateBefore(LookupError):
    pass


@dataclass(frozen=True)
class CollectionStatsBatch:
    contract: str
    window_start: int
    window_end: int
    total_volume: int
    trade_count: int

    def __post_init__(self):
        if self.trade_count < 0:
            raise ValueError("negative trade count")
        if self.window_start >= self.window_end:
            raise ValueError("empty stats window")


@dataclass(frozen=True)
class PriceQuote:
    nft_contract: str
    as_of: int
    price: int
    basis: str  # recent_average | devalued_zero


def months_before(ts: int, months: int) -> int:
    """The same wall-clock instant ``months`` calendar months earlier (UTC)."""
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    total = dt.year * 12 + (dt.month - 1) - months
    year, month = divmod(total, 12)
    month += 1
    day = min(dt.day, calendar.monthrange(year, month)[1])
    return int(dt.replace(year=year, month=month, day=day).timestamp())


def speculative_price(
    contract: str,
    as_of: int,
    batches: Iterable[CollectionStatsBatch],
    lookback_months: int = DEFAULT_LOOKBACK_MONTHS,
    min_trades: int = DEFAULT_MIN_TRADES,
) -> PriceQuote:
    """Assumed market price of an unsold NFT of ``contract`` at ``as_of``.

    Zero when the collection saw no trades in the lookback window or fewer
    than ``min_trades`` there; otherwise the average sale price of the most
    recent batch with trades.
    """
    own = [b for b in batches if b.contract == contract]
    if not own:
        raise NoData(f"no stats for {contract}")
    since = months_before(as_of, lookback_months)
    recent = [b for b in own if b.trade_count > 0 and b.window_start < as_of and b.window_end > since]
    if not recent or sum(b.trade_count for b in recent) < min_trades:
        return PriceQuote(contract, as_of, 0, "devalued_zero")
    latest = max(recent, key=lambda b: (b.window_end, b.window_start))
    return PriceQuote(contract, as_of, latest.total_volume // latest.trade_count, "recent_average")


def load_stats(path) -> list[CollectionStatsBatch]:
    out = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            out.append(
                CollectionStatsBatch(
                    d["contract"].lower(),
                    int(d["window_start"]),
                    int(d["window_end"]),
                    int(d["total_volume_wei"]),
                    int(d["trade_count"]),
                )
            )
    return out


@dataclass(frozen=True)
class FiatRate:
    timestamp: int
    native_usd: Decimal

    def __post_init__(self):
        if self.native_usd <= 0:
            raise ValueError("rate must be positive")


class FiatFeed:
    def __init__(self, rates: Iterable[FiatRate]):
        self.rates: Sequence[FiatRate] = sorted(rates, key=lambda r: r.timestamp)
        self._times = [r.timestamp for r in self.rates]

    def rate_at(self, at: int) -> FiatRate:
        i = bisect_right(self._times, at)
        if i == 0:
            raise NoRateBefore(f"no rate at or before {at}")
        return self.rates[i - 1]

    @classmethod
    def load_csv(cls, path) -> "FiatFeed":
        rates = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().lower() == "timestamp":
                    continue
                rates.append(FiatRate(int(row[0]), Decimal(row[1].strip())))
        return cls(rates)


def to_usd(amount: int, at: int, feed: FiatFeed | Iterable[FiatRate]) -> Decimal:
    if not isinstance(feed, FiatFeed):
        feed = FiatFeed(feed)
    rate = feed.rate_at(at).native_usd
    with localcontext() as ctx:
        ctx.prec = 80
        return Decimal(amount) * rate / WEI_PER_ETH
