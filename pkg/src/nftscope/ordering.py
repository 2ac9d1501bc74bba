"""Transaction-ordering detectors over the trade-action stream.

Every detector works block by block: only actions in the same block compete
with each other, and within a block the txn index gives the order.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from itertools import groupby
from typing import Collection, Iterable, Iterator

from .chain import Block
from .decoder import NftRef, TradeAction
from .payments import NATIVE, TokenContractSet, build_payment_graph

log = logging.getLogger(__name__)

# pattern -> (attacker kind, victim kind, victim must fail)
FRONTRUN_PATTERNS = {
    "buy_buy": ("buy", "buy", True),
    "buy_cancel": ("buy", "cancel_listing", True),
    "acceptbid_cancelbid": ("accept_bid", "cancel_bid", True),
    "placebid_acceptbid": ("place_bid", "accept_bid", False),
}
ALL_PATTERNS = (*FRONTRUN_PATTERNS, "listing_buy_backrun", "cancel_buy_lossmin")


@dataclass(frozen=True)
class OrderingFinding:
    pattern: str
    attacker: TradeAction
    victim: TradeAction

    def __post_init__(self):
        a, v = self.attacker, self.victim
        assert a.block_number == v.block_number, "pair spans blocks"
        assert a.nft == v.nft and a.marketplace == v.marketplace, "pair spans NFTs"
        assert a.sender != v.sender, "pair shares a sender"

    @property
    def nft(self) -> NftRef:
        return self.attacker.nft

    @property
    def marketplace(self) -> str:
        return self.attacker.marketplace

    @property
    def block_number(self) -> int:
        return self.attacker.block_number

    @property
    def gas_delta(self) -> int:
        return self.attacker.gas_price - self.victim.gas_price

    @property
    def price_delta(self) -> int:
        return self.attacker.price - self.victim.price

    def sort_key(self):
        return (self.block_number, self.victim.txn_index, self.attacker.txn_index, self.pattern)

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern,
            "block_number": self.block_number,
            "marketplace": self.marketplace,
            "nft": {"contract": self.nft.contract, "token_id": str(self.nft.token_id)},
            "attacker": self.attacker.to_json(),
            "victim": self.victim.to_json(),
            "gas_delta": str(self.gas_delta),
            "price_delta": str(self.price_delta),
        }

    @classmethod
    def from_json(cls, d: dict) -> "OrderingFinding":
        return cls(d["pattern"], TradeAction.from_json(d["attacker"]), TradeAction.from_json(d["victim"]))


def _by_block(actions: Iterable[TradeAction]) -> Iterator[list[TradeAction]]:
    last = None
    for number, group in groupby(actions, key=lambda a: a.block_number):
        if last is not None and number <= last:
            raise ValueError(f"actions out of order: block {number} after {last}")
        last = number
        yield sorted(group, key=lambda a: a.txn_index)


def _pairs(block_actions: list[TradeAction], first_kind: str, second_kind: str):
    """Ordered (earlier, later) pairs on the same NFT and marketplace."""
    buckets: dict[tuple, list[TradeAction]] = defaultdict(list)
    for a in block_actions:
        if a.kind in (first_kind, second_kind):
            buckets[(a.nft, a.marketplace)].append(a)
    for bucket in buckets.values():
        for i, t1 in enumerate(bucket):
            if t1.kind != first_kind:
                continue
            for t2 in bucket[i + 1 :]:
                if t2.kind == second_kind and t1.txn_index < t2.txn_index and t1.sender != t2.sender:
                    yield t1, t2


def frontruns_in_block(
    block_actions: list[TradeAction], pattern: str, bid_agnostic_markets: Collection[str] | None = None
) -> list[OrderingFinding]:
    attacker_kind, victim_kind, victim_fails = FRONTRUN_PATTERNS[pattern]
    found = []
    for t1, t2 in _pairs(block_actions, attacker_kind, victim_kind):
        if t1.gas_price <= t2.gas_price or not t1.succeeded:
            continue
        if victim_fails == t2.succeeded:
            continue
        if pattern == "placebid_acceptbid":
            if bid_agnostic_markets is not None and t1.marketplace not in bid_agnostic_markets:
                continue
            # the competing bid must at least match the one being accepted
            if t1.price < t2.price:
                continue
        found.append(OrderingFinding(pattern, t1, t2))
    return sorted(found, key=OrderingFinding.sort_key)


def backruns_in_block(block_actions: list[TradeAction], on_chain_markets: Collection[str] | None = None):
    found = []
    for t1, t2 in _pairs(block_actions, "listing", "buy"):
        if on_chain_markets is not None and t1.marketplace not in on_chain_markets:
            continue
        if t2.gas_price < t1.gas_price and t1.succeeded and t2.succeeded:
            found.append(OrderingFinding("listing_buy_backrun", t2, t1))
    return sorted(found, key=OrderingFinding.sort_key)


def lossmin_in_block(block_actions: list[TradeAction]) -> list[OrderingFinding]:
    found = []
    for t1, t2 in _pairs(block_actions, "cancel_listing", "buy"):
        if t1.gas_price > t2.gas_price and t1.succeeded and not t2.succeeded:
            found.append(OrderingFinding("cancel_buy_lossmin", t1, t2))
    return sorted(found, key=OrderingFinding.sort_key)


def detect_frontruns(
    actions: Iterable[TradeAction], pattern: str, bid_agnostic_markets: Collection[str] | None = None
) -> Iterator[OrderingFinding]:
    """Frontrun pairs of one pattern.

    ``bid_agnostic_markets`` limits place-bid/accept-bid findings to
    marketplaces whose accept-bid call does not name the accepted bid; None
    disables that filter.
    """
    if pattern not in FRONTRUN_PATTERNS:
        raise ValueError(f"unknown frontrun pattern {pattern!r}")
    for group in _by_block(actions):
        yield from frontruns_in_block(group, pattern, bid_agnostic_markets)


def detect_backruns(actions: Iterable[TradeAction], on_chain_markets: Collection[str] | None = None) -> Iterator[OrderingFinding]:
    """Listing--Buy backruns; only marketplaces with on-chain listings qualify."""
    for group in _by_block(actions):
        yield from backruns_in_block(group, on_chain_markets)


def detect_loss_minimization(actions: Iterable[TradeAction]) -> Iterator[OrderingFinding]:
    for group in _by_block(actions):
        yield from lossmin_in_block(group)


def ordering_findings_in_block(
    block_actions: list[TradeAction],
    patterns: Collection[str] = ALL_PATTERNS,
    bid_agnostic_markets: Collection[str] | None = None,
    on_chain_markets: Collection[str] | None = None,
) -> list[OrderingFinding]:
    """All selected ordering patterns for one block, canonically sorted."""
    found: list[OrderingFinding] = []
    for p in patterns:
        if p in FRONTRUN_PATTERNS:
            found += frontruns_in_block(block_actions, p, bid_agnostic_markets)
        elif p == "listing_buy_backrun":
            found += backruns_in_block(block_actions, on_chain_markets)
        elif p == "cancel_buy_lossmin":
            found += lossmin_in_block(block_actions)
        else:
            raise ValueError(f"unknown pattern {p!r}")
    return sorted(found, key=OrderingFinding.sort_key)


def group_actions_by_block(actions: Iterable[TradeAction]) -> list[list[TradeAction]]:
    return list(_by_block(actions))


# --- channel classification --------------------------------------------------


@dataclass(frozen=True)
class MinerClassification:
    txn_hash: str
    channel: str  # mempool | flashbots | private_mining
    miner_payment: int


def load_flashbots_list(path) -> frozenset[str]:
    with open(path) as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip() and not line.startswith("#"))


def classify_channel(
    finding: OrderingFinding, flashbots: Collection[str], block: Block, token_set: TokenContractSet | None = None
) -> MinerClassification:
    tx_hash = finding.attacker.txn_hash
    txn = next((t for t in block.txns if t.hash == tx_hash), None)
    if txn is None:
        raise ValueError(f"block {block.number} does not contain {tx_hash}")
    graph = build_payment_graph(txn, token_set or TokenContractSet())
    paid = sum(e.amount for e in graph.edges if e.asset == NATIVE and e.payee == block.miner)
    if tx_hash in flashbots:
        return MinerClassification(tx_hash, "flashbots", paid)
    if paid > 0:
        return MinerClassification(tx_hash, "private_mining", paid)
    return MinerClassification(tx_hash, "mempool", 0)


# --- gas wars ----------------------------------------------------------------


class NoWinner(Exception):
    pass


@dataclass(frozen=True)
class GasWarStat:
    nft: NftRef
    block_number: int
    contender_count: int
    gc_high: int
    gc_low_est: int

    @property
    def delta(self) -> int:
        return self.gc_high - self.gc_low_est


def gas_war_stat(contenders: list[TradeAction]) -> GasWarStat:
    """Gas cost of the winning contender against the cheapest one.

    The cheapest contender's cost is estimated with the winner's gas usage,
    since a failed txn burns less gas than it would have on success.
    """
    winners = {a.txn_hash: a for a in contenders if a.succeeded}
    if len(winners) != 1:
        raise NoWinner(f"{len(winners)} successful contenders")
    (winner,) = winners.values()
    unique = {a.txn_hash: a for a in contenders}
    low = min(a.gas_price for a in unique.values())
    return GasWarStat(
        winner.nft, winner.block_number, len(unique), winner.gas_price * winner.gas_used, low * winner.gas_used
    )


def gas_war_stats(findings: Iterable[OrderingFinding], errors: list[str] | None = None) -> Iterator[GasWarStat]:
    """One stat per (nft, block) among frontrun findings.

    Contenders are the attackers plus victims performing the same action as
    the attacker (competing buyers in a buy--buy war).
    """
    groups: dict[tuple, list[TradeAction]] = {}
    for f in findings:
        if f.pattern not in FRONTRUN_PATTERNS:
            continue
        key = (f.block_number, f.nft)
        members = groups.setdefault(key, [])
        members.append(f.attacker)
        if f.victim.kind == f.attacker.kind:
            members.append(f.victim)
    for key in sorted(groups, key=lambda k: (k[0], k[1].contract, k[1].token_id)):
        try:
            yield gas_war_stat(groups[key])
        except NoWinner as exc:
            msg = f"block {key[0]} nft {key[1].contract}/{key[1].token_id}: {exc}"
            log.warning("gas war skipped: %s", msg)
            if errors is not None:
                errors.append(msg)
