"""Slow, obviously-correct reference implementations used by the tests."""

from collections import Counter
from fractions import Fraction

from nftscope.chain import ZERO_ADDRESS

ORDER_RULES = {
    # pattern: (first kind, second kind, first must succeed, second status, gas order)
    "buy_buy": ("buy", "buy", True, False, "first_higher"),
    "buy_cancel": ("buy", "cancel_listing", True, False, "first_higher"),
    "acceptbid_cancelbid": ("accept_bid", "cancel_bid", True, False, "first_higher"),
    "placebid_acceptbid": ("place_bid", "accept_bid", True, True, "first_higher"),
    "cancel_buy_lossmin": ("cancel_listing", "buy", True, False, "first_higher"),
    "listing_buy_backrun": ("listing", "buy", True, True, "first_higher"),
}


def brute_force_pairs(actions, patterns, bid_agnostic=None, on_chain=None):
    """Every ordered pair of actions checked against every rule, O(n^2)."""
    out = set()
    for pattern in patterns:
        k1, k2, ok1, ok2, _ = ORDER_RULES[pattern]
        for a in actions:
            for b in actions:
                if a is b or a.block_number != b.block_number or a.txn_index >= b.txn_index:
                    continue
                if a.kind != k1 or b.kind != k2 or a.nft != b.nft or a.marketplace != b.marketplace:
                    continue
                if a.sender == b.sender or a.succeeded != ok1 or b.succeeded != ok2:
                    continue
                if a.gas_price <= b.gas_price:
                    continue
                if pattern == "placebid_acceptbid":
                    if bid_agnostic is not None and a.marketplace not in bid_agnostic:
                        continue
                    if a.price < b.price:
                        continue
                if pattern == "listing_buy_backrun":
                    if on_chain is not None and a.marketplace not in on_chain:
                        continue
                    # the later buy is the attacker
                    out.add((pattern, b.txn_hash, a.txn_hash))
                    continue
                out.add((pattern, a.txn_hash, b.txn_hash))
    return out


def forward_taint(edges, source):
    """Single left-to-right pass: an edge is tainted iff its payer already is."""
    tainted_nodes = {source}
    hit = set()
    for i, e in enumerate(edges):
        if not e.asset.is_money:
            continue
        if e.payer in tainted_nodes:
            hit.add(i)
            tainted_nodes.add(e.payee)
    return hit


def fold_cornering(events, th_f, th_t, exclude=frozenset()):
    """Recount the whole collection from scratch after every event."""
    owner = {}
    found = []
    seen = set()
    burn = {ZERO_ADDRESS, "0x000000000000000000000000000000000000dead"}
    for ev in events:
        if ev.receiver in burn:
            owner.pop(ev.token_id, None)
        else:
            owner[ev.token_id] = ev.receiver
        if ev.receiver in burn or ev.receiver in exclude:
            continue
        supply = len(owner)
        balances = Counter(owner.values())
        if supply < th_t or len(balances) <= 1:
            continue
        frac = Fraction(balances[ev.receiver], supply)
        if frac > th_f and (ev.contract, ev.receiver) not in seen:
            seen.add((ev.contract, ev.receiver))
            found.append((ev.contract, ev.receiver, frac, ev.txn_hash))
    return found


def linear_rate(rates, at):
    """Latest (timestamp, rate) at or before ``at`` by scanning everything."""
    best = None
    for ts, r in rates:
        if ts <= at and (best is None or ts >= best[0]):
            best = (ts, r)
    return best
