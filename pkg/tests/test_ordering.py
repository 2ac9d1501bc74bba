import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nftscope.chain import ChainIndex
from nftscope.decoder import NftRef, Registry, TradeAction, identify_token_contracts, load_registry, scan_trade_actions
from nftscope.ordering import (
    FRONTRUN_PATTERNS,
    NoWinner,
    OrderingFinding,
    classify_channel,
    detect_backruns,
    detect_frontruns,
    detect_loss_minimization,
    gas_war_stat,
    gas_war_stats,
    ordering_findings_in_block,
)
from nftscope.synth import ChainBuilder, frontrun_dataset

from oracles import brute_force_pairs

REG = Registry(load_registry())
KINDS = ("listing", "cancel_listing", "buy", "place_bid", "accept_bid", "cancel_bid")
SENDERS = ["0x" + f"{i:040x}" for i in range(1, 5)]


def act(kind, idx, sender, gp, ok=True, block=1, token=1, market="synth", price=10, h=None):
    return TradeAction(
        kind, sender, market, NftRef("0x" + "ab" * 20, token), price, h or f"0x{block:04x}{idx:060x}",
        block, idx, "success" if ok else "reverted", gp, 21000, 0, sender,
    )


@st.composite
def block_actions(draw):
    n = draw(st.integers(0, 14))
    out = []
    for block in (1, 2):
        for i in range(n):
            out.append(
                act(
                    draw(st.sampled_from(KINDS)), i, draw(st.sampled_from(SENDERS)), draw(st.integers(1, 5)),
                    draw(st.booleans()), block, draw(st.integers(1, 2)), draw(st.sampled_from(["synth", "wyvern"])),
                    draw(st.integers(1, 3)),
                )
            )
    return out


def keys(findings):
    return {(f.pattern, f.attacker.txn_hash, f.victim.txn_hash) for f in findings}


@settings(max_examples=300, deadline=None)
@given(block_actions())
def test_detectors_match_brute_force(actions):
    found = set()
    for p in FRONTRUN_PATTERNS:
        found |= keys(detect_frontruns(actions, p, REG.bid_agnostic_markets))
    found |= keys(detect_backruns(actions, REG.on_chain_listing_markets))
    found |= keys(detect_loss_minimization(actions))
    patterns = [*FRONTRUN_PATTERNS, "listing_buy_backrun", "cancel_buy_lossmin"]
    assert found == brute_force_pairs(actions, patterns, REG.bid_agnostic_markets, REG.on_chain_listing_markets)


@settings(max_examples=100, deadline=None)
@given(block_actions())
def test_findings_respect_invariants(actions):
    by_block = {}
    for a in actions:
        by_block.setdefault(a.block_number, []).append(a)
    for group in by_block.values():
        for f in ordering_findings_in_block(group):
            assert f.attacker.block_number == f.victim.block_number
            assert f.attacker.sender != f.victim.sender
            if f.pattern in FRONTRUN_PATTERNS or f.pattern == "cancel_buy_lossmin":
                assert f.attacker.txn_index < f.victim.txn_index and f.gas_delta > 0
            else:
                assert f.attacker.txn_index > f.victim.txn_index and f.gas_delta < 0


def test_simple_buy_buy():
    t1, t2 = act("buy", 0, SENDERS[0], 9), act("buy", 1, SENDERS[1], 5, ok=False)
    (f,) = detect_frontruns([t1, t2], "buy_buy")
    assert f.attacker == t1 and f.victim == t2 and f.gas_delta == 4


@pytest.mark.parametrize(
    "why,t1,t2",
    [
        ("equal gas", act("buy", 0, SENDERS[0], 5), act("buy", 1, SENDERS[1], 5, ok=False)),
        ("same sender", act("buy", 0, SENDERS[0], 9), act("buy", 1, SENDERS[0], 5, ok=False)),
        ("victim succeeded", act("buy", 0, SENDERS[0], 9), act("buy", 1, SENDERS[1], 5)),
        ("attacker failed", act("buy", 0, SENDERS[0], 9, ok=False), act("buy", 1, SENDERS[1], 5, ok=False)),
        ("other token", act("buy", 0, SENDERS[0], 9), act("buy", 1, SENDERS[1], 5, ok=False, token=2)),
        ("other block", act("buy", 0, SENDERS[0], 9), act("buy", 1, SENDERS[1], 5, ok=False, block=2)),
    ],
)
def test_buy_buy_near_misses(why, t1, t2):
    assert list(detect_frontruns([t1, t2], "buy_buy")) == [], why


def test_placebid_needs_bid_agnostic_market():
    t1 = act("place_bid", 0, SENDERS[0], 9, market="wyvern", price=11)
    t2 = act("accept_bid", 1, SENDERS[1], 5, market="wyvern", price=10)
    assert list(detect_frontruns([t1, t2], "placebid_acceptbid", REG.bid_agnostic_markets)) == []
    assert len(list(detect_frontruns([t1, t2], "placebid_acceptbid", None))) == 1


def test_backrun_needs_on_chain_listing():
    t1 = act("listing", 0, SENDERS[0], 9, market="wyvern")
    t2 = act("buy", 1, SENDERS[1], 5, market="wyvern")
    assert list(detect_backruns([t1, t2], REG.on_chain_listing_markets)) == []


def test_out_of_order_stream_rejected():
    with pytest.raises(ValueError):
        list(detect_loss_minimization([act("buy", 0, SENDERS[0], 1, block=2), act("buy", 0, SENDERS[0], 1, block=1)]))


def test_unknown_pattern():
    with pytest.raises(ValueError):
        list(detect_frontruns([], "sandwich"))


def test_finding_json_roundtrip():
    t1, t2 = act("buy", 0, SENDERS[0], 9), act("buy", 1, SENDERS[1], 5, ok=False)
    f = OrderingFinding("buy_buy", t1, t2)
    assert OrderingFinding.from_json(f.to_json()) == f


def test_manifest_small():
    cb = ChainBuilder(label="small")
    m = frontrun_dataset(cb, n_blocks=30, n_pairs=8, n_decoys=12, seed=1)
    acts = list(scan_trade_actions(cb.blocks, REG))
    found = set()
    for p in FRONTRUN_PATTERNS:
        found |= keys(detect_frontruns(acts, p, REG.bid_agnostic_markets))
    assert found == m.expected()
    decoy_hashes = {h for _, h1, h2 in m.decoys for h in (h1, h2)}
    assert not decoy_hashes & {h for _, a, v in found for h in (a, v)}


def test_punks_cases(demo_blocks, scenarios):
    acts = list(scan_trade_actions(demo_blocks, REG))
    pb = scenarios["punks_bid_backrun"].expect
    lm = scenarios["punks_lossmin"].expect
    assert pb["placebid"] in {(f.attacker.txn_hash, f.victim.txn_hash) for f in detect_frontruns(acts, "placebid_acceptbid", REG.bid_agnostic_markets)}
    (br,) = detect_backruns(acts, REG.on_chain_listing_markets)
    assert (br.attacker.txn_hash, br.victim.txn_hash) == pb["backrun"]
    (ls,) = detect_loss_minimization(acts)
    assert (ls.attacker.txn_hash, ls.victim.txn_hash) == (lm["cancel"], lm["buy"])


def test_single_contender_gas_war():
    w = act("buy", 0, SENDERS[0], 9)
    s = gas_war_stat([w])
    assert s.contender_count == 1 and s.gc_high == s.gc_low_est == 9 * 21000


def test_gas_war_requires_single_winner():
    with pytest.raises(NoWinner):
        gas_war_stat([act("buy", 0, SENDERS[0], 9, ok=False), act("buy", 1, SENDERS[1], 5, ok=False)])
    errors = []
    w1, w2, loser = act("buy", 0, SENDERS[0], 9), act("buy", 1, SENDERS[1], 8), act("buy", 2, SENDERS[2], 2, ok=False)
    findings = [OrderingFinding("buy_buy", w1, loser), OrderingFinding("buy_buy", w2, loser)]
    assert list(gas_war_stats(findings, errors)) == [] and len(errors) == 1


def test_channels(demo_blocks, scenarios):
    ts = identify_token_contracts(demo_blocks)
    index = ChainIndex(demo_blocks)
    acts = list(scan_trade_actions(demo_blocks, REG))
    pm = scenarios["private_mining"].expect
    (f,) = [f for f in detect_frontruns(acts, "buy_buy") if f.attacker.txn_hash == pm["attacker"]]
    block = index.block(f.block_number)
    c = classify_channel(f, frozenset(), block, ts)
    assert c.channel == "private_mining" and c.miner_payment == pm["tip"]
    assert classify_channel(f, frozenset({pm["attacker"]}), block, ts).channel == "flashbots"
    (az,) = {f.attacker.txn_hash for f in detect_frontruns(acts, "buy_buy") if f.attacker.txn_hash == scenarios["azuki"].expect["buy_txn"]}
    fa = next(f for f in detect_frontruns(acts, "buy_buy") if f.attacker.txn_hash == az)
    assert classify_channel(fa, frozenset(), index.block(fa.block_number), ts).channel == "mempool"
