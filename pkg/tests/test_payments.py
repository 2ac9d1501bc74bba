import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nftscope.chain import ChainIndex, eth
from nftscope.decoder import NftRef, TokenContractSet, identify_token_contracts
from nftscope.payments import (
    NATIVE,
    AddressHistory,
    Asset,
    PaymentEdge,
    PaymentGraph,
    build_payment_graph,
    compute_sale_earnings,
    detect_instant_profit,
    naive_incoming,
    resold_buyers,
    tainted_edges,
    trace_sale,
)
from nftscope.synth import AZUKI, WETH, ChainBuilder, address_of, call, erc20_transfer, nft_transfer, trace, tx

from oracles import forward_taint

NODES = [address_of(f"n{i}") for i in range(6)]
edge = st.builds(
    PaymentEdge,
    st.sampled_from(NODES),
    st.sampled_from(NODES),
    st.integers(1, 10**20),
    st.sampled_from([NATIVE, Asset("erc20", WETH), Asset("nft", AZUKI, 1)]),
)


@settings(max_examples=300, deadline=None)
@given(st.lists(edge, max_size=25), st.sampled_from(NODES))
def test_taint_matches_forward_pass(edges, source):
    g = PaymentGraph("0x", tuple(edges))
    assert tainted_edges(g, source) == forward_taint(edges, source)


@settings(max_examples=200, deadline=None)
@given(st.lists(edge, max_size=25), st.sampled_from(NODES))
def test_taint_never_includes_nft_or_precedes_source(edges, source):
    g = PaymentGraph("0x", tuple(edges))
    hit = tainted_edges(g, source)
    assert all(edges[i].asset.is_money for i in hit)
    first = next((i for i, e in enumerate(edges) if e.payer == source and e.asset.is_money), None)
    if first is None:
        assert not hit
    else:
        assert min(hit) == first


def test_late_payment_not_tainted():
    a, b, c = NODES[:3]
    # c pays b before a's money arrives at c
    g = PaymentGraph("0x", (PaymentEdge(c, b, 5), PaymentEdge(a, c, 7)))
    assert tainted_edges(g, a) == {1}


def test_graph_interleaves_calls_and_logs():
    a, b, m = address_of("a"), address_of("b"), address_of("m")
    ts = TokenContractSet(erc721=frozenset({AZUKI}))
    logs, calls = trace(
        erc20_transfer(WETH, a, m, 3),
        call(m, b, 9),
        nft_transfer(AZUKI, b, a, 5),
    )
    cb = ChainBuilder()
    t = cb.add_block([tx(a, m, b"\x00\x00\x00\x01", value=2, logs=logs, calls=calls)]).txns[0]
    g = build_payment_graph(t, ts)
    assert [(e.payer, e.payee, e.asset.kind) for e in g.edges] == [
        (a, m, "native"), (a, m, "erc20"), (m, b, "native"), (b, a, "nft"),
    ]


def test_reverted_graph_empty():
    cb = ChainBuilder()
    t = cb.add_block([tx(NODES[0], NODES[1], value=5, status="reverted")]).txns[0]
    assert build_payment_graph(t, TokenContractSet()).edges == ()


def test_airdrop_separation(demo_blocks, scenarios):
    exp = scenarios["airdrop"].expect
    index = ChainIndex(demo_blocks)
    ts = identify_token_contracts(demo_blocks)
    t = index.txn(exp["txn"])
    rec = compute_sale_earnings(t, exp["seller"], exp["buyer"], ts, NftRef(exp["nft"], exp["token_id"]))
    assert rec.pay_in == exp["pay_in"] and rec.pay_out == exp["pay_out"]
    assert naive_incoming(t, exp["seller"], ts) - rec.pay_in == exp["airdrop"]


def test_unconditional_transfer_merges_identity():
    cb = ChainBuilder()
    ts = TokenContractSet(erc721=frozenset({AZUKI}))
    owner, alt, buyer, market = (address_of(x) for x in ("own", "alt", "buy", "mkt"))
    b0 = cb.add_block([tx(owner, market, value=1)])
    cb.add_block([tx(owner, AZUKI, b"\x00\x00\x00\x02", logs=[nft_transfer(AZUKI, owner, alt, 3)])])
    logs, calls = trace(call(market, alt, eth(4)), nft_transfer(AZUKI, alt, buyer, 3))
    b2 = cb.add_block([tx(buyer, market, b"\x00\x00\x00\x03", value=eth(4), logs=logs, calls=calls)])
    rec, merged = trace_sale(NftRef(AZUKI, 3), owner, b0.txns[0], ChainIndex(cb.blocks), ts)
    assert merged == [owner, alt]
    assert rec.sale_txn == b2.txns[0].hash and rec.pay_in == eth(4)


def test_unsold_returns_none():
    cb = ChainBuilder()
    b0 = cb.add_block([tx(NODES[0], NODES[1], value=1)])
    rec, merged = trace_sale(NftRef(AZUKI, 1), NODES[0], b0.txns[0], ChainIndex(cb.blocks), TokenContractSet())
    assert rec is None and merged == [NODES[0]]


def test_resold_buyers():
    a, b, c = NODES[:3]
    nft = Asset("nft", AZUKI, 1)
    g = PaymentGraph("0x", (PaymentEdge(a, b, 1, nft), PaymentEdge(b, c, 1, nft)))
    assert resold_buyers(g) == {b}
    assert resold_buyers(PaymentGraph("0x", (PaymentEdge(a, b, 1, nft),))) == set()


@pytest.fixture(scope="module")
def profit_ctx(demo_blocks):
    ts = identify_token_contracts(demo_blocks)
    return ChainIndex(demo_blocks), ts, AddressHistory.build(demo_blocks, ts)


@pytest.mark.parametrize("name", ["moonbirds", "spaceshibas", "mayc"])
def test_instant_profit_cases(profit_ctx, scenarios, name):
    index, ts, history = profit_ctx
    exp = scenarios[name].expect
    f = detect_instant_profit(index.txn(exp["txn"]), ts, history)
    assert f is not None
    assert f.kind_hint == exp["kind_hint"]
    assert f.net_native_profit == exp["net"]


def test_mayc_loan_legs_cancel(profit_ctx, scenarios):
    index, ts, _ = profit_ctx
    exp = scenarios["mayc"].expect
    g = build_payment_graph(index.txn(exp["txn"]), ts)
    lent = sum(e.amount for e in g.edges if e.payer == exp["lender"])
    repaid = sum(e.amount for e in g.edges if e.payee == exp["lender"])
    assert lent == repaid > 0


def test_th_e_zero_disables_expansion(profit_ctx, scenarios):
    index, ts, history = profit_ctx
    t = index.txn(scenarios["moonbirds"].expect["txn"])
    with_history = detect_instant_profit(t, ts, history)
    without = detect_instant_profit(t, ts, None)
    degenerate = detect_instant_profit(t, ts, history, th_e=0)
    assert degenerate.clique == without.clique
    assert with_history.net_native_profit == without.net_native_profit


def test_plain_sale_not_instant_profit(profit_ctx, scenarios):
    index, ts, history = profit_ctx
    assert detect_instant_profit(index.txn(scenarios["airdrop"].expect["txn"]), ts, history) is None
    assert detect_instant_profit(index.txn(scenarios["azuki"].expect["buy_txn"]), ts, history) is None


def test_exchange_like_peer_excluded():
    # a hub that hundreds of senders paid is not pulled into the clique
    cb = ChainBuilder()
    ts = TokenContractSet(erc721=frozenset({AZUKI}))
    trader, bot, hub, seller, taker = (address_of(x) for x in ("tr", "bot", "hub", "sel", "tak"))
    cb.add_block([tx(address_of(f"u{i}"), hub, value=1) for i in range(30)] + [tx(trader, hub, value=1)])
    logs, calls = trace(
        call(bot, hub, eth(1)),
        call(hub, seller, eth(1), depth=2),
        nft_transfer(AZUKI, seller, bot, 1),
        nft_transfer(AZUKI, bot, taker, 1),
        erc20_transfer(WETH, taker, bot, eth(3)),
    )
    t = cb.add_block([tx(trader, bot, b"\x01\x01\x01\x01", logs=logs, calls=calls, gas_price=1, gas_used=1)]).txns[0]
    h = AddressHistory.build(cb.blocks, ts)
    assert hub in detect_instant_profit(t, ts, h, th_e=100).clique
    f = detect_instant_profit(t, ts, h, th_e=10)
    assert hub not in f.clique
    assert f.net_native_profit == eth(3) - eth(1) - 1


CLIQUE_NODES = [address_of(f"q{i}") for i in range(12)]
q_edge = st.builds(
    PaymentEdge,
    st.sampled_from(CLIQUE_NODES),
    st.sampled_from(CLIQUE_NODES),
    st.integers(1, 10**6),
    st.sampled_from([NATIVE, Asset("erc20", WETH), Asset("nft", AZUKI, 1)]),
)


@settings(max_examples=300, deadline=None)
@given(st.lists(q_edge, max_size=30), st.sets(st.sampled_from(CLIQUE_NODES)))
def test_clique_netting_matches_member_balances(edges, clique):
    from nftscope.payments import net_flows

    pay_in, pay_out = net_flows(PaymentGraph("0x", tuple(edges)), frozenset(clique))
    # summing every member's balance change cancels intra-clique edges on its own
    want: dict = {}
    for e in edges:
        if e.payee in clique:
            want[e.asset] = want.get(e.asset, 0) + e.amount
        if e.payer in clique:
            want[e.asset] = want.get(e.asset, 0) - e.amount
    for a in set(want) | set(pay_in) | set(pay_out):
        assert pay_in.get(a, 0) - pay_out.get(a, 0) == want.get(a, 0)
