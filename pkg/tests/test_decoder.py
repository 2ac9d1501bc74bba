import json

import pytest

from nftscope.chain import REVERTED, ZERO_ADDRESS
from nftscope.decoder import (
    NftRef,
    RecipeFailure,
    Registry,
    RegistryError,
    ScanReport,
    TradeAction,
    decode_trade_action,
    identify_token_contracts,
    load_registry,
    parse_registry,
    scan_trade_actions,
)
from nftscope.synth import (
    AZUKI,
    PUNKS,
    SYNTH_MARKET,
    WETH,
    ChainBuilder,
    address_of,
    call,
    erc20_transfer,
    log,
    market_tx,
    nft_transfer,
    tx,
)
from nftscope.decoder import TRANSFER_SINGLE_TOPIC

REG = Registry(load_registry())
ALICE, BOB = address_of("alice"), address_of("bob")


def one(txns):
    cb = ChainBuilder()
    return cb.add_block(txns)


@pytest.mark.parametrize("kind", ["listing", "cancel_listing", "buy", "place_bid", "accept_bid", "cancel_bid"])
@pytest.mark.parametrize("market,nft", [("synth", AZUKI), ("punks", PUNKS)])
def test_every_action_kind_decodes(kind, market, nft):
    b = one([market_tx(market, kind, ALICE, nft, 42, 3 * 10**18, seller=BOB)])
    a = decode_trade_action(b.txns[0], REG)
    assert a.kind == kind and a.nft == NftRef(nft, 42) and a.marketplace == market
    assert a.sender == ALICE
    if kind in ("buy", "place_bid", "listing", "accept_bid"):
        assert a.price == 3 * 10**18


def test_reverted_action_kept_with_status():
    b = one([market_tx("synth", "buy", ALICE, AZUKI, 1, 10, status=REVERTED)])
    a = decode_trade_action(b.txns[0], REG)
    assert a.status == "reverted" and not a.succeeded


def test_unknown_selector_and_plain_transfer():
    b = one([tx(ALICE, SYNTH_MARKET, b"\x01\x02\x03\x04" + bytes(32)), tx(ALICE, BOB, value=5)])
    assert decode_trade_action(b.txns[0], REG) is None
    assert decode_trade_action(b.txns[1], REG) is None


def test_routed_through_bot_contract():
    bot = address_of("bot")
    inner = market_tx("synth", "buy", ALICE, AZUKI, 9, 10**18)
    t = tx(ALICE, bot, b"\xaa\xbb\xcc\xdd", value=10**18, calls=[call(bot, SYNTH_MARKET, 10**18, inner.input_data)])
    a = decode_trade_action(one([t]).txns[0], REG)
    assert a.kind == "buy" and a.nft == NftRef(AZUKI, 9) and a.sender == ALICE


def test_short_calldata_is_recipe_failure():
    b = one([tx(ALICE, SYNTH_MARKET, b"\x01"), market_tx("synth", "buy", BOB, AZUKI, 1, 1)])
    with pytest.raises(RecipeFailure):
        decode_trade_action(b.txns[0], REG)
    report = ScanReport()
    acts = list(scan_trade_actions([b], REG, report))
    assert len(acts) == 1 and len(report.recipe_failures) == 1


def test_log_sourced_recipe_wyvern():
    wyvern = next(iter(next(d for d in REG.descriptors if d.name == "wyvern").contract_addresses))
    sel = next(s for s, r in next(d for d in REG.descriptors if d.name == "wyvern").action_selectors.items() if r.kind == "buy")
    t = tx(ALICE, wyvern, sel + bytes(64), value=7, logs=[nft_transfer(AZUKI, BOB, ALICE, 77)])
    a = decode_trade_action(one([t]).txns[0], REG)
    assert a.kind == "buy" and a.nft == NftRef(AZUKI, 77) and a.price == 7


def test_action_json_roundtrip(demo_blocks):
    acts = list(scan_trade_actions(demo_blocks, REG))
    assert acts
    for a in acts:
        assert TradeAction.from_json(json.loads(json.dumps(a.to_json()))) == a


def test_scan_order(demo_blocks):
    acts = list(scan_trade_actions(demo_blocks, REG))
    keys = [(a.block_number, a.txn_index) for a in acts]
    assert keys == sorted(keys)


@pytest.mark.parametrize(
    "entries",
    [
        {"name": "x"},
        [{"name": "x", "contracts": [], "actions": {"0x1234": {"kind": "buy", "nft_contract": "value", "token_id": "value"}}}],
        [{"name": "x", "contracts": [], "actions": {"0x12345678": {"kind": "swap", "nft_contract": "value", "token_id": "value"}}}],
        [{"name": "x", "contracts": [], "actions": {"0x12345678": {"kind": "buy", "nft_contract": "calldata:x", "token_id": "value"}}}],
        [{"name": "x", "contracts": [], "actions": {"0x12345678": {"kind": "buy", "token_id": "value"}}}],
        [{"name": "x", "contracts": [], "actions": {}}, {"name": "x", "contracts": [], "actions": {}}],
    ],
)
def test_bad_registry(entries):
    with pytest.raises(RegistryError):
        parse_registry(entries)


def test_address_claimed_twice():
    d = parse_registry([{"name": "a", "contracts": [ALICE], "actions": {}}, {"name": "b", "contracts": [ALICE], "actions": {}}])
    with pytest.raises(RegistryError):
        Registry(d)


def test_market_flags():
    assert REG.on_chain_listing_markets == {"synth", "punks"}
    assert "wyvern" not in REG.bid_agnostic_markets


def test_token_identification():
    erc1155 = address_of("multi")
    t = tx(
        ALICE, BOB,
        logs=[
            nft_transfer(AZUKI, ZERO_ADDRESS, ALICE, 1),
            erc20_transfer(WETH, ALICE, BOB, 5),
            log(erc1155, [TRANSFER_SINGLE_TOPIC, ALICE, ZERO_ADDRESS, ALICE], bytes(64)),
        ],
    )
    ts = identify_token_contracts([one([t])])
    assert ts.erc721 == {AZUKI} and ts.erc1155 == {erc1155} and not ts.ambiguous
    assert WETH not in ts.erc721 and not ts.is_nft(WETH)


def test_token_identification_majority():
    odd = address_of("odd")
    t = tx(ALICE, BOB, logs=[nft_transfer(odd, ALICE, BOB, 1), nft_transfer(odd, ALICE, BOB, 2), erc20_transfer(odd, ALICE, BOB, 1)])
    ts = identify_token_contracts([one([t])])
    assert odd in ts.erc721 and odd in ts.ambiguous


def test_token_set_from_demo(demo_blocks, scenarios):
    ts = identify_token_contracts(demo_blocks)
    assert AZUKI in ts.erc721 and WETH not in ts.erc721
    # punks predate the standard and emit no standard Transfer
    assert PUNKS not in ts.erc721
    assert scenarios["mint_evasion"].expect["token"] in ts.erc721
    from nftscope.decoder import TokenContractSet

    assert TokenContractSet.from_json(json.loads(json.dumps(ts.to_json()))) == ts
