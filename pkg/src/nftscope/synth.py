"""Deterministic synthetic chains for demos, tests and benchmarks.

Scenario builders append blocks to a shared :class:`ChainBuilder` and return
what a correct analysis must find in them.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .chain import (
    REVERTED,
    SUCCESS,
    ZERO_ADDRESS,
    Block,
    EventLog,
    InternalCall,
    Txn,
    address_word,
    eth,
    topic_hex,
)
from .decoder import TRANSFER_TOPIC

GWEI = 10**9


def address_of(label: str) -> str:
    return "0x" + hashlib.sha256(label.encode()).hexdigest()[:40]


SYNTH_MARKET = "0x00000000000000000000000000000000000a11ce"
PUNKS = "0xb47e3cd837ddf8e4c57f05d70ab865de6e193bbb"
WYVERN = "0x7be8076f4ea4a4ad08075c2508e481d6c946d12b"
WETH = "0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2"
AZUKI = "0xed5af388653567af2f388e6224dc7c4b3241c544"
MOONBIRDS = "0x23581767a106ae21c074b2276d25e5c3e136a68b"
MAYC = "0x60e4d786628fea6478f785a6d7e704777c86a7c6"
DEFAULT_MINER = address_of("miner")

SEL = {
    "synth.listing": "dda342bb",
    "synth.cancel_listing": "98590ef9",
    "synth.buy": "cce7ec13",
    "synth.place_bid": "d98b9bb5",
    "synth.accept_bid": "e13a40f0",
    "synth.cancel_bid": "39b6b1e5",
    "punks.listing": "c44193c3",
    "punks.cancel_listing": "f6eeff1e",
    "punks.buy": "8264fe98",
    "punks.place_bid": "091dbfd2",
    "punks.accept_bid": "23165b75",
    "punks.cancel_bid": "979bc638",
    "wyvern.buy": "ab834bab",
    "mint": "a0712d68",
}


def calldata(selector: str, *words: int | str) -> bytes:
    out = bytes.fromhex(selector.removeprefix("0x"))
    for w in words:
        if isinstance(w, str):
            w = address_word(w)
        out += w.to_bytes(32, "big")
    return out


def log(emitter: str, topics: list[int | str], data: bytes = b"") -> EventLog:
    return EventLog(emitter, tuple(t if isinstance(t, str) else topic_hex(t) for t in topics), data, -1)


def nft_transfer(contract: str, frm: str, to: str, token_id: int) -> EventLog:
    return log(contract, [TRANSFER_TOPIC, address_word(frm), address_word(to), token_id])


def erc20_transfer(contract: str, frm: str, to: str, amount: int) -> EventLog:
    return log(contract, [TRANSFER_TOPIC, address_word(frm), address_word(to)], amount.to_bytes(32, "big"))


def call(caller: str, callee: str, value: int = 0, data: bytes = b"", depth: int = 1, logs_before: int = 0) -> InternalCall:
    return InternalCall(caller, callee, value, data, "call", depth, logs_before)


def tx(
    sender: str,
    to: str | None,
    data: bytes = b"",
    value: int = 0,
    gas_price: int = 50 * GWEI,
    gas_used: int = 100_000,
    status: str = SUCCESS,
    logs=(),
    calls=(),
) -> Txn:
    """A txn skeleton; ChainBuilder.add_block fills hash and position."""
    return Txn("", -1, -1, status, sender, to, gas_price, gas_used, data, value, tuple(logs), tuple(calls))


def trace(*steps) -> tuple[tuple[EventLog, ...], tuple[InternalCall, ...]]:
    """Split an ordered mix of logs and calls, recording their interleaving."""
    logs: list[EventLog] = []
    calls: list[InternalCall] = []
    for s in steps:
        if isinstance(s, EventLog):
            logs.append(s)
        else:
            calls.append(replace(s, logs_before=len(logs)))
    return tuple(logs), tuple(calls)


class ChainBuilder:
    def __init__(self, first_block: int = 15_000_000, t0: int = 1_650_000_000, block_time: int = 12, label: str = "chain"):
        self.blocks: list[Block] = []
        self.next_number = first_block
        self.t0 = t0
        self.block_time = block_time
        self.first_block = first_block
        self.label = label
        self._hashes = 0

    def _hash(self) -> str:
        self._hashes += 1
        return "0x" + hashlib.sha256(f"{self.label}:{self._hashes}".encode()).hexdigest()

    def timestamp_of(self, number: int) -> int:
        return self.t0 + (number - self.first_block) * self.block_time

    def skip(self, n: int) -> None:
        self.next_number += n

    def add_block(self, txns, miner: str = DEFAULT_MINER, number: int | None = None) -> Block:
        number = self.next_number if number is None else number
        if number < self.next_number:
            raise ValueError(f"block {number} would go backwards")
        ts = self.timestamp_of(number)
        out = []
        log_index = 0
        for i, t in enumerate(txns):
            logs = []
            for lg in t.logs:
                logs.append(replace(lg, log_index=log_index))
                log_index += 1
            out.append(
                replace(t, hash=t.hash or self._hash(), block_number=number, index=i, timestamp=ts, logs=tuple(logs))
            )
        block = Block(number, ts, miner, tuple(out))
        self.blocks.append(block)
        self.next_number = number + 1
        return block


def market_tx(market: str, kind: str, sender: str, nft: str, token_id: int, price: int, **kw) -> Txn:
    """A marketplace call performing ``kind`` on (nft, token_id).

    Successful buys carry the NFT transfer (from ``kw['seller']``) and the
    payout to the seller.
    """
    seller = kw.pop("seller", None)
    if market == "synth":
        to = SYNTH_MARKET
        sel = SEL[f"synth.{kind}"]
        if kind == "listing":
            data = calldata(sel, nft, token_id, price)
        elif kind == "accept_bid":
            data = calldata(sel, nft, token_id, price)
        else:
            data = calldata(sel, nft, token_id)
    elif market == "punks":
        to = PUNKS
        sel = SEL[f"punks.{kind}"]
        data = calldata(sel, token_id, price) if kind in ("listing", "accept_bid") else calldata(sel, token_id)
    else:
        raise ValueError(market)
    value = price if kind in ("buy", "place_bid") else 0
    status = kw.get("status", SUCCESS)
    if kind == "buy" and status == SUCCESS and seller is not None:
        steps = []
        if market == "synth":
            steps.append(nft_transfer(nft, seller, sender, token_id))
        if price:
            steps.append(call(to, seller, price))
        logs, calls = trace(*steps)
        kw.setdefault("logs", logs)
        kw.setdefault("calls", calls)
    return tx(sender, to, data, value, **kw)


# --- frontrun rulebook dataset -------------------------------------------------


@dataclass
class PlantedPair:
    pattern: str
    attacker_hash: str
    victim_hash: str


@dataclass
class FrontrunManifest:
    planted: list[PlantedPair] = field(default_factory=list)
    decoys: list[tuple[str, str, str]] = field(default_factory=list)  # (reason, hash1, hash2)

    def expected(self) -> set[tuple[str, str, str]]:
        return {(p.pattern, p.attacker_hash, p.victim_hash) for p in self.planted}


_PATTERN_KINDS = {
    "buy_buy": ("buy", "buy"),
    "buy_cancel": ("buy", "cancel_listing"),
    "acceptbid_cancelbid": ("accept_bid", "cancel_bid"),
    "placebid_acceptbid": ("place_bid", "accept_bid"),
}
DECOY_REASONS = ("same_sender", "cross_block", "wrong_status", "wrong_gas_order")


def frontrun_dataset(
    cb: ChainBuilder, n_blocks: int = 200, n_pairs: int = 25, n_decoys: int = 30, seed: int = 7, noise: int = 3
) -> FrontrunManifest:
    """Plant frontrun pairs and near-miss decoys across ``n_blocks`` blocks.

    Every planted pair and decoy acts on its own token, so no action can pair
    with anything but its partner.
    """
    rng = random.Random(seed)
    patterns = list(_PATTERN_KINDS)
    collection = address_of(f"{cb.label}:collection")
    slots: list[list[Txn]] = [[] for _ in range(n_blocks)]
    token = iter(range(1, 10**9))
    user = iter(range(10**9))

    def new_user() -> str:
        return address_of(f"{cb.label}:user:{next(user)}")

    def place(pattern: str, reason: str | None) -> tuple[Txn, Txn]:
        k1, k2 = _PATTERN_KINDS[pattern]
        market = rng.choice(("synth", "punks"))
        tid = next(token)
        nft = collection if market == "synth" else PUNKS
        s1, s2 = new_user(), new_user()
        if reason == "same_sender":
            s2 = s1
        gp2 = rng.randrange(20, 80) * GWEI
        gp1 = gp2 + rng.randrange(1, 40) * GWEI
        if reason == "wrong_gas_order":
            gp1 = gp2 - rng.randrange(0, 10) * GWEI
        st1, st2 = SUCCESS, (SUCCESS if pattern == "placebid_acceptbid" else REVERTED)
        if reason == "wrong_status":
            if pattern == "placebid_acceptbid":
                st2 = REVERTED
            elif rng.random() < 0.5:
                st1 = REVERTED
            else:
                st2 = SUCCESS
        price2 = rng.randrange(1, 50) * 10**17
        price1 = price2 + (rng.randrange(0, 5) * 10**16 if pattern == "placebid_acceptbid" else 0)
        seller = new_user()
        t1 = market_tx(market, k1, s1, nft, tid, price1, gas_price=gp1, status=st1, seller=seller)
        t2 = market_tx(market, k2, s2, nft, tid, price2, gas_price=gp2, status=st2, seller=seller)
        b = rng.randrange(0, n_blocks - 1)
        if reason == "cross_block":
            slots[b].insert(rng.randrange(len(slots[b]) + 1), t1)
            slots[b + 1].insert(rng.randrange(len(slots[b + 1]) + 1), t2)
        else:
            i1 = rng.randrange(len(slots[b]) + 1)
            slots[b].insert(i1, t1)
            slots[b].insert(rng.randrange(i1 + 1, len(slots[b]) + 1), t2)
        return t1, t2

    records = []
    for i in range(n_pairs):
        p = patterns[i % len(patterns)]
        records.append((None, p, *place(p, None)))
    for i in range(n_decoys):
        reason = DECOY_REASONS[i % len(DECOY_REASONS)]
        p = patterns[rng.randrange(len(patterns))]
        records.append((reason, p, *place(p, reason)))

    hashes: dict[int, str] = {}
    for txns in slots:
        for _ in range(rng.randrange(0, noise + 1)):
            nt = tx(new_user(), new_user(), value=rng.randrange(1, 10**18), gas_price=rng.randrange(10, 90) * GWEI)
            txns.insert(rng.randrange(len(txns) + 1), nt)
        block = cb.add_block(txns)
        for src, built in zip(txns, block.txns):
            hashes[id(src)] = built.hash

    manifest = FrontrunManifest()
    for reason, p, t1, t2 in records:
        if reason is None:
            manifest.planted.append(PlantedPair(p, hashes[id(t1)], hashes[id(t2)]))
        else:
            manifest.decoys.append((reason, hashes[id(t1)], hashes[id(t2)]))
    return manifest


def bulk_trading_dataset(cb: ChainBuilder, n_txns: int, per_block: int = 150, seed: int = 11, tokens: int = 400) -> int:
    """Busy marketplace traffic for throughput runs; returns txns generated."""
    rng = random.Random(seed)
    collection = address_of(f"{cb.label}:bulk-collection")
    users = [address_of(f"{cb.label}:bulk-user:{i}") for i in range(500)]
    kinds = ("buy", "buy", "buy", "listing", "cancel_listing", "place_bid", "accept_bid", "cancel_bid")
    made = 0
    while made < n_txns:
        txns = []
        for _ in range(min(per_block, n_txns - made)):
            r = rng.random()
            if r < 0.6:
                kind = rng.choice(kinds)
                market = "synth" if r < 0.45 else "punks"
                nft = collection if market == "synth" else PUNKS
                status = SUCCESS if rng.random() < 0.6 else REVERTED
                txns.append(
                    market_tx(
                        market, kind, rng.choice(users), nft, rng.randrange(tokens), rng.randrange(1, 100) * 10**16,
                        gas_price=rng.randrange(10, 200) * GWEI, status=status,
                    )
                )
            else:
                txns.append(tx(rng.choice(users), rng.choice(users), value=rng.randrange(1, 10**18)))
            made += 1
        cb.add_block(txns)
    return made


# --- case scenarios ------------------------------------------------------------


@dataclass
class Scenario:
    name: str
    expect: dict = field(default_factory=dict)


def azuki_gas_war(cb: ChainBuilder, contenders: int = 8) -> Scenario:
    """One NFT, several competing buys in one block, resold the same day."""
    seller = address_of("azuki:seller")
    token_id = 4242
    cb.add_block([tx(address_of("azuki:minter"), AZUKI, calldata(SEL["mint"], 1), logs=[nft_transfer(AZUKI, ZERO_ADDRESS, seller, token_id)])])
    cb.skip(1200)  # about four hours
    listing_price = eth("0.16")
    winner = address_of("azuki:frontrunner:0")
    # 60,000 gwei x 200,000 gas = 12 ETH
    txns = [
        market_tx("synth", "buy", winner, AZUKI, token_id, listing_price, gas_price=60_000 * GWEI, gas_used=200_000, seller=seller)
    ]
    for i in range(1, contenders):
        txns.append(
            market_tx(
                "synth", "buy", address_of(f"azuki:frontrunner:{i}"), AZUKI, token_id, listing_price,
                gas_price=(6_000 - 500 * i) * GWEI, gas_used=45_000, status=REVERTED,
            )
        )
    buy_block = cb.add_block(txns)
    cb.skip(2400)  # same day
    resale_buyer = address_of("azuki:resale-buyer")
    resale = market_tx("synth", "buy", resale_buyer, AZUKI, token_id, eth("14.36"), seller=winner)
    sale_block = cb.add_block([resale])
    return Scenario(
        "azuki",
        {
            "buy_txn": buy_block.txns[0].hash,
            "sale_txn": sale_block.txns[0].hash,
            "winner": winner,
            "contenders": contenders,
            "fee": 60_000 * GWEI * 200_000,
            "profit": eth("14.36") - listing_price - 60_000 * GWEI * 200_000,
            "buy_buy_findings": contenders - 1,
        },
    )


def moonbirds_arbitrage(cb: ChainBuilder) -> Scenario:
    """Buy from a listing and fill a higher collection offer in one txn."""
    trader, bot = address_of("moonbirds:trader"), address_of("moonbirds:bot")
    seller, offer_maker = address_of("moonbirds:seller"), address_of("moonbirds:offer-maker")
    exchange, fee_recipient = address_of("looksrare:exchange"), address_of("looksrare:fee")
    token_id = 7777
    cb.add_block([tx(trader, bot, b"\x01\x02\x03\x04"), tx(address_of("moonbirds:minter"), MOONBIRDS, calldata(SEL["mint"], 1), logs=[nft_transfer(MOONBIRDS, ZERO_ADDRESS, seller, token_id)])])
    buy, offer, fee = eth(44), eth(225), eth(1)
    logs, calls = trace(
        call(bot, exchange, buy),
        call(exchange, seller, buy, depth=2),
        nft_transfer(MOONBIRDS, seller, bot, token_id),
        nft_transfer(MOONBIRDS, bot, offer_maker, token_id),
        erc20_transfer(WETH, offer_maker, bot, offer),
        erc20_transfer(WETH, bot, fee_recipient, fee),
    )
    gas_price, gas_used = 100 * GWEI, 300_000
    block = cb.add_block([tx(trader, bot, b"\xa1\xb2\xc3\xd4", gas_price=gas_price, gas_used=gas_used, logs=logs, calls=calls)])
    return Scenario(
        "moonbirds",
        {"txn": block.txns[0].hash, "net": offer - fee - buy - gas_price * gas_used, "fee_edge": fee, "kind_hint": "arbitrage"},
    )


def spaceshibas_arbitrage(cb: ChainBuilder) -> Scenario:
    """Buy an NFT, sell it to a liquidity pool, swap pool tokens for WETH."""
    trader, bot = address_of("shibas:trader"), address_of("shibas:bot")
    seller, market = address_of("shibas:seller"), address_of("opensea:exchange")
    nft, pool, pair = address_of("spaceshibas:nft"), address_of("nft20:shibaspace"), address_of("uniswap:shibaspace-weth")
    token_id = 311
    cb.add_block([tx(address_of("shibas:minter"), nft, calldata(SEL["mint"], 1), logs=[nft_transfer(nft, ZERO_ADDRESS, seller, token_id)])])
    pool_tokens = 97 * 10**18
    logs, calls = trace(
        call(bot, market, eth("0.015")),
        call(market, seller, eth("0.015"), depth=2),
        nft_transfer(nft, seller, bot, token_id),
        nft_transfer(nft, bot, pool, token_id),
        erc20_transfer(pool, ZERO_ADDRESS, bot, pool_tokens),
        erc20_transfer(pool, bot, pair, pool_tokens),
        erc20_transfer(WETH, pair, bot, eth("0.033")),
    )
    # 65 gwei x 200,000 gas = 0.013 ETH
    block = cb.add_block([tx(trader, bot, b"\x0b\x0c\x0d\x0e", gas_price=65 * GWEI, gas_used=200_000, logs=logs, calls=calls)])
    return Scenario("spaceshibas", {"txn": block.txns[0].hash, "net": eth("0.005"), "kind_hint": "arbitrage"})


def mayc_reward(cb: ChainBuilder) -> Scenario:
    """Flash-loan purchase that collects a reward NFT and sells the original."""
    trader, bot = address_of("mayc:trader"), address_of("mayc:bot")
    seller, market, offer_maker = address_of("mayc:seller"), address_of("opensea:exchange"), address_of("mayc:offer-maker")
    aave, land = address_of("aave:pool"), address_of("mayc:land")
    token_id, land_id = 1010, 55
    cb.add_block([tx(address_of("mayc:minter"), MAYC, calldata(SEL["mint"], 1), logs=[nft_transfer(MAYC, ZERO_ADDRESS, seller, token_id)])])
    loan = eth(28)
    logs, calls = trace(
        erc20_transfer(WETH, aave, bot, loan),
        erc20_transfer(WETH, bot, market, loan),
        erc20_transfer(WETH, market, seller, loan),
        nft_transfer(MAYC, seller, bot, token_id),
        nft_transfer(land, ZERO_ADDRESS, bot, land_id),
        nft_transfer(MAYC, bot, offer_maker, token_id),
        erc20_transfer(WETH, offer_maker, bot, eth("26.4")),
        erc20_transfer(WETH, bot, aave, loan),
    )
    gas_price, gas_used = 80 * GWEI, 500_000
    block = cb.add_block([tx(trader, bot, b"\x11\x22\x33\x44", gas_price=gas_price, gas_used=gas_used, logs=logs, calls=calls)])
    return Scenario(
        "mayc",
        {
            "txn": block.txns[0].hash,
            "net": eth("26.4") - loan - gas_price * gas_used,
            "kind_hint": "reward_collection",
            "lender": aave,
            "reward": f"nft:{land}:{land_id}",
        },
    )


def airdrop_confounded_sale(cb: ChainBuilder) -> Scenario:
    """A sale in which the seller also receives an unrelated payment."""
    seller, buyer = address_of("airdrop:seller"), address_of("airdrop:buyer")
    nft, market, dropper = address_of("airdrop:nft"), address_of("airdrop:market"), address_of("airdrop:distributor")
    token_id = 9
    cb.add_block([tx(address_of("airdrop:minter"), nft, calldata(SEL["mint"], 1), logs=[nft_transfer(nft, ZERO_ADDRESS, seller, token_id)])])
    logs, calls = trace(
        call(market, seller, eth(10)),
        call(seller, market, eth(1)),
        nft_transfer(nft, seller, buyer, token_id),
        call(market, dropper, 0),
        call(dropper, seller, eth(5), depth=2),
    )
    block = cb.add_block([tx(buyer, market, b"\x99\x88\x77\x66", value=eth(10), logs=logs, calls=calls)])
    return Scenario(
        "airdrop",
        {"txn": block.txns[0].hash, "seller": seller, "buyer": buyer, "nft": nft, "token_id": token_id,
         "pay_in": eth(10), "pay_out": eth(1), "airdrop": eth(5)},
    )


def punks_lossmin(cb: ChainBuilder) -> Scenario:
    """Listing withdrawn in front of a pending buy, later relisted higher."""
    owner, buyer, later_buyer = address_of("punks:owner"), address_of("punks:buyer"), address_of("punks:later-buyer")
    punk = 5217
    cb.add_block([market_tx("punks", "listing", owner, PUNKS, punk, eth(57), gas_price=40 * GWEI)])
    cancel = market_tx("punks", "cancel_listing", owner, PUNKS, punk, 0, gas_price=120 * GWEI)
    pending = market_tx("punks", "buy", buyer, PUNKS, punk, eth(57), gas_price=60 * GWEI, status=REVERTED)
    block = cb.add_block([cancel, pending])
    two_weeks = (14 * 24 * 3600) // cb.block_time
    cb.skip(two_weeks)
    relist = cb.add_block([market_tx("punks", "listing", owner, PUNKS, punk, eth("69.42"), gas_price=40 * GWEI)])
    cb.skip(300)
    cb.add_block([market_tx("punks", "buy", later_buyer, PUNKS, punk, eth("69.42"), gas_price=40 * GWEI, seller=owner)])
    return Scenario(
        "punks_lossmin",
        {"cancel": block.txns[0].hash, "buy": block.txns[1].hash, "relist_price": eth("69.42"), "relist_txn": relist.txns[0].hash},
    )


def punks_bid_and_backrun(cb: ChainBuilder) -> Scenario:
    """A place-bid frontrun of a bid-agnostic accept, and a listing backrun."""
    seller, victim, attacker = address_of("punkbid:seller"), address_of("punkbid:victim"), address_of("punkbid:attacker")
    punk = 3100
    cb.add_block([market_tx("punks", "place_bid", victim, PUNKS, punk, eth(20), gas_price=30 * GWEI)])
    bid = market_tx("punks", "place_bid", attacker, PUNKS, punk, eth("20.5"), gas_price=90 * GWEI)
    accept = market_tx("punks", "accept_bid", seller, PUNKS, punk, eth(20), gas_price=50 * GWEI)
    b1 = cb.add_block([bid, accept])
    lister, backrunner = address_of("backrun:lister"), address_of("backrun:buyer")
    punk2 = 8080
    listing = market_tx("punks", "listing", lister, PUNKS, punk2, eth(60), gas_price=12 * GWEI)
    noise = tx(address_of("backrun:noise"), address_of("backrun:noise2"), value=1, gas_price=13 * GWEI)
    buy = market_tx("punks", "buy", backrunner, PUNKS, punk2, eth(60), gas_price=11 * GWEI, seller=lister)
    b2 = cb.add_block([noise, listing, buy])
    return Scenario(
        "punks_bid_backrun",
        {"placebid": (b1.txns[0].hash, b1.txns[1].hash), "backrun": (b2.txns[2].hash, b2.txns[1].hash)},
    )


def private_mining_frontrun(cb: ChainBuilder) -> Scenario:
    """A buy--buy frontrun that tips the block miner directly."""
    miner = address_of("pm:miner")
    nft = address_of("pm:collection")
    attacker, victim, seller = address_of("pm:attacker"), address_of("pm:victim"), address_of("pm:seller")
    tip = eth("0.1")
    t1 = market_tx("synth", "buy", attacker, nft, 1, eth(2), gas_price=70 * GWEI, seller=seller)
    t1 = replace(t1, internal_calls=t1.internal_calls + (call(SYNTH_MARKET, miner, tip, logs_before=len(t1.logs)),))
    t2 = market_tx("synth", "buy", victim, nft, 1, eth(2), gas_price=60 * GWEI, status=REVERTED)
    block = cb.add_block([t1, t2], miner=miner)
    return Scenario("private_mining", {"attacker": block.txns[0].hash, "victim": block.txns[1].hash, "tip": tip})


def bulk_mint_evasion(cb: ChainBuilder, cap: int = 2, fanout: int = 100) -> Scenario:
    """Public mint capped per call, bypassed by a contract calling it repeatedly."""
    token = address_of("mhc:token")
    owner = address_of("mhc:owner")
    price = eth("0.01")
    next_id = iter(range(1, 10**6))
    owner_sel = "4e71d92d"

    def mint_logs(to: str, n: int):
        return [nft_transfer(token, ZERO_ADDRESS, to, next(next_id)) for _ in range(n)]

    cb.add_block([tx(owner, token, calldata(owner_sel, 5), logs=mint_logs(owner, 5))])
    minter = address_of("mhc:minter")
    sample = cb.add_block([tx(minter, token, calldata(SEL["mint"], cap), value=cap * price, logs=mint_logs(minter, cap))])
    attacker, via = address_of("mhc:attacker"), address_of("mhc:bulk-contract")
    steps = []
    for _ in range(fanout):
        steps.append(call(via, token, cap * price, calldata(SEL["mint"], cap)))
        steps.extend(mint_logs(via, cap))
    logs, calls = trace(*steps)
    attack = cb.add_block([tx(attacker, via, b"\xde\xad\xbe\xef", value=fanout * cap * price, gas_used=5_000_000, logs=logs, calls=calls)])
    honest = cb.add_block([tx(address_of("mhc:honest"), token, calldata(SEL["mint"], cap), value=cap * price, logs=mint_logs(address_of("mhc:honest"), cap))])
    return Scenario(
        "mint_evasion",
        {
            "token": token,
            "cap": cap,
            "price": price,
            "owner": owner,
            "owner_selector": owner_sel,
            "sample_txn": sample.txns[0].hash,
            "attack_txn": attack.txns[0].hash,
            "honest_txn": honest.txns[0].hash,
            "minted": cap * fanout,
            "oracle": [
                {"contract": token, "selector": "0x" + SEL["mint"], "count_word": 0, "cap": cap, "price": str(price)},
                {"contract": token, "selector": "0x" + owner_sel, "count_word": 0, "owners": [owner]},
            ],
        },
    )


def random_collection(cb: ChainBuilder, label: str, supply: int, transfers: int, seed: int, whales: int = 2) -> Scenario:
    """A collection minted and traded at random, with a few accumulating wallets."""
    rng = random.Random(seed)
    token = address_of(f"coll:{label}")
    holders = [address_of(f"coll:{label}:holder:{i}") for i in range(max(3, supply // 4))]
    whale_addrs = holders[:whales]
    owner_of: dict[int, str] = {}
    next_id = 0
    events = []
    for _ in range(transfers):
        if next_id < supply and (not owner_of or rng.random() < 0.5):
            to = rng.choice(whale_addrs) if rng.random() < 0.3 else rng.choice(holders)
            events.append((ZERO_ADDRESS, to, next_id))
            owner_of[next_id] = to
            next_id += 1
        else:
            tid = rng.choice(sorted(owner_of))
            frm = owner_of[tid]
            if rng.random() < 0.03:
                to = ZERO_ADDRESS
                del owner_of[tid]
            else:
                to = rng.choice(whale_addrs) if rng.random() < 0.4 else rng.choice(holders)
                owner_of[tid] = to
            events.append((frm, to, tid))
    i = 0
    while i < len(events):
        chunk = events[i : i + rng.randrange(1, 12)]
        txns = []
        j = 0
        while j < len(chunk):
            part = chunk[j : j + rng.randrange(1, 4)]
            txns.append(tx(address_of(f"coll:{label}:op"), token, calldata(SEL["mint"], len(part)), logs=[nft_transfer(token, f, t, k) for f, t, k in part]))
            j += len(part)
        cb.add_block(txns)
        i += len(chunk)
    return Scenario(f"collection:{label}", {"token": token, "events": events})


DEMO_TH_F = Fraction(1, 10)


def demo_chain(frontrun_blocks: int = 40) -> tuple[list[Block], dict]:
    """The bundled demo: every case scenario plus a small frontrun rulebook."""
    cb = ChainBuilder(label="demo")
    scenarios = {}
    manifest = frontrun_dataset(cb, n_blocks=frontrun_blocks, n_pairs=8, n_decoys=8, seed=3)
    for build in (
        azuki_gas_war, moonbirds_arbitrage, spaceshibas_arbitrage, mayc_reward, airdrop_confounded_sale,
        punks_lossmin, punks_bid_and_backrun, private_mining_frontrun, bulk_mint_evasion,
    ):
        sc = build(cb)
        scenarios[sc.name] = sc
    coll = random_collection(cb, "demo", supply=120, transfers=300, seed=5)
    scenarios[coll.name] = coll
    return cb.blocks, {"frontrun": manifest, "scenarios": scenarios}
