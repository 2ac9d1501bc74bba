"""Per-transaction payment graphs, sale earnings and instant-profit detection."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .chain import ZERO_ADDRESS, Block, ChainIndex, Txn, txn_fee, word_to_address
from .decoder import TRANSFER_TOPIC, NftRef, TokenContractSet

WETH = "0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2"
# fungible tokens counted 1:1 with the native coin when netting profits
NATIVE_EQUIVALENTS = frozenset({WETH})

DEFAULT_TH_E = 200


@dataclass(frozen=True, order=True)
class Asset:
    kind: str  # native | erc20 | nft
    contract: str = ""
    token_id: int = -1

    def __str__(self) -> str:
        if self.kind == "native":
            return "native"
        if self.kind == "erc20":
            return f"erc20:{self.contract}"
        return f"nft:{self.contract}:{self.token_id}"

    @classmethod
    def parse(cls, s: str) -> "Asset":
        parts = s.split(":")
        if parts[0] == "native":
            return NATIVE
        if parts[0] == "erc20":
            return cls("erc20", parts[1])
        return cls("nft", parts[1], int(parts[2]))

    @property
    def is_money(self) -> bool:
        return self.kind != "nft"


NATIVE = Asset("native")


@dataclass(frozen=True)
class PaymentEdge:
    payer: str
    payee: str
    amount: int
    asset: Asset = NATIVE

    def to_json(self) -> dict:
        return {"payer": self.payer, "payee": self.payee, "amount": str(self.amount), "asset": str(self.asset)}


@dataclass(frozen=True)
class PaymentGraph:
    txn_hash: str
    edges: tuple[PaymentEdge, ...] = ()

    def nodes(self) -> set[str]:
        return {a for e in self.edges for a in (e.payer, e.payee)}


def _transfer_edge(lg, token_set: TokenContractSet) -> PaymentEdge | None:
    if lg.signature != TRANSFER_TOPIC or len(lg.topics) < 3:
        return None
    src = word_to_address(lg.topic_int(1))
    dst = word_to_address(lg.topic_int(2))
    if len(lg.topics) == 4:
        if lg.emitter not in token_set.erc721:
            return None
        return PaymentEdge(src, dst, 1, Asset("nft", lg.emitter, lg.topic_int(3)))
    if token_set.is_nft(lg.emitter) or len(lg.data) < 32:
        return None
    amount = lg.data_word(0)
    if amount == 0:
        return None
    return PaymentEdge(src, dst, amount, Asset("erc20", lg.emitter))


def build_payment_graph(t: Txn, token_set: TokenContractSet) -> PaymentGraph:
    """Value transfers of ``t`` as directed edges in occurrence order.

    The external call's value comes first, then value-carrying internal calls
    and Transfer logs interleaved as they occurred.  A reverted txn moved no
    value and yields an empty graph.
    """
    if not t.succeeded:
        return PaymentGraph(t.hash)
    edges: list[PaymentEdge] = []
    if t.value > 0 and t.receiver is not None:
        edges.append(PaymentEdge(t.sender, t.receiver, t.value))
    calls = [c for c in t.internal_calls if c.call_kind == "call" and c.value > 0]
    ci = 0
    for i, lg in enumerate(t.logs):
        while ci < len(calls) and calls[ci].logs_before <= i:
            edges.append(PaymentEdge(calls[ci].caller, calls[ci].callee, calls[ci].value))
            ci += 1
        e = _transfer_edge(lg, token_set)
        if e is not None:
            edges.append(e)
    for c in calls[ci:]:
        edges.append(PaymentEdge(c.caller, c.callee, c.value))
    return PaymentGraph(t.hash, tuple(edges))


def touched_addresses(t: Txn, graph: PaymentGraph | None = None) -> set[str]:
    touched = {t.sender}
    if t.receiver:
        touched.add(t.receiver)
    for c in t.internal_calls:
        touched.update((c.caller, c.callee))
    for lg in t.logs:
        touched.add(lg.emitter)
    if graph is not None:
        touched |= graph.nodes()
    return touched


# --- taint tracking ----------------------------------------------------------


def tainted_edges(graph: PaymentGraph, source: str) -> set[int]:
    """Indices of money edges reachable from ``source`` in occurrence order.

    Depth-first from the source; an edge can carry the source's money only if
    it occurs after its payer was reached.  A node is re-expanded only when
    reached at an earlier position, so cycles terminate.
    """
    outgoing: dict[str, list[int]] = defaultdict(list)
    for i, e in enumerate(graph.edges):
        if e.asset.is_money:
            outgoing[e.payer].append(i)
    reached = {source: -1}
    stack = [source]
    tainted: set[int] = set()
    while stack:
        node = stack.pop()
        since = reached[node]
        for i in outgoing[node]:
            if i <= since:
                continue
            tainted.add(i)
            payee = graph.edges[i].payee
            if payee not in reached or reached[payee] > i:
                reached[payee] = i
                stack.append(payee)
    return tainted


@dataclass(frozen=True)
class SaleRecord:
    nft: NftRef
    seller: str
    buyer: str
    sale_txn: str
    pay_in: int
    pay_out: int
    pay_in_by_asset: dict = field(default_factory=dict, compare=False)
    pay_out_by_asset: dict = field(default_factory=dict, compare=False)
    # no buyer money reached the seller; seller and buyer treated as one entity
    unconditional: bool = False

    @property
    def net_earning(self) -> int:
        return self.pay_in - self.pay_out


def _nft_transfer(t: Txn, nft: NftRef, seller: str | None = None) -> str | None:
    """Recipient of ``nft`` moved out of ``seller`` by ``t``, if any."""
    for lg in t.logs:
        if (
            lg.emitter == nft.contract
            and lg.signature == TRANSFER_TOPIC
            and len(lg.topics) == 4
            and lg.topic_int(3) == nft.token_id
            and (seller is None or word_to_address(lg.topic_int(1)) == seller)
        ):
            return word_to_address(lg.topic_int(2))
    return None


def compute_sale_earnings(
    sale_txn: Txn,
    seller: str,
    buyer: str,
    token_set: TokenContractSet,
    nft: NftRef | None = None,
    native_tokens: frozenset[str] = NATIVE_EQUIVALENTS,
) -> SaleRecord:
    """Seller's earnings from the buyer's money inside ``sale_txn``.

    Only edges carrying the buyer's money count: payments the seller receives
    from unrelated parties in the same txn are ignored.
    """
    graph = build_payment_graph(sale_txn, token_set)
    pay_in: dict[Asset, int] = defaultdict(int)
    pay_out: dict[Asset, int] = defaultdict(int)
    for i in sorted(tainted_edges(graph, buyer)):
        e = graph.edges[i]
        if e.payee == seller:
            pay_in[e.asset] += e.amount
        if e.payer == seller:
            pay_out[e.asset] += e.amount

    def native_sum(d):
        return sum(v for a, v in d.items() if a.kind == "native" or a.contract in native_tokens)

    if nft is None:
        nft = NftRef(ZERO_ADDRESS, -1)
    pin = native_sum(pay_in)
    if pin == 0:
        return SaleRecord(nft, seller, buyer, sale_txn.hash, 0, 0, {}, {}, unconditional=True)
    return SaleRecord(
        nft, seller, buyer, sale_txn.hash, pin, native_sum(pay_out),
        {str(a): v for a, v in sorted(pay_in.items())},
        {str(a): v for a, v in sorted(pay_out.items())},
    )


def naive_incoming(sale_txn: Txn, seller: str, token_set: TokenContractSet, native_tokens=NATIVE_EQUIVALENTS) -> int:
    """Everything of native value the seller received in the txn."""
    graph = build_payment_graph(sale_txn, token_set)
    return sum(
        e.amount
        for e in graph.edges
        if e.payee == seller and (e.asset.kind == "native" or e.asset.contract in native_tokens)
    )


def detect_sale(nft: NftRef, seller: str, after: Txn, blocks: Iterable[Block] | ChainIndex) -> Txn | None:
    """First successful txn after ``after`` that transfers ``nft`` out of ``seller``."""
    if isinstance(blocks, ChainIndex):
        txns: Iterable[Txn] = blocks.txns_after(after)
    else:
        pos = (after.block_number, after.index)
        txns = (t for b in blocks for t in b.txns if (t.block_number, t.index) > pos)
    for t in txns:
        if t.succeeded and _nft_transfer(t, nft, seller) is not None:
            return t
    return None


def trace_sale(
    nft: NftRef,
    owner: str,
    after: Txn,
    chain: ChainIndex,
    token_set: TokenContractSet,
    max_hops: int = 16,
) -> tuple[SaleRecord | None, list[str]]:
    """Follow ``nft`` from ``owner`` to its first paid sale.

    Unconditional transfers merge the recipient into the owner's identity and
    the search continues from the recipient.  Returns the sale (or None) and
    the merged identities.
    """
    merged = [owner]
    for _ in range(max_hops):
        ts = detect_sale(nft, owner, after, chain)
        if ts is None:
            return None, merged
        buyer = _nft_transfer(ts, nft, owner)
        rec = compute_sale_earnings(ts, owner, buyer, token_set, nft)
        if not rec.unconditional:
            return rec, merged
        owner, after = buyer, ts
        merged.append(buyer)
    return None, merged


def speculative_profit(buy_price: int, current_price: int) -> int:
    return current_price - buy_price


# --- instant profit ----------------------------------------------------------


class AddressHistory:
    """Who interacted with whom, and when first, over a dataset.

    Positions are (block_number, txn_index); queries only see interactions
    strictly before the given position.
    """

    def __init__(self):
        self._peers: dict[str, dict[str, tuple[int, int]]] = defaultdict(dict)
        self._senders: dict[str, dict[str, tuple[int, int]]] = defaultdict(dict)

    def _link(self, a: str, b: str, pos: tuple[int, int]) -> None:
        if a == b:
            return
        self._peers[a].setdefault(b, pos)
        self._peers[b].setdefault(a, pos)
        self._senders[b].setdefault(a, pos)

    def add_txn(self, t: Txn, token_set: TokenContractSet) -> None:
        pos = (t.block_number, t.index)
        if t.receiver:
            self._link(t.sender, t.receiver, pos)
        for c in t.internal_calls:
            self._link(c.caller, c.callee, pos)
        for e in build_payment_graph(t, token_set).edges:
            self._link(e.payer, e.payee, pos)

    @classmethod
    def build(cls, blocks: Iterable[Block], token_set: TokenContractSet) -> "AddressHistory":
        h = cls()
        for b in blocks:
            for t in b.txns:
                h.add_txn(t, token_set)
        return h

    def counterparties(self, addr: str, before: tuple[int, int]) -> set[str]:
        return {a for a, pos in self._peers.get(addr, {}).items() if pos < before}

    def unique_senders(self, addr: str, before: tuple[int, int]) -> int:
        return sum(1 for pos in self._senders.get(addr, {}).values() if pos < before)


@dataclass(frozen=True)
class ProfitFinding:
    txn_hash: str
    block_number: int
    clique: frozenset[str]
    pay_in: dict
    pay_out: dict
    net_native_profit: int
    kind_hint: str  # arbitrage | reward_collection
    edges: tuple[PaymentEdge, ...] = ()

    def to_json(self) -> dict:
        return {
            "kind": "instant_profit",
            "txn": self.txn_hash,
            "block_number": self.block_number,
            "clique": sorted(self.clique),
            "net_profit_wei": str(self.net_native_profit),
            "kind_hint": self.kind_hint,
            "pay_in": {k: str(v) for k, v in self.pay_in.items()},
            "pay_out": {k: str(v) for k, v in self.pay_out.items()},
            "evidence": {"edges": [e.to_json() for e in self.edges]},
        }


def resold_buyers(graph: PaymentGraph) -> set[str]:
    """Accounts that receive an NFT and pass it on within the same txn."""
    holders: dict[Asset, set[str]] = defaultdict(set)
    buyers = set()
    for e in graph.edges:
        if e.asset.kind != "nft":
            continue
        if e.payer in holders[e.asset] and e.payee != e.payer:
            buyers.add(e.payer)
        holders[e.asset].add(e.payee)
    return buyers


def profit_clique(
    t: Txn,
    graph: PaymentGraph,
    buyers: set[str],
    history: AddressHistory | None,
    th_e: int = DEFAULT_TH_E,
    allowlist: frozenset[str] = frozenset(),
) -> frozenset[str]:
    """Addresses presumed to be controlled by the trader of ``t``."""
    clique = {t.sender, *buyers}
    if t.receiver:
        clique.add(t.receiver)
    if history is not None and th_e > 0:
        pos = (t.block_number, t.index)
        for member in list(clique):
            for peer in history.counterparties(member, pos):
                if peer in allowlist or history.unique_senders(peer, pos) <= th_e:
                    clique.add(peer)
    clique.discard(ZERO_ADDRESS)
    return frozenset(clique & touched_addresses(t, graph))


def net_flows(graph: PaymentGraph, clique: frozenset[str]) -> tuple[dict[Asset, int], dict[Asset, int]]:
    pay_in: dict[Asset, int] = defaultdict(int)
    pay_out: dict[Asset, int] = defaultdict(int)
    for e in graph.edges:
        inside_payer, inside_payee = e.payer in clique, e.payee in clique
        if inside_payee and not inside_payer:
            pay_in[e.asset] += e.amount
        elif inside_payer and not inside_payee:
            pay_out[e.asset] += e.amount
    return pay_in, pay_out


def detect_instant_profit(
    t: Txn,
    token_set: TokenContractSet,
    history: AddressHistory | None,
    th_e: int = DEFAULT_TH_E,
    allowlist: frozenset[str] = frozenset(),
    native_tokens: frozenset[str] = NATIVE_EQUIVALENTS,
) -> ProfitFinding | None:
    """Flag ``t`` if an NFT is bought and resold inside it at a gain.

    The trader clique is seeded with sender, receiver and reselling buyers,
    widened by their past counterparties (skipping exchange-like addresses
    with more than ``th_e`` unique senders) and cut down to addresses the txn
    touches.  Flows between clique members are ignored.  The gas fee counts as
    a native outflow.  A positive native net is an arbitrage; an NFT kept by
    the clique marks reward collection.
    """
    if not t.succeeded:
        return None
    graph = build_payment_graph(t, token_set)
    buyers = resold_buyers(graph)
    if not buyers:
        return None
    clique = profit_clique(t, graph, buyers, history, th_e, allowlist)
    pay_in, pay_out = net_flows(graph, clique)
    fee = txn_fee(t) if t.sender in clique else 0
    native = lambda a: a.kind == "native" or a.contract in native_tokens  # noqa: E731
    net = sum(v for a, v in pay_in.items() if native(a)) - sum(v for a, v in pay_out.items() if native(a)) - fee
    retained = any(a.kind == "nft" and pay_in.get(a, 0) > pay_out.get(a, 0) for a in pay_in)
    if retained:
        hint = "reward_collection"
    elif net > 0:
        hint = "arbitrage"
    else:
        return None
    return ProfitFinding(
        txn_hash=t.hash,
        block_number=t.block_number,
        clique=clique,
        pay_in={str(a): v for a, v in sorted(pay_in.items())},
        pay_out={str(a): v for a, v in sorted(pay_out.items())},
        net_native_profit=net,
        kind_hint=hint,
        edges=graph.edges,
    )


def scan_instant_profits(
    blocks: Iterable[Block],
    token_set: TokenContractSet,
    history: AddressHistory | None,
    th_e: int = DEFAULT_TH_E,
    allowlist: frozenset[str] = frozenset(),
) -> Iterator[ProfitFinding]:
    for b in blocks:
        for t in b.txns:
            f = detect_instant_profit(t, token_set, history, th_e, allowlist)
            if f is not None:
                yield f
