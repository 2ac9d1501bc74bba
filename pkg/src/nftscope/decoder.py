"""Marketplace trade-action recovery and NFT token-contract identification."""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Mapping

from .chain import Block, Txn, word_to_address

log = logging.getLogger(__name__)

TRANSFER_TOPIC = "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef"
TRANSFER_SINGLE_TOPIC = "0xc3d58168c5ae7397731d063d5bbf3d657854427343f4c083240f7aacaa2d0f62"
TRANSFER_BATCH_TOPIC = "0x4a39dc06d4c0dbc64b70af90fd698a233a518aa5d07e595d983b8c0526c8f7fb"

ACTION_KINDS = ("listing", "cancel_listing", "buy", "place_bid", "accept_bid", "cancel_bid")
RECIPE_FIELDS = ("nft_contract", "token_id", "price", "user")


class RegistryError(ValueError):
    pass


class RecipeFailure(Exception):
    """The calldata or logs of a marketplace txn do not fit its recipe."""

    def __init__(self, tx_hash: str, message: str):
        self.tx_hash = tx_hash
        super().__init__(f"{tx_hash}: {message}")


@dataclass(frozen=True)
class NftRef:
    contract: str
    token_id: int


@dataclass(frozen=True)
class ActionRecipe:
    kind: str
    nft_contract: str
    token_id: str
    price: str = "value"
    user: str = "sender"


@dataclass(frozen=True)
class MarketplaceDescriptor:
    name: str
    contract_addresses: frozenset[str]
    action_selectors: Mapping[bytes, ActionRecipe]
    listing_on_chain: bool = False
    # accept-bid carries no identifier of the bid it accepts
    bid_agnostic_accept: bool = False


@dataclass(frozen=True)
class TradeAction:
    kind: str
    user: str
    marketplace: str
    nft: NftRef
    price: int
    txn_hash: str
    block_number: int
    txn_index: int
    status: str
    gas_price: int
    gas_used: int
    timestamp: int
    sender: str

    @property
    def succeeded(self) -> bool:
        return self.status == "success"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "user": self.user,
            "sender": self.sender,
            "marketplace": self.marketplace,
            "nft": {"contract": self.nft.contract, "token_id": str(self.nft.token_id)},
            "price": str(self.price),
            "txn_hash": self.txn_hash,
            "block_number": self.block_number,
            "txn_index": self.txn_index,
            "status": self.status,
            "gas_price": str(self.gas_price),
            "gas_used": str(self.gas_used),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, d: dict) -> "TradeAction":
        return cls(
            kind=d["kind"],
            user=d["user"],
            sender=d["sender"],
            marketplace=d["marketplace"],
            nft=NftRef(d["nft"]["contract"], int(d["nft"]["token_id"])),
            price=int(d["price"]),
            txn_hash=d["txn_hash"],
            block_number=int(d["block_number"]),
            txn_index=int(d["txn_index"]),
            status=d["status"],
            gas_price=int(d["gas_price"]),
            gas_used=int(d["gas_used"]),
            timestamp=int(d["timestamp"]),
        )


# --- registry ----------------------------------------------------------------


def _check_source(src: str, where: str) -> None:
    parts = src.split(":")
    ok = (
        src in ("value", "sender", "receiver")
        or (parts[0] == "const" and len(parts) == 2)
        or (parts[0] == "calldata" and len(parts) == 2 and parts[1].isdigit())
        or (parts[0] == "log" and len(parts) == 3 and parts[2] == "address")
        or (parts[0] == "log" and len(parts) == 4 and parts[2] in ("topic", "data") and parts[3].isdigit())
    )
    if parts[0] == "log" and ok:
        try:
            int(parts[1])
        except ValueError:
            ok = False
    if not ok:
        raise RegistryError(f"{where}: unknown field source {src!r}")


def parse_registry(entries: list[dict]) -> list[MarketplaceDescriptor]:
    if not isinstance(entries, list):
        raise RegistryError("registry must be a JSON array of descriptors")
    out = []
    names = set()
    for entry in entries:
        try:
            name = entry["name"]
            contracts = frozenset(a.lower() for a in entry["contracts"])
            actions = entry["actions"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise RegistryError(f"descriptor missing {exc}") from None
        if name in names:
            raise RegistryError(f"duplicate marketplace {name!r}")
        names.add(name)
        selectors: dict[bytes, ActionRecipe] = {}
        for sel_hex, raw in actions.items():
            sel = bytes.fromhex(sel_hex.removeprefix("0x"))
            if len(sel) != 4:
                raise RegistryError(f"{name}: selector {sel_hex} is not 4 bytes")
            if sel in selectors:
                raise RegistryError(f"{name}: duplicate selector {sel_hex}")
            if raw.get("kind") not in ACTION_KINDS:
                raise RegistryError(f"{name}/{sel_hex}: unknown action kind {raw.get('kind')!r}")
            for fld in ("nft_contract", "token_id"):
                if fld not in raw:
                    raise RegistryError(f"{name}/{sel_hex}: recipe lacks {fld}")
            recipe = ActionRecipe(
                kind=raw["kind"],
                nft_contract=raw["nft_contract"],
                token_id=raw["token_id"],
                price=raw.get("price", "value"),
                user=raw.get("user", "sender"),
            )
            for fld in RECIPE_FIELDS:
                _check_source(getattr(recipe, fld), f"{name}/{sel_hex}/{fld}")
            selectors[sel] = recipe
        out.append(
            MarketplaceDescriptor(
                name=name,
                contract_addresses=contracts,
                action_selectors=selectors,
                listing_on_chain=bool(entry.get("listing_on_chain", False)),
                bid_agnostic_accept=bool(entry.get("bid_agnostic_accept", False)),
            )
        )
    return out


def load_registry(path=None) -> list[MarketplaceDescriptor]:
    """Load a registry file; without a path, the bundled default registry."""
    if path is None:
        text = resources.files("nftscope").joinpath("data/registry.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        entries = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegistryError(f"registry is not valid JSON: {exc}") from None
    return parse_registry(entries)


class Registry:
    """Address-indexed view over a set of descriptors."""

    def __init__(self, descriptors: Iterable[MarketplaceDescriptor]):
        self.descriptors = list(descriptors)
        self.by_address: dict[str, MarketplaceDescriptor] = {}
        for d in self.descriptors:
            for a in d.contract_addresses:
                if a in self.by_address:
                    raise RegistryError(f"address {a} claimed by two marketplaces")
                self.by_address[a] = d

    @property
    def on_chain_listing_markets(self) -> frozenset[str]:
        return frozenset(d.name for d in self.descriptors if d.listing_on_chain)

    @property
    def bid_agnostic_markets(self) -> frozenset[str]:
        return frozenset(d.name for d in self.descriptors if d.bid_agnostic_accept)


def _as_registry(registry) -> Registry:
    return registry if isinstance(registry, Registry) else Registry(registry)


# --- decoding ----------------------------------------------------------------


def _resolve(src: str, t: Txn, calldata: bytes, value: int, receiver: str | None) -> int | str:
    if src == "value":
        return value
    if src == "sender":
        return t.sender
    if src == "receiver":
        if receiver is None:
            raise RecipeFailure(t.hash, "recipe reads receiver of a contract creation")
        return receiver
    kind, _, rest = src.partition(":")
    if kind == "const":
        return rest.lower() if rest.startswith("0x") and len(rest) == 42 else int(rest, 0)
    if kind == "calldata":
        k = int(rest)
        chunk = calldata[4 + 32 * k : 4 + 32 * k + 32]
        if len(chunk) != 32:
            raise RecipeFailure(t.hash, f"calldata has {len(calldata)} bytes, recipe reads word {k}")
        return int.from_bytes(chunk, "big")
    parts = rest.split(":")
    k = int(parts[0])
    try:
        lg = t.logs[k]
    except IndexError:
        raise RecipeFailure(t.hash, f"txn has {len(t.logs)} logs, recipe reads log {k}") from None
    if parts[1] == "address":
        return lg.emitter
    j = int(parts[2])
    if parts[1] == "topic":
        if j >= len(lg.topics):
            raise RecipeFailure(t.hash, f"log {k} has {len(lg.topics)} topics, recipe reads topic {j}")
        return lg.topic_int(j)
    try:
        return lg.data_word(j)
    except IndexError:
        raise RecipeFailure(t.hash, f"log {k} has no data word {j}") from None


def _as_addr(v: int | str) -> str:
    return v if isinstance(v, str) else word_to_address(v)


def _as_int(v: int | str) -> int:
    return v if isinstance(v, int) else int(v, 16)


def _build(t: Txn, d: MarketplaceDescriptor, recipe: ActionRecipe, calldata: bytes, value: int, receiver) -> TradeAction:
    r = lambda src: _resolve(src, t, calldata, value, receiver)  # noqa: E731
    price = _as_int(r(recipe.price))
    return TradeAction(
        kind=recipe.kind,
        user=_as_addr(r(recipe.user)),
        sender=t.sender,
        marketplace=d.name,
        nft=NftRef(_as_addr(r(recipe.nft_contract)), _as_int(r(recipe.token_id))),
        price=price,
        txn_hash=t.hash,
        block_number=t.block_number,
        txn_index=t.index,
        status=t.status,
        gas_price=t.gas_price,
        gas_used=t.gas_used,
        timestamp=t.timestamp,
    )


def decode_trade_action(t: Txn, registry) -> TradeAction | None:
    """The marketplace action performed by ``t``, if any.

    The external call is tried first; otherwise the first internal call into a
    registered marketplace (trades routed through bot contracts).
    """
    reg = _as_registry(registry)
    candidates = [(t.receiver, t.input_data, t.value)]
    candidates += [(c.callee, c.input_data, c.value) for c in t.internal_calls if c.call_kind == "call"]
    for target, calldata, value in candidates:
        d = reg.by_address.get(target) if target else None
        if d is None:
            continue
        if len(calldata) < 4:
            raise RecipeFailure(t.hash, f"calldata of {len(calldata)} bytes has no selector")
        recipe = d.action_selectors.get(calldata[:4])
        if recipe is None:
            continue
        return _build(t, d, recipe, calldata, value, target)
    return None


@dataclass
class ScanReport:
    recipe_failures: list[str] = field(default_factory=list)


def scan_trade_actions(blocks: Iterable[Block], registry, report: ScanReport | None = None) -> Iterator[TradeAction]:
    """All trade actions in ``blocks`` in (block_number, txn_index) order."""
    reg = _as_registry(registry)
    for block in blocks:
        for t in block.txns:
            try:
                action = decode_trade_action(t, reg)
            except RecipeFailure as exc:
                log.warning("skipping txn: %s", exc)
                if report is not None:
                    report.recipe_failures.append(str(exc))
                continue
            if action is not None:
                yield action


# --- token contracts ---------------------------------------------------------


@dataclass(frozen=True)
class TokenContractSet:
    erc721: frozenset[str] = frozenset()
    erc1155: frozenset[str] = frozenset()
    ambiguous: frozenset[str] = frozenset()

    def is_nft(self, addr: str) -> bool:
        return addr in self.erc721 or addr in self.erc1155

    def to_json(self) -> dict:
        return {k: sorted(getattr(self, k)) for k in ("erc721", "erc1155", "ambiguous")}

    @classmethod
    def from_json(cls, d: dict) -> "TokenContractSet":
        return cls(*(frozenset(d.get(k, ())) for k in ("erc721", "erc1155", "ambiguous")))


# shape precedence on tied votes
_SHAPES = ("erc721", "erc1155", "erc20")


def identify_token_contracts(blocks: Iterable[Block]) -> TokenContractSet:
    """Classify log emitters by the shape of their transfer events.

    A Transfer with the third argument indexed (four topics) is an ERC-721
    transfer; with three topics it is ERC-20 and the emitter is excluded.
    TransferSingle/TransferBatch mark ERC-1155.  Emitters showing more than
    one shape get the majority shape and are listed as ambiguous.
    """
    votes: dict[str, Counter] = defaultdict(Counter)
    for block in blocks:
        for t in block.txns:
            for lg in t.logs:
                sig = lg.signature
                if sig == TRANSFER_TOPIC:
                    if len(lg.topics) == 4:
                        votes[lg.emitter]["erc721"] += 1
                    elif len(lg.topics) == 3:
                        votes[lg.emitter]["erc20"] += 1
                elif sig in (TRANSFER_SINGLE_TOPIC, TRANSFER_BATCH_TOPIC):
                    votes[lg.emitter]["erc1155"] += 1
    erc721, erc1155, ambiguous = set(), set(), set()
    for emitter, counter in votes.items():
        shape = max(_SHAPES, key=lambda s: (counter[s], -_SHAPES.index(s)))
        if len(+counter) > 1:
            ambiguous.add(emitter)
            log.info("ambiguous transfer emitter %s: %s -> %s", emitter, dict(counter), shape)
        if shape == "erc721":
            erc721.add(emitter)
        elif shape == "erc1155":
            erc1155.add(emitter)
    return TokenContractSet(frozenset(erc721), frozenset(erc1155), frozenset(ambiguous))
