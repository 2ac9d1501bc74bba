"""ERC-721 collection tracking, mint-limit inference and cornering detection."""

from __future__ import annotations

import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Protocol

from .chain import ZERO_ADDRESS, Block, Txn, word_to_address
from .decoder import TRANSFER_TOPIC

log = logging.getLogger(__name__)

DEAD_ADDRESS = "0x000000000000000000000000000000000000dead"
BURN_ADDRESSES = frozenset({ZERO_ADDRESS, DEAD_ADDRESS})
DEFAULT_A_MAX = 10_000
DEFAULT_TH_T = 50
DEFAULT_LIMIT = 1
# replay sender with no privileges on any contract
FOREIGN_SENDER = "0x00000000000000000000000000000000f0e1e1f0"


class NegativeBalance(Exception):
    pass


class OracleUnavailable(Exception):
    pass


@dataclass(frozen=True)
class TransferEvent:
    contract: str
    sender: str
    receiver: str
    token_id: int
    block_number: int
    txn_hash: str
    log_index: int


def transfer_events(blocks: Iterable[Block], contracts=None) -> Iterator[TransferEvent]:
    """ERC-721 Transfer events of successful txns, in chain order."""
    for b in blocks:
        for t in b.txns:
            if not t.succeeded:
                continue
            for lg in t.logs:
                if lg.signature != TRANSFER_TOPIC or len(lg.topics) != 4:
                    continue
                if contracts is not None and lg.emitter not in contracts:
                    continue
                yield TransferEvent(
                    lg.emitter,
                    word_to_address(lg.topic_int(1)),
                    word_to_address(lg.topic_int(2)),
                    lg.topic_int(3),
                    b.number,
                    t.hash,
                    lg.log_index,
                )


@dataclass
class CollectionLedger:
    contract: str
    seen_token_ids: set = field(default_factory=set)
    burned: set = field(default_factory=set)
    holder_balances: Counter = field(default_factory=Counter)
    holder_token_ids: dict = field(default_factory=lambda: defaultdict(set))
    owner: dict = field(default_factory=dict)

    @property
    def total_supply(self) -> int:
        return len(self.seen_token_ids) - len(self.burned)

    @property
    def holder_count(self) -> int:
        return len(self.holder_balances)

    def apply(self, ev: TransferEvent) -> bool:
        """Apply one transfer; returns True when it mints a new token id."""
        tid = ev.token_id
        is_mint = tid not in self.seen_token_ids
        if is_mint:
            self.seen_token_ids.add(tid)
        else:
            holder = self.owner.get(tid)
            if holder != ev.sender:
                raise NegativeBalance(
                    f"{self.contract} token {tid}: {ev.sender} transfers it but holder is {holder} (txn {ev.txn_hash})"
                )
            self.holder_balances[holder] -= 1
            if self.holder_balances[holder] == 0:
                del self.holder_balances[holder]
            self.holder_token_ids[holder].discard(tid)
            del self.owner[tid]
        if ev.receiver in BURN_ADDRESSES:
            self.burned.add(tid)
        else:
            self.burned.discard(tid)
            self.holder_balances[ev.receiver] += 1
            self.holder_token_ids[ev.receiver].add(tid)
            self.owner[tid] = ev.receiver
        return is_mint


@dataclass(frozen=True)
class LedgerUpdate:
    event: TransferEvent
    is_mint: bool
    total_supply: int
    receiver_balance: int
    holder_count: int


def track_collection(events: Iterable[TransferEvent], ledger: CollectionLedger | None = None) -> Iterator[LedgerUpdate]:
    """Fold transfer events of one contract into its ledger.

    Events must be in chain order (block, then log index).
    """
    for ev in events:
        if ledger is None:
            ledger = CollectionLedger(ev.contract)
        elif ev.contract != ledger.contract:
            raise ValueError(f"event of {ev.contract} fed to ledger of {ledger.contract}")
        is_mint = ledger.apply(ev)
        yield LedgerUpdate(ev, is_mint, ledger.total_supply, ledger.holder_balances.get(ev.receiver, 0), ledger.holder_count)


def track_collections(blocks: Iterable[Block], contracts) -> Iterator[LedgerUpdate]:
    """Interleaved updates for several collections, one ledger each."""
    ledgers: dict[str, CollectionLedger] = {}
    for ev in transfer_events(blocks, contracts):
        ledger = ledgers.setdefault(ev.contract, CollectionLedger(ev.contract))
        yield from track_collection([ev], ledger)


def mint_txn_hashes(updates: Iterable[LedgerUpdate]) -> dict[str, set[str]]:
    """contract -> hashes of txns that minted at least one token."""
    out: dict[str, set[str]] = defaultdict(set)
    for u in updates:
        if u.is_mint:
            out[u.event.contract].add(u.event.txn_hash)
    return out


# --- cornering ---------------------------------------------------------------


@dataclass(frozen=True)
class CorneringFinding:
    contract: str
    holder: str
    fraction: Fraction
    total_supply_at_alert: int
    block_number: int
    txn_hash: str

    def to_json(self) -> dict:
        return {
            "kind": "cornering",
            "contract": self.contract,
            "holder": self.holder,
            "fraction": f"{self.fraction.numerator}/{self.fraction.denominator}",
            "total_supply_at_alert": self.total_supply_at_alert,
            "block_number": self.block_number,
            "txn": self.txn_hash,
        }


def detect_cornering(
    updates: Iterable[LedgerUpdate],
    th_f: Fraction,
    th_t: int = DEFAULT_TH_T,
    exclude: frozenset[str] = frozenset(),
) -> Iterator[CorneringFinding]:
    """Holders owning more than ``th_f`` of a collection's live supply.

    Checked whenever a holder receives a token, once the supply reaches
    ``th_t`` and while more than one holder exists; reported once per
    (holder, contract) at the first crossing.
    """
    th_f = Fraction(th_f)
    seen: set[tuple[str, str]] = set()
    for u in updates:
        ev = u.event
        if ev.receiver in BURN_ADDRESSES or ev.receiver in exclude:
            continue
        if u.total_supply < th_t or u.holder_count <= 1:
            continue
        f = Fraction(u.receiver_balance, u.total_supply)
        key = (ev.contract, ev.receiver)
        if f > th_f and key not in seen:
            seen.add(key)
            yield CorneringFinding(ev.contract, ev.receiver, f, u.total_supply, ev.block_number, ev.txn_hash)


# --- replay oracle -----------------------------------------------------------


@dataclass(frozen=True)
class ReplayRequest:
    block_number: int
    sender: str
    receiver: str
    calldata: bytes
    value: int


@dataclass(frozen=True)
class ReplayOutcome:
    success: bool
    minted: int = 0


class ExecutionOracle(Protocol):
    def replay(self, request: ReplayRequest) -> ReplayOutcome: ...


@dataclass(frozen=True)
class ScriptRule:
    """Behaviour of one method on a scripted contract."""

    contract: str
    selector: bytes
    count_word: int | None = None
    cap: int | None = None
    price: int = 0
    owners: frozenset[str] = frozenset()
    min_count: int = 1


class ScriptedOracle:
    """Table-driven stand-in for a forked node.

    Each rule gates by owner, checks the count word against ``[min_count,
    cap]`` and requires ``value >= count * price``.  Unknown methods revert.
    """

    def __init__(self, rules: Iterable[ScriptRule]):
        self.rules = {(r.contract, r.selector): r for r in rules}
        self.probes = 0

    def replay(self, request: ReplayRequest) -> ReplayOutcome:
        self.probes += 1
        rule = self.rules.get((request.receiver, request.calldata[:4]))
        if rule is None:
            return ReplayOutcome(False)
        if rule.owners and request.sender not in rule.owners:
            return ReplayOutcome(False)
        count = 1
        if rule.count_word is not None:
            chunk = request.calldata[4 + 32 * rule.count_word : 36 + 32 * rule.count_word]
            if len(chunk) != 32:
                return ReplayOutcome(False)
            count = int.from_bytes(chunk, "big")
        if count < rule.min_count or (rule.cap is not None and count > rule.cap):
            return ReplayOutcome(False)
        if request.value < count * rule.price:
            return ReplayOutcome(False)
        return ReplayOutcome(True, count)

    @classmethod
    def from_json(cls, entries: list[dict]) -> "ScriptedOracle":
        return cls(
            ScriptRule(
                contract=e["contract"].lower(),
                selector=bytes.fromhex(e["selector"].removeprefix("0x")),
                count_word=e.get("count_word"),
                cap=e.get("cap"),
                price=int(e.get("price", 0)),
                owners=frozenset(o.lower() for o in e.get("owners", ())),
                min_count=int(e.get("min_count", 1)),
            )
            for e in entries
        )

    @classmethod
    def load(cls, path) -> "ScriptedOracle":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# --- mint methods ------------------------------------------------------------


@dataclass(frozen=True)
class MintMethod:
    contract: str
    selector: bytes
    privileged: bool | None = None  # None: no oracle to tell
    count_arg_offset: int | None = None
    inferred_limit: int | None = None
    price_per_token: int | None = None
    price_estimated: bool = False
    sample_txn: str | None = None
    probes: int = 0

    @property
    def resolved(self) -> bool:
        return self.inferred_limit is not None


def _mint_calls(t: Txn, contract: str) -> list[tuple[str, bytes, int]]:
    """(caller, calldata, value) of every call from ``t`` into ``contract``."""
    calls = []
    if t.receiver == contract:
        calls.append((t.sender, t.input_data, t.value))
    for c in t.internal_calls:
        if c.callee == contract and c.call_kind == "call":
            calls.append((c.caller, c.input_data, c.value))
    return [c for c in calls if len(c[1]) >= 4]


def minted_count(t: Txn, contract: str) -> int:
    return sum(
        1
        for lg in t.logs
        if lg.emitter == contract
        and lg.signature == TRANSFER_TOPIC
        and len(lg.topics) == 4
        and word_to_address(lg.topic_int(1)) == ZERO_ADDRESS
    )


def identify_unprivileged_mints(
    mint_txns: Iterable[tuple[str, Txn]], oracle: ExecutionOracle | None, foreign_sender: str = FOREIGN_SENDER
) -> list[MintMethod]:
    """Label each method touched by minting txns as privileged or not.

    ``mint_txns`` pairs a token contract with a txn that minted it.  Each
    (contract, selector) is replayed once, from a sender with no special
    rights; a revert marks the method privileged.
    """
    methods: dict[tuple[str, bytes], MintMethod] = {}
    samples: dict[tuple[str, bytes], tuple[Txn, bytes, int]] = {}
    for contract, t in mint_txns:
        for _caller, calldata, value in _mint_calls(t, contract):
            key = (contract, calldata[:4])
            if key not in samples:
                samples[key] = (t, calldata, value)
    for key in sorted(samples):
        t, calldata, value = samples[key]
        if oracle is None:
            methods[key] = MintMethod(key[0], key[1], None, sample_txn=t.hash)
            continue
        try:
            outcome = oracle.replay(ReplayRequest(t.block_number, foreign_sender, key[0], calldata, value))
        except OracleUnavailable:
            log.warning("oracle unavailable; methods left unlabelled")
            oracle = None
            methods[key] = MintMethod(key[0], key[1], None, sample_txn=t.hash)
            continue
        methods[key] = MintMethod(key[0], key[1], not outcome.success, sample_txn=t.hash)
    return list(methods.values())


def _calldata_words(calldata: bytes) -> list[int]:
    body = calldata[4:]
    return [int.from_bytes(body[i : i + 32], "big") for i in range(0, len(body) - 31, 32)]


def _with_word(calldata: bytes, k: int, value: int) -> bytes:
    start = 4 + 32 * k
    return calldata[:start] + value.to_bytes(32, "big") + calldata[start + 32 :]


def infer_mint_limit(m: MintMethod, sample_txn: Txn, oracle: ExecutionOracle, a_max: int = DEFAULT_A_MAX) -> MintMethod:
    """Largest per-call mint count the method accepts, found by replay.

    The count argument is the calldata word equal to the number of tokens the
    sample minted; replays scale the sent value by the sample's price per
    token.  Binary search assumes success for every count up to the limit and
    failure beyond it.  Unresolved when no word matches or nothing up to
    ``a_max`` reverts.
    """
    calls = [c for c in _mint_calls(sample_txn, m.contract) if c[1][:4] == m.selector]
    if not calls:
        return m
    caller, calldata, value = calls[0]
    n = minted_count(sample_txn, m.contract)
    if n < 1:
        return m
    # every call to the method shares one value; the price per token is per call
    per_call = max(1, n // len(calls)) if len(calls) > 1 else n
    price = value // per_call
    probes = 0

    def probe(k: int, count: int) -> ReplayOutcome:
        nonlocal probes
        probes += 1
        req = ReplayRequest(sample_txn.block_number, caller, m.contract, _with_word(calldata, k, count), count * price)
        return oracle.replay(req)

    candidates = [k for k, w in enumerate(_calldata_words(calldata)) if w == per_call]
    if len(candidates) > 1:
        accepted = []
        for k in candidates:
            base = probe(k, per_call)
            bumped = probe(k, per_call + 1)
            if base.success and (not bumped.success or bumped.minted != base.minted):
                accepted.append(k)
        candidates = accepted
    m = replace(m, price_per_token=price, price_estimated=price > 0, sample_txn=sample_txn.hash)
    if len(candidates) != 1:
        return replace(m, probes=probes)
    k = candidates[0]
    m = replace(m, count_arg_offset=k)

    # the sample itself succeeded with per_call, and a_max + 1 stands in for a
    # known revert, so the search costs at most ceil(log2(a_max)) probes
    lo, hi = per_call, a_max + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(k, mid).success:
            lo = mid
        else:
            hi = mid
    if lo >= a_max:
        return replace(m, probes=probes)
    return replace(m, inferred_limit=lo, probes=probes)


def probe_budget(a_max: int = DEFAULT_A_MAX) -> int:
    return math.ceil(math.log2(a_max)) + 2


@dataclass(frozen=True)
class EvasionFinding:
    txn_hash: str
    block_number: int
    contract: str
    selector: bytes
    limit: int
    minted: int
    via_contract: bool
    price_estimated: bool = False

    def __post_init__(self):
        assert self.minted > self.limit

    def to_json(self) -> dict:
        return {
            "kind": "mint_evasion",
            "txn": self.txn_hash,
            "block_number": self.block_number,
            "contract": self.contract,
            "selector": "0x" + self.selector.hex(),
            "limit": self.limit,
            "minted": self.minted,
            "via_contract": self.via_contract,
            "price_estimated": self.price_estimated,
        }


def detect_limit_evasion(
    txns: Iterable[Txn], methods: Iterable[MintMethod], default_limit: int = DEFAULT_LIMIT
) -> Iterator[EvasionFinding]:
    """External txns minting more tokens than an unprivileged method allows.

    Mints are counted per external txn across all its internal calls, so a
    contract fanning out many capped calls is caught.  Methods without an
    inferred limit get ``default_limit``.
    """
    by_contract: dict[str, dict[bytes, MintMethod]] = defaultdict(dict)
    for m in methods:
        if m.privileged is False:
            by_contract[m.contract][m.selector] = m
    for t in txns:
        if not t.succeeded:
            continue
        for contract in sorted(by_contract):
            invoked = [
                by_contract[contract][cd[:4]] for _c, cd, _v in _mint_calls(t, contract) if cd[:4] in by_contract[contract]
            ]
            if not invoked:
                continue
            method = max(invoked, key=lambda m: (m.inferred_limit or default_limit, m.selector))
            limit = method.inferred_limit if method.inferred_limit is not None else default_limit
            minted = minted_count(t, contract)
            if minted > limit:
                yield EvasionFinding(
                    t.hash, t.block_number, contract, method.selector, limit, minted,
                    via_contract=t.receiver != contract, price_estimated=method.price_estimated,
                )
