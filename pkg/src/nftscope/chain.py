"""In-memory ledger model and newline-delimited dataset ingestion.

A dataset is a UTF-8 stream with one JSON record per line.  Every record
carries a ``kind`` of ``block``, ``txn``, ``call`` or ``log``; the records of
one block are contiguous and children follow the txn they belong to::

    {"kind": "block", "block_number": "100", "timestamp": "1650000000", "miner": "0x.."}
    {"kind": "txn", "tx_hash": "0x..", "tx_index": "0", "from": "0x..", "to": "0x..", ...}
    {"kind": "call", "tx_hash": "0x..", "from": "0x..", "to": "0x..", "value": "5", ...}
    {"kind": "log", "tx_hash": "0x..", "address": "0x..", "topics": [...], "data": "0x", "log_index": "0"}

Chain quantities are decimal strings, addresses and hashes 0x-prefixed hex.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

ZERO_ADDRESS = "0x" + "00" * 20
WEI_PER_ETH = 10**18

SUCCESS = "success"
REVERTED = "reverted"

CALL_KINDS = ("call", "delegatecall", "staticcall", "create")


class DatasetError(Exception):
    """Base class for ingestion failures; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedRecord(DatasetError):
    pass


class OutOfOrderBlock(DatasetError):
    pass


class DanglingChild(DatasetError):
    pass


def to_address(value: str) -> str:
    """Canonical lowercase form of a 20-byte hex address."""
    if not isinstance(value, str) or not value.startswith(("0x", "0X")):
        raise ValueError(f"not a hex address: {value!r}")
    body = value[2:].lower()
    if len(body) != 40:
        raise ValueError(f"address must be 20 bytes: {value!r}")
    int(body, 16)
    return "0x" + body


def address_word(addr: str) -> int:
    """An address as a left-padded 32-byte word."""
    return int(addr, 16)


def word_to_address(word: int) -> str:
    return "0x" + (word & ((1 << 160) - 1)).to_bytes(20, "big").hex()


def topic_hex(word: int) -> str:
    return "0x" + word.to_bytes(32, "big").hex()


def eth(amount) -> int:
    """Convert a decimal ETH amount (str/int/Decimal) to wei exactly."""
    from decimal import Decimal

    wei = Decimal(str(amount)) * WEI_PER_ETH
    if wei != wei.to_integral_value():
        raise ValueError(f"{amount} ETH is not a whole number of wei")
    return int(wei)


@dataclass(frozen=True)
class EventLog:
    emitter: str
    topics: tuple[str, ...]
    data: bytes
    log_index: int

    @property
    def signature(self) -> str | None:
        return self.topics[0] if self.topics else None

    def topic_int(self, i: int) -> int:
        return int(self.topics[i], 16)

    def data_word(self, i: int) -> int:
        chunk = self.data[32 * i : 32 * i + 32]
        if len(chunk) != 32:
            raise IndexError(f"log data has no word {i}")
        return int.from_bytes(chunk, "big")


@dataclass(frozen=True)
class InternalCall:
    caller: str
    callee: str
    value: int
    input_data: bytes = b""
    call_kind: str = "call"
    depth: int = 1
    # number of the txn's logs emitted before this call; keeps calls and logs
    # in one occurrence order without a global trace sequence
    logs_before: int = 0


@dataclass(frozen=True)
class Txn:
    hash: str
    block_number: int
    index: int
    status: str
    sender: str
    receiver: str | None
    gas_price: int
    gas_used: int
    input_data: bytes = b""
    value: int = 0
    logs: tuple[EventLog, ...] = ()
    internal_calls: tuple[InternalCall, ...] = ()
    timestamp: int = 0

    @property
    def succeeded(self) -> bool:
        return self.status == SUCCESS

    @property
    def selector(self) -> bytes:
        return self.input_data[:4]


@dataclass(frozen=True)
class Block:
    number: int
    timestamp: int
    miner: str
    txns: tuple[Txn, ...] = ()


def txn_fee(t: Txn) -> int:
    return t.gas_price * t.gas_used


# --- ingestion ---------------------------------------------------------------


def _int(rec: dict, key: str, line: int, default=None) -> int:
    if key not in rec:
        if default is not None:
            return default
        raise MalformedRecord(f"missing field {key!r}", line)
    raw = rec[key]
    try:
        if isinstance(raw, str):
            return int(raw, 16) if raw.startswith("0x") else int(raw)
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ValueError
        return raw
    except ValueError:
        raise MalformedRecord(f"field {key!r} is not an integer: {raw!r}", line) from None


def _addr(rec: dict, key: str, line: int, optional: bool = False) -> str | None:
    raw = rec.get(key)
    if raw is None or raw == "":
        if optional:
            return None
        raise MalformedRecord(f"missing field {key!r}", line)
    try:
        return to_address(raw)
    except ValueError as exc:
        raise MalformedRecord(str(exc), line) from None


def _bytes(rec: dict, key: str, line: int) -> bytes:
    raw = rec.get(key, "0x")
    if not isinstance(raw, str) or not raw.startswith("0x"):
        raise MalformedRecord(f"field {key!r} must be 0x-hex", line)
    try:
        return bytes.fromhex(raw[2:])
    except ValueError:
        raise MalformedRecord(f"field {key!r} is not valid hex", line) from None


def _hash(rec: dict, key: str, line: int) -> str:
    raw = rec.get(key)
    if not isinstance(raw, str) or not raw.startswith("0x") or len(raw) != 66:
        raise MalformedRecord(f"field {key!r} must be a 32-byte 0x-hash", line)
    try:
        int(raw, 16)
    except ValueError:
        raise MalformedRecord(f"field {key!r} is not valid hex", line) from None
    return raw.lower()


def _status(rec: dict, line: int) -> str:
    raw = str(rec.get("status", "")).lower()
    if raw in ("1", "0x1", SUCCESS):
        return SUCCESS
    if raw in ("0", "0x0", REVERTED, "failed"):
        return REVERTED
    raise MalformedRecord(f"bad status {rec.get('status')!r}", line)


class _PendingTxn:
    __slots__ = ("fields", "logs", "calls", "line")

    def __init__(self, fields: dict, line: int):
        self.fields = fields
        self.logs: list[EventLog] = []
        self.calls: list[InternalCall] = []
        self.line = line

    def freeze(self, timestamp: int) -> Txn:
        return Txn(**self.fields, logs=tuple(self.logs), internal_calls=tuple(self.calls), timestamp=timestamp)


class _PendingBlock:
    def __init__(self, number: int, timestamp: int, miner: str, line: int):
        self.number = number
        self.timestamp = timestamp
        self.miner = miner
        self.line = line
        self.txns: list[_PendingTxn] = []
        self.last_log_index: int | None = None

    def freeze(self) -> Block:
        for i, pt in enumerate(self.txns):
            if pt.fields["index"] != i:
                raise MalformedRecord(
                    f"block {self.number}: txn indices must be 0..n-1, got {pt.fields['index']} at position {i}",
                    pt.line,
                )
        return Block(self.number, self.timestamp, self.miner, tuple(pt.freeze(self.timestamp) for pt in self.txns))


def ingest_dataset(stream: Iterable[bytes | str]) -> Iterator[Block]:
    """Assemble Blocks from a newline-delimited record stream.

    Accepts any iterable of lines (a binary or text file object works).
    Raises a DatasetError subclass naming the first bad line.
    """
    current: _PendingBlock | None = None
    last_number: int | None = None

    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError:
                raise MalformedRecord("not valid UTF-8", lineno) from None
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"bad JSON: {exc.msg}", lineno) from None
        if not isinstance(rec, dict):
            raise MalformedRecord("record must be a JSON object", lineno)
        kind = rec.get("kind")

        if kind == "block":
            number = _int(rec, "block_number", lineno)
            if number < 0:
                raise MalformedRecord("negative block number", lineno)
            if last_number is not None and number <= last_number:
                raise OutOfOrderBlock(f"block {number} follows block {last_number}", lineno)
            if current is not None:
                yield current.freeze()
            current = _PendingBlock(number, _int(rec, "timestamp", lineno), _addr(rec, "miner", lineno), lineno)
            last_number = number

        elif kind == "txn":
            if current is None:
                raise DanglingChild("txn record before any block record", lineno)
            if "block_number" in rec and _int(rec, "block_number", lineno) != current.number:
                raise DanglingChild(
                    f"txn claims block {rec['block_number']} inside block {current.number}", lineno
                )
            gas_price = _int(rec, "gas_price", lineno)
            if gas_price <= 0:
                raise MalformedRecord("gas_price must be positive", lineno)
            fields = dict(
                hash=_hash(rec, "tx_hash", lineno),
                block_number=current.number,
                index=_int(rec, "tx_index", lineno),
                status=_status(rec, lineno),
                sender=_addr(rec, "from", lineno),
                receiver=_addr(rec, "to", lineno, optional=True),
                gas_price=gas_price,
                gas_used=_int(rec, "gas_used", lineno),
                input_data=_bytes(rec, "input", lineno),
                value=_int(rec, "value", lineno, default=0),
            )
            if fields["value"] < 0 or fields["gas_used"] < 0:
                raise MalformedRecord("negative quantity", lineno)
            current.txns.append(_PendingTxn(fields, lineno))

        elif kind in ("call", "log"):
            if current is None or not current.txns:
                raise DanglingChild(f"{kind} record with no enclosing txn", lineno)
            pt = current.txns[-1]
            if _hash(rec, "tx_hash", lineno) != pt.fields["hash"]:
                raise DanglingChild(f"{kind} record does not belong to the preceding txn", lineno)
            if kind == "call":
                call_kind = rec.get("call_type", "call")
                if call_kind not in CALL_KINDS:
                    raise MalformedRecord(f"unknown call_type {call_kind!r}", lineno)
                depth = _int(rec, "depth", lineno, default=1)
                prev_depth = pt.calls[-1].depth if pt.calls else 0
                if depth < 1 or depth > prev_depth + 1:
                    raise MalformedRecord(f"call depth {depth} after depth {prev_depth} breaks the call tree", lineno)
                value = _int(rec, "value", lineno, default=0)
                if value < 0:
                    raise MalformedRecord("negative call value", lineno)
                pt.calls.append(
                    InternalCall(
                        caller=_addr(rec, "from", lineno),
                        callee=_addr(rec, "to", lineno),
                        value=value,
                        input_data=_bytes(rec, "input", lineno),
                        call_kind=call_kind,
                        depth=depth,
                        logs_before=len(pt.logs),
                    )
                )
            else:
                topics = rec.get("topics", [])
                if not isinstance(topics, list) or len(topics) > 4:
                    raise MalformedRecord("topics must be a list of at most 4 words", lineno)
                norm = []
                for tp in topics:
                    if not isinstance(tp, str) or not tp.startswith("0x") or len(tp) != 66:
                        raise MalformedRecord(f"bad topic {tp!r}", lineno)
                    norm.append(tp.lower())
                log_index = _int(rec, "log_index", lineno)
                if pt.logs and log_index != pt.logs[-1].log_index + 1:
                    raise MalformedRecord("log indices within a txn must be contiguous", lineno)
                if current.last_log_index is not None and log_index <= current.last_log_index:
                    raise MalformedRecord("log indices must increase within a block", lineno)
                current.last_log_index = log_index
                pt.logs.append(EventLog(_addr(rec, "address", lineno), tuple(norm), _bytes(rec, "data", lineno), log_index))
        else:
            raise MalformedRecord(f"unknown record kind {kind!r}", lineno)

    if current is not None:
        yield current.freeze()


def read_dataset(path) -> list[Block]:
    with open(path, "rb") as fh:
        return list(ingest_dataset(fh))


# --- serialization -----------------------------------------------------------


def block_records(block: Block) -> Iterator[dict]:
    """The record form of one block, in stream order."""
    yield {"kind": "block", "block_number": str(block.number), "timestamp": str(block.timestamp), "miner": block.miner}
    for t in block.txns:
        yield {
            "kind": "txn",
            "block_number": str(block.number),
            "tx_hash": t.hash,
            "tx_index": str(t.index),
            "status": "1" if t.succeeded else "0",
            "from": t.sender,
            "to": t.receiver,
            "gas_price": str(t.gas_price),
            "gas_used": str(t.gas_used),
            "input": "0x" + t.input_data.hex(),
            "value": str(t.value),
        }
        calls = iter(t.internal_calls)
        pending = next(calls, None)
        for i, log in enumerate(t.logs):
            while pending is not None and pending.logs_before <= i:
                yield _call_record(t.hash, pending)
                pending = next(calls, None)
            yield {
                "kind": "log",
                "tx_hash": t.hash,
                "address": log.emitter,
                "topics": list(log.topics),
                "data": "0x" + log.data.hex(),
                "log_index": str(log.log_index),
            }
        while pending is not None:
            yield _call_record(t.hash, pending)
            pending = next(calls, None)


def _call_record(tx_hash: str, c: InternalCall) -> dict:
    return {
        "kind": "call",
        "tx_hash": tx_hash,
        "from": c.caller,
        "to": c.callee,
        "value": str(c.value),
        "input": "0x" + c.input_data.hex(),
        "call_type": c.call_kind,
        "depth": str(c.depth),
    }


def write_dataset(blocks: Iterable[Block], fh: IO[str]) -> None:
    for block in blocks:
        for rec in block_records(block):
            fh.write(json.dumps(rec, separators=(",", ":")))
            fh.write("\n")


# --- lookups -----------------------------------------------------------------


@dataclass
class ChainIndex:
    """Hash and position lookups over an ingested block range."""

    blocks: list[Block]
    _by_hash: dict[str, Txn] = field(default_factory=dict, repr=False)
    _block_by_number: dict[int, Block] = field(default_factory=dict, repr=False)
    _positions: list[tuple[int, int]] = field(default_factory=list, repr=False)
    _ordered: list[Txn] = field(default_factory=list, repr=False)

    def __post_init__(self):
        for b in self.blocks:
            self._block_by_number[b.number] = b
            for t in b.txns:
                self._by_hash[t.hash] = t
                self._positions.append((t.block_number, t.index))
                self._ordered.append(t)

    def txn(self, tx_hash: str) -> Txn:
        return self._by_hash[tx_hash.lower()]

    def block(self, number: int) -> Block:
        return self._block_by_number[number]

    def txns_after(self, t: Txn) -> Iterator[Txn]:
        start = bisect_right(self._positions, (t.block_number, t.index))
        return iter(self._ordered[start:])

    def __iter__(self) -> Iterator[Txn]:
        return iter(self._ordered)
