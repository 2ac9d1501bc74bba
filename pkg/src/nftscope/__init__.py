"""Detection of opportunistic NFT trading from raw chain data."""

from .chain import Block, ChainIndex, DatasetError, EventLog, InternalCall, Txn, read_dataset
from .decoder import NftRef, Registry, TradeAction, identify_token_contracts, load_registry, scan_trade_actions

__version__ = "0.1.0"

__all__ = [
    "Block",
    "ChainIndex",
    "DatasetError",
    "EventLog",
    "InternalCall",
    "NftRef",
    "Registry",
    "TradeAction",
    "Txn",
    "identify_token_contracts",
    "load_registry",
    "read_dataset",
    "scan_trade_actions",
]
