"""Command-line driver: ingestion, detector pipelines and reports."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import shutil
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from decimal import Decimal
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable

from . import minting, ordering, payments, pricing
from .chain import ChainIndex, DatasetError, WEI_PER_ETH, read_dataset, write_dataset
from .decoder import (
    Registry,
    RegistryError,
    ScanReport,
    TokenContractSet,
    identify_token_contracts,
    load_registry,
    scan_trade_actions,
    NftRef,
)

log = logging.getLogger("nftscope")

DETECTORS = ("frontrun", "backrun", "lossmin", "instant-profit", "mint-evasion", "cornering")
ENV_DATA_DIR = "NFTSCOPE_DATA_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


class ConfigError(Exception):
    pass


class MalformedFinding(ValueError):
    pass


def _fraction(v) -> Fraction:
    try:
        return Fraction(str(v).strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a fraction: {v!r}") from None


@dataclass
class RunConfig:
    dataset: Path | None = None
    registry: Path | None = None
    token_cache: Path | None = None
    out: Path = Path("findings")
    detectors: tuple[str, ...] = DETECTORS
    th_e: int = payments.DEFAULT_TH_E
    th_f: Fraction | None = None
    th_t: int = minting.DEFAULT_TH_T
    lookback_months: int = pricing.DEFAULT_LOOKBACK_MONTHS
    min_trades: int = pricing.DEFAULT_MIN_TRADES
    a_max: int = minting.DEFAULT_A_MAX
    workers: int = 1
    oracle: Path | None = None
    flashbots: Path | None = None
    exclude: tuple[str, ...] = ()
    allowlist: tuple[str, ...] = ()

    def validate(self) -> None:
        unknown = set(self.detectors) - set(DETECTORS)
        if unknown:
            raise ConfigError(f"unknown detectors: {', '.join(sorted(unknown))}")
        if self.dataset is None:
            raise ConfigError(f"no dataset given (use --dataset or set {ENV_DATA_DIR})")
        if not Path(self.dataset).is_file():
            raise ConfigError(f"dataset not found: {self.dataset}")
        if self.registry is not None and not Path(self.registry).is_file():
            raise ConfigError(f"registry not found: {self.registry}")
        if self.th_e < 0:
            raise ConfigError("th_e must be >= 0")
        if "cornering" in self.detectors:
            if self.th_f is None:
                raise ConfigError("cornering needs th_f (fraction of supply, e.g. 0.1)")
        if self.th_f is not None and not 0 < self.th_f < 1:
            raise ConfigError("th_f must lie in (0, 1)")
        if self.th_t < 1 or self.a_max < 2 or self.min_trades < 0 or self.lookback_months < 1:
            raise ConfigError("threshold out of range")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        cfg = cls()
        known = {f.name for f in fields(cls)}
        for key, raw in values.items():
            if raw is None:
                continue
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                if key in ("dataset", "registry", "token_cache", "out", "oracle", "flashbots"):
                    val = Path(raw)
                elif key in ("detectors", "exclude", "allowlist"):
                    items = raw if isinstance(raw, (list, tuple)) else str(raw).split(",")
                    val = tuple(s.strip().lower() if key != "detectors" else s.strip() for s in items if s.strip())
                    if key == "detectors" and val == ("all",):
                        val = DETECTORS
                elif key == "th_f":
                    val = _fraction(raw)
                else:
                    val = int(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
            setattr(cfg, key, val)
        return cfg


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, quotes are stripped."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, _, val = line.partition("=")
        val = val.strip()
        if len(val) >= 2 and val[0] == val[-1] and val[0] in "\"'":
            val = val[1:-1]
        out[key.strip()] = val
    return out


@dataclass
class RunSummary:
    counts: dict[str, int] = field(default_factory=dict)
    wall_time: dict[str, float] = field(default_factory=dict)
    errors: dict[str, list[str]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "counts": self.counts,
            "wall_time_s": {k: round(v, 6) for k, v in self.wall_time.items()},
            "errors": {k: v for k, v in self.errors.items() if v},
        }


def _dump(records: Iterable[dict], path: Path) -> int:
    n = 0
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


def _ordering_chunk(args) -> list:
    groups, patterns, bid_agnostic, on_chain = args
    out = []
    for g in groups:
        out.extend(ordering.ordering_findings_in_block(g, patterns, bid_agnostic, on_chain))
    return out


def ordering_findings(groups, patterns, registry: Registry, workers: int = 1) -> list[ordering.OrderingFinding]:
    """Ordering findings for all block groups, serial or over worker processes."""
    bid_agnostic, on_chain = registry.bid_agnostic_markets, registry.on_chain_listing_markets
    if workers <= 1 or len(groups) < 2:
        found = _ordering_chunk((groups, patterns, bid_agnostic, on_chain))
    else:
        size = max(1, len(groups) // (workers * 4))
        chunks = [(groups[i : i + size], patterns, bid_agnostic, on_chain) for i in range(0, len(groups), size)]
        found = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_ordering_chunk, chunks):
                found.extend(part)
    return sorted(found, key=ordering.OrderingFinding.sort_key)


_PATTERNS_BY_DETECTOR = {
    "frontrun": tuple(ordering.FRONTRUN_PATTERNS),
    "backrun": ("listing_buy_backrun",),
    "lossmin": ("cancel_buy_lossmin",),
}


def run(config: RunConfig) -> RunSummary:
    """Run the selected detectors and write one findings file per detector."""
    config.validate()
    summary = RunSummary()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    try:
        registry = Registry(load_registry(config.registry))
    except (RegistryError, OSError) as exc:
        raise ConfigError(f"registry: {exc}") from None

    t0 = time.perf_counter()
    blocks = read_dataset(config.dataset)
    summary.wall_time["ingest"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if config.token_cache is not None and Path(config.token_cache).is_file():
        token_set = TokenContractSet.from_json(json.loads(Path(config.token_cache).read_text()))
    else:
        token_set = identify_token_contracts(blocks)
        if config.token_cache is not None:
            Path(config.token_cache).write_text(json.dumps(token_set.to_json(), indent=1, sort_keys=True) + "\n")
    summary.wall_time["identify-tokens"] = time.perf_counter() - t0

    selected = [d for d in DETECTORS if d in config.detectors]
    ordering_selected = [d for d in selected if d in _PATTERNS_BY_DETECTOR]
    if ordering_selected:
        t0 = time.perf_counter()
        report = ScanReport()
        actions = list(scan_trade_actions(blocks, registry, report))
        groups = ordering.group_actions_by_block(actions)
        summary.errors["scan-trades"] = report.recipe_failures
        summary.wall_time["scan-trades"] = time.perf_counter() - t0
        flashbots = ordering.load_flashbots_list(config.flashbots) if config.flashbots else frozenset()
        index = ChainIndex(blocks)
        for det in ordering_selected:
            t0 = time.perf_counter()
            found = ordering_findings(groups, _PATTERNS_BY_DETECTOR[det], registry, config.workers)
            records = []
            for f in found:
                rec = f.to_json()
                ch = ordering.classify_channel(f, flashbots, index.block(f.block_number), token_set)
                rec["channel"] = ch.channel
                rec["miner_payment"] = str(ch.miner_payment)
                records.append(rec)
            summary.counts[det] = _dump(records, out / f"{det}.jsonl")
            if det == "frontrun":
                errs: list[str] = []
                stats = [
                    {
                        "block_number": s.block_number,
                        "nft": {"contract": s.nft.contract, "token_id": str(s.nft.token_id)},
                        "contender_count": s.contender_count,
                        "gc_high": str(s.gc_high),
                        "gc_low_est": str(s.gc_low_est),
                    }
                    for s in ordering.gas_war_stats(found, errs)
                ]
                (out / "stats").mkdir(exist_ok=True)
                _dump(stats, out / "stats" / "gas-wars.jsonl")
                summary.errors["gas-wars"] = errs
            summary.wall_time[det] = time.perf_counter() - t0

    if "instant-profit" in selected:
        t0 = time.perf_counter()
        history = payments.AddressHistory.build(blocks, token_set)
        found = payments.scan_instant_profits(blocks, token_set, history, config.th_e, frozenset(config.allowlist))
        summary.counts["instant-profit"] = _dump((f.to_json() for f in found), out / "instant-profit.jsonl")
        summary.wall_time["instant-profit"] = time.perf_counter() - t0

    if "mint-evasion" in selected or "cornering" in selected:
        t0 = time.perf_counter()
        updates = list(minting.track_collections(blocks, token_set.erc721))
        summary.wall_time["track-collections"] = time.perf_counter() - t0
        if "mint-evasion" in selected:
            t0 = time.perf_counter()
            errs = []
            found = mint_evasions(blocks, updates, config, errs)
            summary.errors["mint-evasion"] = errs
            summary.counts["mint-evasion"] = _dump((f.to_json() for f in found), out / "mint-evasion.jsonl")
            summary.wall_time["mint-evasion"] = time.perf_counter() - t0
        if "cornering" in selected:
            t0 = time.perf_counter()
            found = minting.detect_cornering(updates, config.th_f, config.th_t, frozenset(config.exclude))
            summary.counts["cornering"] = _dump((f.to_json() for f in found), out / "cornering.jsonl")
            summary.wall_time["cornering"] = time.perf_counter() - t0

    (out / "summary.json").write_text(json.dumps(summary.to_json(), indent=1, sort_keys=True) + "\n")
    return summary


def mint_evasions(blocks, updates, config: RunConfig, errors: list[str]) -> list[minting.EvasionFinding]:
    index = ChainIndex(blocks)
    minted_by = minting.mint_txn_hashes(updates)
    pairs = []
    for contract in sorted(minted_by):
        txns = sorted((index.txn(h) for h in minted_by[contract]), key=lambda t: (t.block_number, t.index))
        pairs.extend((contract, t) for t in txns)
    oracle = minting.ScriptedOracle.load(config.oracle) if config.oracle else None
    if oracle is None:
        errors.append("no execution oracle configured; mint methods left unlabelled")
    methods = minting.identify_unprivileged_mints(pairs, oracle)
    resolved = []
    for m in methods:
        if m.privileged is False and oracle is not None:
            m = minting.infer_mint_limit(m, index.txn(m.sample_txn), oracle, config.a_max)
            if not m.resolved:
                errors.append(f"{m.contract} 0x{m.selector.hex()}: limit unresolved, using default {minting.DEFAULT_LIMIT}")
        resolved.append(m)
    return list(minting.detect_limit_evasion(index, resolved))


# --- reports -----------------------------------------------------------------


def read_findings(paths: Iterable) -> list[dict]:
    records = []
    for path in paths:
        with open(path) as fh:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    raise MalformedFinding(f"{path}:{n}: not JSON") from None
                if not isinstance(rec, dict):
                    raise MalformedFinding(f"{path}:{n}: not an object")
                rec.setdefault("detector", Path(path).stem)
                records.append(rec)
    return records


def records_to_csv(records: list[dict]) -> str:
    """CSV with one JSON-encoded cell per key; absent keys stay empty."""
    columns = sorted({k for r in records for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([json.dumps(r[c], sort_keys=True, separators=(",", ":")) if c in r else "" for c in columns])
    return buf.getvalue()


def csv_to_records(text: str) -> list[dict]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    header, out = rows[0], []
    for row in rows[1:]:
        try:
            out.append({k: json.loads(v) for k, v in zip(header, row) if v != ""})
        except json.JSONDecodeError:
            raise MalformedFinding(f"bad CSV cell in row {row!r}") from None
    return out


def _label(r: dict) -> str:
    return r.get("pattern") or r.get("kind_hint") or r.get("kind") or r["detector"]


def _profit(r: dict) -> int:
    return int(r.get("net_profit_wei", 0))


def _txn(r: dict) -> str:
    if "attacker" in r:
        return r["attacker"]["txn_hash"]
    return r.get("txn", "")


def render_table(records: list[dict]) -> str:
    rows = sorted(records, key=lambda r: (int(r.get("block_number", 0)), -_profit(r), _txn(r)))
    header = ("block", "detector", "pattern", "txn", "profit_eth")
    body = [
        (str(r.get("block_number", "")), r["detector"], _label(r), _txn(r), f"{Decimal(_profit(r)) / WEI_PER_ETH:.6f}" if "net_profit_wei" in r else "")
        for r in rows
    ]
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in body]
    by_detector = Counter(r["detector"] for r in records)
    by_pattern = Counter((r["detector"], _label(r)) for r in records)
    lines.append("")
    lines.append("counts by detector")
    lines += [f"  {d}: {n}" for d, n in sorted(by_detector.items())]
    lines.append("counts by pattern")
    lines += [f"  {d}/{p}: {n}" for (d, p), n in sorted(by_pattern.items())]
    return "\n".join(lines) + "\n"


def report(paths: Iterable, fmt: str = "table") -> str:
    records = read_findings(paths)
    if fmt == "jsonl":
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in records)
    if fmt == "csv":
        return records_to_csv(records)
    if fmt == "table":
        return render_table(records)
    raise ValueError(f"unknown format {fmt!r}")


# --- entry point -------------------------------------------------------------


def _default_dataset() -> str | None:
    d = os.environ.get(ENV_DATA_DIR)
    return str(Path(d) / "dataset.jsonl") if d else None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help=f"NDJSON dataset (default: ${ENV_DATA_DIR}/dataset.jsonl)")
    p.add_argument("--registry", help="marketplace registry JSON (default: bundled)")


def _add_thresholds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--th-e", type=int)
    p.add_argument("--th-f")
    p.add_argument("--th-t", type=int)
    p.add_argument("--a-max", type=int)
    p.add_argument("--oracle", help="scripted replay oracle JSON")
    p.add_argument("--flashbots", help="file of relayed txn hashes, one per line")
    p.add_argument("--exclude", help="comma-separated addresses ignored by cornering")
    p.add_argument("--allowlist", help="comma-separated addresses always kept in profit cliques")
    p.add_argument("--token-cache")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nftscope", description="Detect opportunistic NFT trades in chain data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identify-tokens", help="classify ERC-721/ERC-1155 contracts")
    _add_common(p)
    p.add_argument("--out")

    p = sub.add_parser("scan-trades", help="decode marketplace trade actions")
    _add_common(p)

    p = sub.add_parser("detect", help="run one detector, findings to stdout")
    p.add_argument("kind", choices=("frontrun", "backrun", "lossmin", "instant-profit", "mint-evasion", "cornering"))
    _add_common(p)
    _add_thresholds(p)

    p = sub.add_parser("run", help="run a detector pipeline into an output directory")
    p.add_argument("--config", help="key = value config file; flags override it")
    _add_common(p)
    _add_thresholds(p)
    p.add_argument("--detectors", help="comma-separated subset or 'all'")
    p.add_argument("--out")

    p = sub.add_parser("price", help="speculative price of a collection")
    p.add_argument("--stats", required=True)
    p.add_argument("--contract", required=True)
    p.add_argument("--as-of", type=int, required=True)
    p.add_argument("--lookback-months", type=int, default=pricing.DEFAULT_LOOKBACK_MONTHS)
    p.add_argument("--min-trades", type=int, default=pricing.DEFAULT_MIN_TRADES)
    p.add_argument("--fiat", help="CSV timestamp,usd_rate feed")

    p = sub.add_parser("profit", help="realized or speculative profit of an acquisition")
    _add_common(p)
    p.add_argument("--buy-txn", required=True)
    p.add_argument("--contract", required=True)
    p.add_argument("--token-id", required=True)
    p.add_argument("--owner", required=True)
    p.add_argument("--price", required=True, help="purchase price in wei")
    p.add_argument("--stats")
    p.add_argument("--as-of", type=int)
    p.add_argument("--lookback-months", type=int, default=pricing.DEFAULT_LOOKBACK_MONTHS)
    p.add_argument("--min-trades", type=int, default=pricing.DEFAULT_MIN_TRADES)

    p = sub.add_parser("report", help="render findings files")
    p.add_argument("files", nargs="+")
    p.add_argument("--format", choices=("jsonl", "table", "csv"), default="table")

    p = sub.add_parser("demo", help="write the bundled demo dataset and inputs")
    p.add_argument("--out", required=True)
    return parser


def _config_from_args(args) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    flags = {
        k: getattr(args, k, None)
        for k in ("dataset", "registry", "th_e", "th_f", "th_t", "a_max", "oracle", "flashbots", "exclude",
                  "allowlist", "token_cache", "workers", "detectors", "out")
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    values.setdefault("dataset", _default_dataset())
    return RunConfig.from_mapping(values)


def _cmd_detect(args) -> int:
    import tempfile

    cfg = _config_from_args(args)
    cfg.detectors = (args.kind,)
    with tempfile.TemporaryDirectory() as tmp:
        cfg.out = Path(tmp)
        run(cfg)
        sys.stdout.write((Path(tmp) / f"{args.kind}.jsonl").read_text())
    return EXIT_OK


def _cmd_profit(args) -> int:
    cfg = _config_from_args(args)
    if cfg.dataset is None:
        raise ConfigError("no dataset given")
    blocks = read_dataset(cfg.dataset)
    index = ChainIndex(blocks)
    token_set = identify_token_contracts(blocks)
    buy = index.txn(args.buy_txn)
    nft = NftRef(args.contract.lower(), int(args.token_id, 0))
    price = int(args.price)
    sale, merged = payments.trace_sale(nft, args.owner.lower(), buy, index, token_set)
    fee = buy.gas_price * buy.gas_used
    result = {"buy_txn": buy.hash, "buy_price": str(price), "buy_fee": str(fee), "merged_identities": merged}
    if sale is not None:
        result.update(
            basis="realized",
            sale_txn=sale.sale_txn,
            pay_in=str(sale.pay_in),
            pay_out=str(sale.pay_out),
            profit=str(sale.net_earning - price - fee),
        )
    elif args.stats:
        as_of = args.as_of if args.as_of is not None else blocks[-1].timestamp
        quote = pricing.speculative_price(nft.contract, as_of, pricing.load_stats(args.stats), args.lookback_months, args.min_trades)
        result.update(basis=quote.basis, price=str(quote.price), profit=str(payments.speculative_profit(price, quote.price) - fee))
    else:
        result.update(basis="unsold")
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


def _cmd_demo(args) -> int:
    from . import synth

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    blocks, info = synth.demo_chain()
    with open(out / "dataset.jsonl", "w") as fh:
        write_dataset(blocks, fh)
    shutil.copyfile(resources.files("nftscope").joinpath("data/registry.json"), out / "registry.json")
    mint = info["scenarios"]["mint_evasion"].expect
    (out / "oracle.json").write_text(json.dumps(mint["oracle"], indent=1) + "\n")
    (out / "flashbots.txt").write_text(info["frontrun"].planted[0].attacker_hash + "\n")
    (out / "run.conf").write_text(
        "dataset = dataset.jsonl\nregistry = registry.json\noracle = oracle.json\n"
        f"flashbots = flashbots.txt\nth_f = {synth.DEMO_TH_F}\nout = findings\n"
    )
    print(f"demo written to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = _config_from_args(args)
            if args.config:
                base = Path(args.config).parent
                for k in ("dataset", "registry", "oracle", "flashbots", "token_cache", "out"):
                    v = getattr(cfg, k)
                    if v is not None and not v.is_absolute() and getattr(args, k, None) is None:
                        setattr(cfg, k, base / v)
            summary = run(cfg)
            print(json.dumps(summary.to_json()["counts"], sort_keys=True))
            return EXIT_OK
        if args.command == "detect":
            return _cmd_detect(args)
        if args.command == "identify-tokens":
            cfg = _config_from_args(args)
            if cfg.dataset is None or not Path(cfg.dataset).is_file():
                raise ConfigError(f"dataset not found: {cfg.dataset}")
            text = json.dumps(identify_token_contracts(read_dataset(cfg.dataset)).to_json(), indent=1, sort_keys=True) + "\n"
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        if args.command == "scan-trades":
            cfg = _config_from_args(args)
            if cfg.dataset is None or not Path(cfg.dataset).is_file():
                raise ConfigError(f"dataset not found: {cfg.dataset}")
            try:
                registry = Registry(load_registry(cfg.registry))
            except (RegistryError, OSError) as exc:
                raise ConfigError(f"registry: {exc}") from None
            for a in scan_trade_actions(read_dataset(cfg.dataset), registry):
                sys.stdout.write(json.dumps(a.to_json(), sort_keys=True, separators=(",", ":")) + "\n")
            return EXIT_OK
        if args.command == "price":
            quote = pricing.speculative_price(
                args.contract.lower(), args.as_of, pricing.load_stats(args.stats), args.lookback_months, args.min_trades
            )
            result = {"contract": quote.nft_contract, "as_of": quote.as_of, "price": str(quote.price), "basis": quote.basis}
            if args.fiat:
                result["usd"] = str(pricing.to_usd(quote.price, args.as_of, pricing.FiatFeed.load_csv(args.fiat)))
            print(json.dumps(result, sort_keys=True))
            return EXIT_OK
        if args.command == "profit":
            return _cmd_profit(args)
        if args.command == "report":
            sys.stdout.write(report(args.files, args.format))
            return EXIT_OK
        if args.command == "demo":
            return _cmd_demo(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, MalformedFinding, pricing.NoData, pricing.NoRateBefore, KeyError, minting.NegativeBalance) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
