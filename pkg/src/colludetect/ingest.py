"""Trade-file parsing, identifier mapping, and stock/time-window filtering.

Input files are header-first CSV with one executed trade per row. The five
required fields are buyer, seller, stock, timestamp, price, and volume;
column names can be remapped through a schema. Malformed rows are collected
with their line numbers instead of aborting the parse, so a single bad row
in a large exchange dump never hides the rest of the data.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterable, Iterator, Mapping, Sequence, TextIO

from .errors import InputError, SchemaError

REQUIRED_FIELDS = ("buyer_id", "seller_id", "stock_id", "timestamp", "price", "volume")

_EPOCH_RE = re.compile(r"[+-]?\d+")
_ORDER_ID_RE = re.compile(r"[0-9]{17}")
_TRADER_ID_DIGITS = 6


def parse_timestamp(text: str) -> int:
    """Parse an ISO-8601 instant or integer epoch seconds into epoch seconds.

    Naive ISO timestamps are taken as UTC; fractional seconds are truncated.
    """
    text = text.strip()
    if _EPOCH_RE.fullmatch(text):
        return int(text)
    iso = text.replace("Z", "+00:00") if text.endswith("Z") else text
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        raise InputError(f"unrecognized timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(epoch_seconds: int) -> str:
    """Render epoch seconds as an ISO-8601 UTC instant (Z suffix)."""
    dt = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class TradeRecord:
    """One executed trade between two distinct traders.

    Prices are positive, volumes are whole units of at least one, and the
    timestamp is epoch seconds (UTC, seconds resolution).
    """

    buyer_id: str
    seller_id: str
    stock_id: str
    timestamp: int
    price: float
    volume: int

    def __post_init__(self):
        if not self.buyer_id or not self.seller_id or not self.stock_id:
            raise InputError("buyer, seller and stock identifiers must be non-empty")
        if self.buyer_id == self.seller_id:
            raise InputError(f"self-trade for trader {self.buyer_id!r}")
        if not (self.price > 0):
            raise InputError(f"price must be positive, got {self.price}")
        if self.volume < 1:
            raise InputError(f"volume must be at least 1, got {self.volume}")


@dataclass(frozen=True)
class WindowSpec:
    """A stock plus a half-open analysis window [start, start + days)."""

    stock_id: str
    start: int
    days: float

    def __post_init__(self):
        if not self.days > 0:
            raise InputError(f"window duration must be positive, got {self.days} days")

    @property
    def end(self) -> float:
        return self.start + self.days * 86400.0

    def contains(self, trade: TradeRecord) -> bool:
        return trade.stock_id == self.stock_id and self.start <= trade.timestamp < self.end


@dataclass(frozen=True)
class RowIssue:
    """A malformed row: the 1-based line number where it ends, and why."""

    line: int
    message: str


@dataclass
class ParseResult:
    records: list[TradeRecord] = field(default_factory=list)
    issues: list[RowIssue] = field(default_factory=list)


def parse_trades(
    source: TextIO | Iterable[str],
    schema: Mapping[str, str] | None = None,
    id_map: Callable[[str], str] | None = None,
) -> ParseResult:
    """Parse a header-first CSV stream of trades.

    ``schema`` maps each required field name to the column name carrying it;
    unmapped fields default to their own name. ``id_map`` is applied to the
    buyer and seller columns before validation (e.g. to collapse exchange
    order identifiers to trader identifiers).

    A missing required column raises :class:`SchemaError`. Malformed rows
    (bad numbers, non-positive price, volume < 1, self-trades, mapping
    failures) are recorded as :class:`RowIssue` with their line number and
    parsing continues.
    """
    columns = dict.fromkeys(REQUIRED_FIELDS)
    columns.update({f: f for f in REQUIRED_FIELDS})
    if schema:
        unknown = set(schema) - set(REQUIRED_FIELDS)
        if unknown:
            raise SchemaError(f"schema maps unknown fields: {sorted(unknown)}")
        columns.update(schema)

    reader = csv.DictReader(source)
    header = reader.fieldnames
    if header is None:
        raise SchemaError("input is empty; expected a header row")
    missing = [columns[f] for f in REQUIRED_FIELDS if columns[f] not in header]
    if missing:
        raise SchemaError(f"missing required columns: {missing}")

    result = ParseResult()
    for row in reader:
        line = reader.line_num
        try:
            result.records.append(_parse_row(row, columns, id_map))
        except InputError as exc:
            result.issues.append(RowIssue(line, str(exc)))
    return result


def _parse_row(
    row: Mapping[str, str | None],
    columns: Mapping[str, str],
    id_map: Callable[[str], str] | None,
) -> TradeRecord:
    values = {}
    for fieldname in REQUIRED_FIELDS:
        raw = row.get(columns[fieldname])
        if raw is None or raw == "":
            raise InputError(f"missing value for {fieldname}")
        values[fieldname] = raw.strip()

    buyer, seller = values["buyer_id"], values["seller_id"]
    if id_map is not None:
        buyer, seller = id_map(buyer), id_map(seller)

    try:
        price = float(values["price"])
    except ValueError:
        raise InputError(f"non-numeric price {values['price']!r}") from None
    if price != price or price in (float("inf"), float("-inf")):
        raise InputError(f"non-finite price {values['price']!r}")
    try:
        volume = int(values["volume"])
    except ValueError:
        raise InputError(f"non-integer volume {values['volume']!r}") from None

    return TradeRecord(
        buyer_id=buyer,
        seller_id=seller,
        stock_id=values["stock_id"],
        timestamp=parse_timestamp(values["timestamp"]),
        price=price,
        volume=volume,
    )


def serialize_trades(records: Iterable[TradeRecord], stream: TextIO) -> None:
    """Write records as CSV in the default schema; inverse of parse_trades."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(REQUIRED_FIELDS)
    for r in records:
        writer.writerow(
            [r.buyer_id, r.seller_id, r.stock_id, format_timestamp(r.timestamp), repr(r.price), r.volume]
        )


def trader_id_from_order_id(order_id: str) -> str:
    """Map a 17-digit exchange order identifier to its trader identifier.

    The trader is identified by the leading 6 digits of the order id.
    """
    if not _ORDER_ID_RE.fullmatch(order_id):
        raise InputError(f"order id must be exactly 17 decimal digits, got {order_id!r}")
    return order_id[:_TRADER_ID_DIGITS]


def filter_window(trades: Sequence[TradeRecord] | Iterator[TradeRecord], window: WindowSpec) -> list[TradeRecord]:
    """Keep trades of the window's stock with start <= timestamp < start + days."""
    return [t for t in trades if window.contains(t)]
