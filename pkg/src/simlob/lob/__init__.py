"""Limit order book core: matching, snapshots and snapshot stream files."""

from simlob.lob.io import read_lobs, read_lobs_csv, write_lobs, write_lobs_csv
from simlob.lob.order_book import OrderBook
from simlob.models.book import LobSeries, LobSnapshot, Order, Side, Trade, mid_price

__all__ = [
    "OrderBook",
    "Order",
    "Side",
    "Trade",
    "LobSnapshot",
    "LobSeries",
    "mid_price",
    "read_lobs",
    "write_lobs",
    "read_lobs_csv",
    "write_lobs_csv",
]
