"""SQLite-backed cache of exact type-class tables."""

import hashlib
import io
import sqlite3
import struct
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np

from ..core.distribution import FiniteDistribution
from ..sources.types import TypeClassTable

FORMAT_VERSION = 1
_MAGIC = b"SOCT"
_HEADER = struct.Struct("<4sHIH")  # magic, format version, n, alphabet size


def table_key(p: FiniteDistribution, n: int) -> str:
    """Stable hash of (labels, exact probability bits, n)."""
    h = hashlib.sha256()
    h.update("\x1f".join(p.labels).encode("utf-8"))
    h.update(np.ascontiguousarray(p.probs, dtype="<f8").tobytes())
    h.update(struct.pack("<I", n))
    return h.hexdigest()


def encode_table(table: TypeClassTable) -> bytes:
    """Compact binary payload: versioned header followed by four .npy arrays."""
    buf = io.BytesIO()
    buf.write(_HEADER.pack(_MAGIC, FORMAT_VERSION, table.n, table.alphabet_size))
    for arr in (
        table.compositions,
        table.log_count,
        table.per_element_log_prob,
        table.class_log_prob,
    ):
        np.save(buf, arr, allow_pickle=False)
    return buf.getvalue()


def decode_table(payload: bytes) -> TypeClassTable:
    """Inverse of :func:`encode_table`."""
    magic, version, n, d = _HEADER.unpack_from(payload)
    if magic != _MAGIC or version != FORMAT_VERSION:
        raise ValueError(f"unsupported table payload (version {version})")
    buf = io.BytesIO(payload[_HEADER.size :])
    comps, log_count, per_elem, class_lp = (
        np.load(buf, allow_pickle=False) for _ in range(4)
    )
    return TypeClassTable(
        n=n,
        alphabet_size=d,
        compositions=comps,
        log_count=log_count,
        per_element_log_prob=per_elem,
        class_log_prob=class_lp,
    )


class TableCache:
    """Manages the on-disk cache of type-class tables keyed by (P, n)."""

    def __init__(self, db_path: str = "socint-cache.db"):
        """Initialize the cache at the given database path."""
        self.db_path = Path(db_path)
        self.init_database()

    def init_database(self) -> None:
        """Create tables if missing and drop rows of an older format."""
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()

            cursor.execute("""
                CREATE TABLE IF NOT EXISTS meta (
                    key TEXT PRIMARY KEY,
                    value TEXT NOT NULL
                )
            """)

            cursor.execute("""
                CREATE TABLE IF NOT EXISTS type_tables (
                    key TEXT PRIMARY KEY,
                    n INTEGER NOT NULL,
                    alphabet_size INTEGER NOT NULL,
                    payload BLOB NOT NULL,
                    created_date TEXT NOT NULL
                )
            """)

            cursor.execute("SELECT value FROM meta WHERE key = 'format_version'")
            row = cursor.fetchone()
            if row is None or int(row[0]) != FORMAT_VERSION:
                # stale payloads are invalidated, never reinterpreted
                cursor.execute("DELETE FROM type_tables")
                cursor.execute(
                    "INSERT OR REPLACE INTO meta (key, value) VALUES ('format_version', ?)",
                    (str(FORMAT_VERSION),),
                )

            conn.commit()

    def get_table(self, p: FiniteDistribution, n: int) -> TypeClassTable | None:
        """Return the cached table for (P, n), or None."""
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute(
                "SELECT payload FROM type_tables WHERE key = ?", (table_key(p, n),)
            )
            row = cursor.fetchone()
        if row is None:
            return None
        try:
            return decode_table(bytes(row[0]))
        except ValueError:
            return None

    def put_table(self, p: FiniteDistribution, n: int, table: TypeClassTable) -> None:
        """Store (or replace) the table for (P, n)."""
        now = datetime.now().isoformat()
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute(
                """
                INSERT OR REPLACE INTO type_tables (key, n, alphabet_size, payload, created_date)
                VALUES (?, ?, ?, ?, ?)
            """,
                (table_key(p, n), n, table.alphabet_size, encode_table(table), now),
            )
            if cursor.rowcount != 1:
                raise RuntimeError("Failed to store type table")

    def delete_table(self, p: FiniteDistribution, n: int) -> bool:
        """Remove one cached table."""
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("DELETE FROM type_tables WHERE key = ?", (table_key(p, n),))
            return cursor.rowcount > 0

    def get_cache_stats(self) -> dict[str, Any]:
        """Get cache statistics."""
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()

            cursor.execute("SELECT COUNT(*), COALESCE(SUM(LENGTH(payload)), 0) FROM type_tables")
            count, size = cursor.fetchone()

            return {
                "tables": int(count),
                "payload_bytes": int(size),
                "format_version": FORMAT_VERSION,
            }
