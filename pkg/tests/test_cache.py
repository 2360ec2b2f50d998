"""Tests for the type-table cache."""

import sqlite3
import tempfile
from pathlib import Path

import numpy as np

from src.core.distribution import FiniteDistribution
from src.database.manager import FORMAT_VERSION, TableCache, table_key
from src.sources.types import iid_type_table


def test_cache_initialization() -> None:
    """Test cache initialization."""
    with tempfile.TemporaryDirectory() as tmpdir:
        db_path = Path(tmpdir) / "test.db"
        cache = TableCache(str(db_path))

        # Database should be created
        assert db_path.exists()

        stats = cache.get_cache_stats()
        assert stats["tables"] == 0
        assert stats["format_version"] == FORMAT_VERSION


def test_table_storage() -> None:
    """Test a stored table comes back with identical arrays and counts."""
    with tempfile.TemporaryDirectory() as tmpdir:
        cache = TableCache(str(Path(tmpdir) / "test.db"))
        p = FiniteDistribution.from_probs([0.5, 0.3, 0.2])
        table = iid_type_table(p, 12)

        assert cache.get_table(p, 12) is None
        cache.put_table(p, 12, table)

        loaded = cache.get_table(p, 12)
        assert loaded is not None
        assert loaded.n == 12
        assert loaded.alphabet_size == 3
        assert np.array_equal(loaded.compositions, table.compositions)
        assert np.array_equal(loaded.class_log_prob, table.class_log_prob)
        assert loaded.counts == table.counts

        assert cache.get_cache_stats()["tables"] == 1
        assert cache.delete_table(p, 12)
        assert not cache.delete_table(p, 12)


def test_cache_is_used_by_table_builder() -> None:
    """Test the builder stores on a miss and reads back on a hit."""
    with tempfile.TemporaryDirectory() as tmpdir:
        cache = TableCache(str(Path(tmpdir) / "test.db"))
        p = FiniteDistribution.bernoulli(0.11)

        first = iid_type_table(p, 50, cache=cache)
        assert cache.get_cache_stats()["tables"] == 1
        second = iid_type_table(p, 50, cache=cache)
        assert np.array_equal(first.per_element_log_prob, second.per_element_log_prob)


def test_keys_separate_sources_and_lengths() -> None:
    """Test keys differ by probabilities, labels and block length."""
    p = FiniteDistribution.bernoulli(0.11)
    keys = {
        table_key(p, 10),
        table_key(p, 11),
        table_key(FiniteDistribution.bernoulli(0.12), 10),
        table_key(FiniteDistribution.from_probs([0.89, 0.11], ["a", "b"]), 10),
    }
    assert len(keys) == 4


def test_stale_format_is_dropped() -> None:
    """Test rows written under another format version are discarded on open."""
    with tempfile.TemporaryDirectory() as tmpdir:
        db_path = Path(tmpdir) / "test.db"
        cache = TableCache(str(db_path))
        p = FiniteDistribution.bernoulli(0.3)
        cache.put_table(p, 5, iid_type_table(p, 5))

        with sqlite3.connect(db_path) as conn:
            conn.execute("UPDATE meta SET value = ? WHERE key = 'format_version'", ("0",))

        reopened = TableCache(str(db_path))
        assert reopened.get_cache_stats()["tables"] == 0
        assert reopened.get_table(p, 5) is None
