"""Wall clock indirection so tests can pin timestamps deterministically."""

from __future__ import annotations

from datetime import datetime, timezone


def now() -> datetime:
    """Current UTC time; tests monkeypatch this module attribute."""
    return datetime.now(timezone.utc)
