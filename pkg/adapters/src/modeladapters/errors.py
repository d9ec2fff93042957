from __future__ import annotations

__all__ = ["AdapterError", "UnknownPivot"]


class AdapterError(Exception):
    """Base for everything this package raises on purpose."""


class UnknownPivot(AdapterError):
    """Pivot language without a pinned model pair."""
