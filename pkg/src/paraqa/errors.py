"""Shared exception base for the package.

Module-specific failures subclass ParaqaError next to the code that
raises them; only truly cross-cutting errors live here.
"""

from __future__ import annotations


class ParaqaError(Exception):
    """Base class for all errors raised by this package."""


class UnknownUid(ParaqaError):
    """A uid was referenced that does not exist in the corpus at hand."""

    def __init__(self, uids: object) -> None:
        self.uids = list(uids) if not isinstance(uids, str) else [uids]
        super().__init__(f"unknown uid(s): {', '.join(map(str, self.uids))}")
