"""Report timestamps, with a fixed-clock mode for reproducible output."""

from __future__ import annotations

import os
from datetime import datetime, timezone

FIXED_CLOCK_ENV = "MLCERT_FIXED_CLOCK"


def now_iso(fixed: str | None = None) -> str:
    """UTC now, or ``fixed`` / ``$MLCERT_FIXED_CLOCK`` verbatim when set."""
    fixed = fixed or os.environ.get(FIXED_CLOCK_ENV)
    if fixed:
        datetime.fromisoformat(fixed[:-1] + "+00:00" if fixed.endswith(("Z", "z")) else fixed)
        return fixed
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()
