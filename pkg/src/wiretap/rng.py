"""Counter-based deterministic random streams.

Every randomized routine in this package draws from a stream keyed by
(master_seed, stream_id).  Streams built from the same key always produce
the same output, independent of scheduling or worker count, so parallel
trials stay reproducible as long as each logical unit of work owns its
own stream_id.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "substreams"]


def stream(master_seed: int, stream_id: int = 0) -> np.random.Generator:
    """Return a Philox-backed generator keyed by (master_seed, stream_id).

    Philox is counter-based: identical keys give bit-identical output
    regardless of how many other streams exist or in what order they are
    consumed.  Streams must never be shared between logical threads of
    work.
    """
    if master_seed < 0 or stream_id < 0:
        raise ValueError("seed and stream_id must be non-negative")
    bg = np.random.Philox(key=np.array([master_seed, stream_id], dtype=np.uint64))
    return np.random.Generator(bg)


def substreams(master_seed: int, count: int, base: int = 0) -> list[np.random.Generator]:
    """Independent streams for `count` parallel units of work."""
    return [stream(master_seed, base + i) for i in range(count)]
