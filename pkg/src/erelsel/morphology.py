"""Disk structuring element and binary dilation with canvas clipping."""

from __future__ import annotations

import numpy as np

from .errors import InputError

DEFAULT_DILATE_RADIUS = 6


def disk(radius: int) -> np.ndarray:
    """Offsets ``(drow, dcol)`` with ``drow**2 + dcol**2 <= radius**2``.

    Returned as an ``(K, 2)`` integer array in row-major order.
    """
    if radius < 0:
        raise InputError(f"disk radius must be non-negative, got {radius}")
    r = int(radius)
    dr, dc = np.mgrid[-r : r + 1, -r : r + 1]
    keep = dr**2 + dc**2 <= r * r
    return np.stack([dr[keep], dc[keep]], axis=1)


def dilate(mask: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Binary dilation: output ``(r, c)`` is set iff some offset ``(dr, dc)``
    has ``(r - dr, c - dc)`` set in ``mask``. Nothing wraps; pixels pushed
    off the canvas are dropped.
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    out = np.zeros_like(mask)
    if not mask.any():
        return out
    # crop to the occupied box so large canvases stay cheap
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    r0, r1, c0, c1 = rows[0], rows[-1] + 1, cols[0], cols[-1] + 1
    src = mask[r0:r1, c0:c1]
    for dr, dc in np.asarray(offsets, dtype=int).reshape(-1, 2):
        tr0, tr1 = r0 + dr, r1 + dr
        tc0, tc1 = c0 + dc, c1 + dc
        # clip destination window, shift source window by the same amount
        sr0, sr1 = max(0, -tr0), (r1 - r0) - max(0, tr1 - h)
        sc0, sc1 = max(0, -tc0), (c1 - c0) - max(0, tc1 - w)
        if sr0 >= sr1 or sc0 >= sc1:
            continue
        out[tr0 + sr0 : tr0 + sr1, tc0 + sc0 : tc0 + sc1] |= src[sr0:sr1, sc0:sc1]
    return out
