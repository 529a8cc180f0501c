"""Blind interference alignment over reconfigurable-antenna mode switching.

Transmission spans a block of T = K + 1 slots per tone.  Slot 1 superposes all
K users' symbol vectors; slot k + 1 repeats user k's vector alone.  Each
receiver holds its antenna in mode 1 except during its own repeat slot, where
it switches to mode 2, so the two looks at its symbol arrive through
independent channel states while every interferer is seen twice through the
same mode-1 channel and can be cancelled without any transmitter channel
knowledge.

The cancellation is the 2 x T projector P_k: row 2 picks the repeat slot, and
row 1 forms (1/sqrt(K)) * (slot1 - sum of the other users' repeat slots),
which strips all interference and leaves the scaled mode-1 look.  With
K = 6 users,

    P_1 = [ 1/sqrt(6), 0, -1/sqrt(6), -1/sqrt(6), -1/sqrt(6), -1/sqrt(6), -1/sqrt(6)
            0,         1,  0,          0,          0,          0,          0        ].

After projection the per-tone model is y_hat = H_k^j x_k^j + z_hat with the
equivalent 2 x 2 channel of rows (1/sqrt(K)) h_k^j(1) and h_k^j(2), and z_hat
white with the original per-sample noise power (row 1 mixes K unit-variance
slots scaled by 1/sqrt(K); row 2 is untouched; disjoint slots keep the rows
uncorrelated).
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelRealization


def supersymbol_schedule(n_users: int, n_modes: int = 2) -> np.ndarray:
    """Mode table, shape (K, K + 1): user k sits in mode 2 only at slot k + 1.

    Only the two-mode construction is supported; other mode counts need a
    different slot pattern and are rejected.
    """
    if n_modes != 2:
        raise ValueError("schedule construction requires exactly 2 antenna modes")
    if n_users < 1:
        raise ValueError("need at least one user")
    sched = np.ones((n_users, n_users + 1), dtype=np.int8)
    for k in range(n_users):
        sched[k, k + 1] = 2
    return sched


def ic_matrix(user: int, n_users: int) -> np.ndarray:
    """Interference-cancellation projector P_k (2 x (K + 1)); ``user`` is 1-based."""
    if not 1 <= user <= n_users:
        raise ValueError(f"user must be in 1..{n_users}, got {user}")
    T = n_users + 1
    p = np.zeros((2, T))
    scale = 1.0 / np.sqrt(n_users)
    p[0, 0] = scale
    p[0, 1:] = -scale
    p[0, user] = 0.0
    p[1, user] = 1.0
    return p


def bia_transmit(x: np.ndarray) -> np.ndarray:
    """Slot-extend per-tone user vectors.

    ``x``: shape ``batch + (K, J, n_tx)``.  Returns ``batch + (J, K + 1, n_tx)``
    with slot 1 = sum over users and slot k + 1 = user k's vector.
    """
    x = np.asarray(x)
    if x.ndim < 3:
        raise ValueError("x must have shape (..., K, J, n_tx)")
    K = x.shape[-3]
    slot1 = x.sum(axis=-3)[..., :, None, :]
    rest = np.moveaxis(x, -3, -2)  # (..., J, K, n_tx)
    return np.concatenate([slot1, rest], axis=-2)


def receive(tx: np.ndarray, channels: ChannelRealization | np.ndarray,
            schedule: np.ndarray, noise: np.ndarray | None = None) -> np.ndarray:
    """Per-user received scalars over the supersymbol.

    ``tx``: ``batch + (J, T, n_tx)``; ``channels``: ChannelRealization or raw
    ``batch + (K, J, n_modes, n_tx)`` array; returns ``batch + (K, J, T)`` with
    y_k^j(t) = h_k^j(mode(k, t)) . tx^j(t) (+ noise).
    """
    h = channels.h if isinstance(channels, ChannelRealization) else np.asarray(channels)
    K, T = schedule.shape
    if h.shape[-4] != K or tx.shape[-2] != T:
        raise ValueError("schedule, channels and transmit block disagree on K or T")
    mode_idx = (schedule - 1).astype(int)  # (K, T)
    out = np.empty(np.broadcast_shapes(h.shape[:-4], tx.shape[:-3]) + (K, h.shape[-3], T), dtype=complex)
    for k in range(K):
        hk = np.take(h[..., k, :, :, :], mode_idx[k], axis=-2)  # (..., J, T, n_tx)
        out[..., k, :, :] = np.einsum("...jtn,...jtn->...jt", hk, tx)
    if noise is not None:
        out = out + noise
    return out


def apply_ic(y: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Project 7-slot tone vectors: ``batch + (J, T)`` -> ``batch + (J, 2)``."""
    y = np.asarray(y)
    if y.shape[-1] != p.shape[1]:
        raise ValueError(f"y last axis must be {p.shape[1]}, got {y.shape[-1]}")
    return np.einsum("st,...jt->...js", p, y)


def effective_channel(h_mode1: np.ndarray, h_mode2: np.ndarray, n_users: int = 6) -> np.ndarray:
    """Equivalent 2 x 2 matrix: rows (1/sqrt(K)) h(1) and h(2).

    Accepts leading batch dimensions on both mode rows.
    """
    h1 = np.asarray(h_mode1)
    h2 = np.asarray(h_mode2)
    if h1.shape != h2.shape:
        raise ValueError("mode rows must have matching shapes")
    return np.stack([h1 / np.sqrt(n_users), h2], axis=-2)


def user_effective_channels(channels: ChannelRealization | np.ndarray, user: int,
                            n_users: int | None = None) -> np.ndarray:
    """Stack the per-tone equivalent channels for one 1-based user: (..., J, 2, 2)."""
    h = channels.h if isinstance(channels, ChannelRealization) else np.asarray(channels)
    if n_users is None:
        n_users = h.shape[-4]
    return effective_channel(h[..., user - 1, :, 0, :], h[..., user - 1, :, 1, :], n_users)
