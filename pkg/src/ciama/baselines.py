"""Comparison schemes: STBC-SCMA, plain BIA with linear detection, and a
point-to-point Alamouti benchmark.

STBC-SCMA superposes one sparse codeword per user on each of the two transmit
antennas (x^j(n) = sum_k s_k^j(n)) and sends the per-tone pair through an
Alamouti block over two slots.  Writing the received pair as
(y(1), y*(2)) = G_j (x^j(1), x^j(2)) + noise with

    G_j = [ h^j(1)   h^j(2)
            h^j(2)*  -h^j(1)* ],

G_j^H G_j = (|h^j(1)|^2 + |h^j(2)|^2) I, so matched combining decouples the
streams (two-stage decoder: combine, then one channel-free log-MPA per
stream with the combining-scaled noise figure).  The joint decoder feeds the
raw per-tone pairs into the same clustered virtual-graph MPA as the CIAMA
chain, with G_j as the per-tone equivalent channel.

Plain BIA carries independent QPSK symbols per antenna stream and tone; after
interference cancellation the equivalent 2 x 2 channel is inverted (ZF) or
regularised (MMSE).  The point-to-point benchmark sends QPSK pairs through a
single-user 2 x 1 Alamouti link per tone.
"""

from __future__ import annotations

import numpy as np

from . import bia
from .channel import ChannelRealization
from .scma import Codebook, scma_encode
from .transceiver import (base_factor_graph, build_virtual_graph, decode_joint_mpa,
                          zf_detect)
from .mpa import log_mpa_decode


def alamouti_encode(x1, x2) -> np.ndarray:
    """Alamouti block, shape ``batch + (2 antennas, 2 slots)``.

    Slot 1 sends (x1, x2); slot 2 sends (-x2*, x1*).
    """
    x1 = np.asarray(x1)
    x2 = np.asarray(x2)
    slot1 = np.stack([x1, x2], axis=-1)
    slot2 = np.stack([-np.conj(x2), np.conj(x1)], axis=-1)
    return np.stack([slot1, slot2], axis=-1)


def alamouti_effective_channel(h: np.ndarray) -> np.ndarray:
    """G matrix of the combined two-slot system; ``h``: ``batch + (2,)``."""
    h1, h2 = h[..., 0], h[..., 1]
    row1 = np.stack([h1, h2], axis=-1)
    row2 = np.stack([np.conj(h2), -np.conj(h1)], axis=-1)
    return np.stack([row1, row2], axis=-2)


def qpsk_mod(bits: np.ndarray, energy: float = 1.0) -> np.ndarray:
    """Gray QPSK: bit pair (b0, b1) -> sqrt(E/2) ((1-2 b0) + 1j (1-2 b1))."""
    bits = np.asarray(bits)
    if bits.shape[-1] != 2:
        raise ValueError("last axis must hold 2 bits")
    return np.sqrt(energy / 2) * ((1 - 2 * bits[..., 0]) + 1j * (1 - 2 * bits[..., 1]))


def qpsk_demod(symbols: np.ndarray) -> np.ndarray:
    """Hard slicing back to bit pairs (ties decide bit 0)."""
    s = np.asarray(symbols)
    return np.stack([(s.real < 0), (s.imag < 0)], axis=-1).astype(np.int8)


def _stbc_tone_channels(channels, user: int) -> np.ndarray:
    """Per-tone 1 x 2 transmit-antenna rows for one 1-based user: (..., J, 2)."""
    h = channels.h if isinstance(channels, ChannelRealization) else np.asarray(channels)
    return h[..., user - 1, :, 0, :]


def stbc_scma_transmit(bits, codebook: Codebook, amplitude: float = 1.0) -> np.ndarray:
    """Superposed per-antenna codewords as Alamouti blocks: ``batch + (J, 2, 2)``.

    ``bits``: ``batch + (K, 2)``, one bit per user per antenna stream.
    """
    bits = np.asarray(bits)
    x = scma_encode(np.moveaxis(bits, -1, -2), codebook) * amplitude  # (..., 2, J)
    return alamouti_encode(x[..., 0, :], x[..., 1, :])                # (..., J, 2, 2)


def stbc_scma_link(bits, channels, n0: float, decoder: str = "two-stage",
                   codebook: Codebook | None = None, user: int = 1,
                   amplitude: float = 1.0, iters: int = 8, noise: np.ndarray | None = None,
                   max_log: bool = False) -> np.ndarray:
    """One STBC-SCMA block pair seen by ``user``; returns bits ``batch + (K, 2)``.

    ``noise``: optional pre-drawn samples ``batch + (J, 2)`` (slot-1 sample and
    the slot-2 sample that gets conjugated by the combiner input); omit for a
    noiseless pass.
    """
    from .scma import build_default_codebooks

    cb = codebook or build_default_codebooks()
    bits = np.asarray(bits)
    tx = stbc_scma_transmit(bits, cb, amplitude)           # (..., J, ant, slot)
    h = _stbc_tone_channels(channels, user)                # (..., J, 2)
    y1 = np.einsum("...ja,...ja->...j", h, tx[..., 0])
    y2 = np.einsum("...ja,...ja->...j", h, tx[..., 1])
    if noise is not None:
        y1 = y1 + noise[..., 0]
        y2 = y2 + noise[..., 1]
    y = np.stack([y1, np.conj(y2)], axis=-1)               # (..., J, 2)
    g_eff = alamouti_effective_channel(h)                  # (..., J, 2, 2)

    if decoder == "joint-mpa":
        vg = build_virtual_graph(g_eff, cb)
        out = decode_joint_mpa(y, vg, n0, iters=iters, amplitude=amplitude,
                               max_log=max_log)            # (..., 2, L)
        return np.moveaxis(out, -2, -1)                    # (..., K, 2)
    if decoder != "two-stage":
        raise ValueError(f"unknown STBC-SCMA decoder {decoder!r}")

    gain = np.sum(np.abs(h) ** 2, axis=-1)                 # (..., J)
    combined = np.einsum("...jrc,...jr->...jc", g_eff.conj(), y)
    x_hat = combined / (gain[..., None] * amplitude)
    nvar_fn = n0 / (gain * amplitude ** 2)                 # per-tone, per stream
    graph = base_factor_graph(cb)
    decided = []
    for stream in range(2):
        res = log_mpa_decode(x_hat[..., stream], graph, nvar_fn, iters=iters, max_log=max_log)
        decided.append(res.bits)
    return np.stack(decided, axis=-1)                      # (..., K, 2)


def bia_only_link(bits, channels, n0: float, detector: str = "zf", user: int = 1,
                  energy: float = 1.0, noise: np.ndarray | None = None) -> np.ndarray:
    """Plain-BIA QPSK link for one user.

    ``bits``: ``batch + (K, J, 2 streams, 2 bits)``; returns this user's
    decisions ``batch + (J, 2, 2)``.  ``noise``: optional ``batch + (K, J, T)``.
    """
    bits = np.asarray(bits)
    K = bits.shape[-4]
    x = qpsk_mod(bits, energy)                   # (..., K, J, 2)
    tx = bia.bia_transmit(x)
    sched = bia.supersymbol_schedule(K)
    y = bia.receive(tx, channels, sched, noise)  # (..., K, J, T)
    p = bia.ic_matrix(user, K)
    y_hat = bia.apply_ic(y[..., user - 1, :, :], p)
    h_eff = bia.user_effective_channels(channels, user, K)
    if detector == "zf":
        x_hat, _ = zf_detect(y_hat, h_eff)
    elif detector == "mmse":
        hh = np.einsum("...cr,...cs->...rs", h_eff.conj(), h_eff)
        reg = hh + (n0 / energy) * np.eye(2)
        x_hat = np.linalg.solve(reg, np.einsum("...cr,...c->...r", h_eff.conj(), y_hat)[..., None])[..., 0]
    else:
        raise ValueError(f"unknown BIA detector {detector!r}")
    return qpsk_demod(x_hat)


def p2p_alamouti_link(bits, channel, n0: float, energy: float = 1.0,
                      noise: np.ndarray | None = None) -> np.ndarray:
    """Point-to-point 2 x 1 Alamouti with QPSK; matched combining then slicing.

    ``bits``: ``batch + (..., 2 symbols, 2 bits)``; ``channel``: matching
    ``batch + (..., 2)`` transmit-antenna rows; ``noise``: optional matching
    ``batch + (..., 2 slots)``.  Combining gain is |h1|^2 + |h2|^2 per symbol.
    """
    bits = np.asarray(bits)
    h = np.asarray(channel)
    x = qpsk_mod(bits, energy)                   # (..., 2)
    blk = alamouti_encode(x[..., 0], x[..., 1])  # (..., 2 ant, 2 slot)
    y1 = np.einsum("...a,...a->...", h, blk[..., 0])
    y2 = np.einsum("...a,...a->...", h, blk[..., 1])
    if noise is not None:
        y1 = y1 + noise[..., 0]
        y2 = y2 + noise[..., 1]
    g = alamouti_effective_channel(h)
    y = np.stack([y1, np.conj(y2)], axis=-1)
    combined = np.einsum("...rc,...r->...c", g.conj(), y)
    gain = np.sum(np.abs(h) ** 2, axis=-1)
    return qpsk_demod(combined / gain[..., None])
