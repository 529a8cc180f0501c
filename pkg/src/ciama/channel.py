"""Composite channel model: quasi-static Rayleigh fading plus bounded path loss.

Every receiver carries a reconfigurable antenna with ``n_modes`` switchable
modes; each (user, tone, mode) presents an independent 1 x n_tx row vector

    h_k^j(m) = g_k^j(m) / sqrt(D(d_k)),

where g has i.i.d. unit-variance circularly-symmetric complex Gaussian
entries and D is the saturated power-law path loss (D(d) = d^alpha for
d > r0, else r0^alpha, so D stays bounded near the transmitter).

Randomness policy: all draws go through numpy's PCG64 ``Generator``.  Stream
splitting is deterministic: ``stream_rng(master_seed, *path)`` builds a
``SeedSequence`` from the integer tuple ``(master_seed, *path)``, so e.g. the
per-trial generator of Monte Carlo trial ``i`` at sweep point ``p`` is
``stream_rng(seed, p, i)``.  Gaussians come from ``Generator.standard_normal``
(numpy's ziggurat), fixed here so serialized dumps stay stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PathLossParams:
    """Saturated power-law path loss; ``alpha`` exponent, ``r0`` knee distance."""

    alpha: float = 3.0
    r0: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.r0 <= 0:
            raise ValueError(f"r0 must be > 0, got {self.r0}")


@dataclass(frozen=True)
class NoiseSpec:
    """AWGN power per complex sample (total over both quadratures)."""

    n0: float

    def __post_init__(self):
        if self.n0 <= 0:
            raise ValueError(f"n0 must be > 0, got {self.n0}")


@dataclass(frozen=True)
class ChannelRealization:
    """One fading draw for all users, tones and antenna modes.

    ``h`` and ``g`` have shape (K, J, n_modes, n_tx); ``h = g / sqrt(D(d_k))``.
    Instances are immutable and safe to share across trial workers.
    """

    h: np.ndarray
    g: np.ndarray
    d: np.ndarray
    params: PathLossParams

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    @property
    def n_tones(self) -> int:
        return self.h.shape[1]

    @property
    def n_modes(self) -> int:
        return self.h.shape[2]

    @property
    def n_tx(self) -> int:
        return self.h.shape[3]


def path_loss(d, params: PathLossParams = PathLossParams()):
    """Attenuation D(d) = d^alpha for d > r0, r0^alpha otherwise (continuous at r0)."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    out = np.where(d > params.r0, d ** params.alpha, params.r0 ** params.alpha)
    return out if out.ndim else float(out)


def stream_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Deterministic child generator for the sub-stream identified by ``path``."""
    return np.random.default_rng(np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def complex_gaussian(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian array, E|z|^2 = var."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z * np.sqrt(var / 2.0)


def draw_channels(seed, n_users: int, n_tones: int, n_tx: int, d=None,
                  params: PathLossParams = PathLossParams()) -> ChannelRealization:
    """Draw one ChannelRealization.

    ``seed`` is an integer or an existing Generator.  ``d`` gives per-user
    distances (default: everyone at r0, i.e. D = 1 and ``h == g``).  The number
    of antenna modes per user equals ``n_tx``.
    """
    if min(n_users, n_tones, n_tx) < 1:
        raise ValueError("n_users, n_tones and n_tx must all be >= 1")
    rng = _as_rng(seed)
    if d is None:
        d = np.full(n_users, params.r0, dtype=float)
    d = np.asarray(d, dtype=float)
    if d.shape != (n_users,):
        raise ValueError(f"d must have shape ({n_users},), got {d.shape}")
    g = complex_gaussian(rng, (n_users, n_tones, n_tx, n_tx))
    att = np.sqrt(path_loss(d, params))
    h = g / att[:, None, None, None]
    return ChannelRealization(h=h, g=g, d=d, params=params)


def draw_awgn(seed, n: int, spec: NoiseSpec) -> np.ndarray:
    """``n`` i.i.d. complex noise samples with per-sample variance ``spec.n0``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _as_rng(seed)
    return complex_gaussian(rng, (n,), spec.n0)


def dump_channels_csv(realization: ChannelRealization, path) -> None:
    """Debug dump, row-major over (user, tone, mode, tx): one CSV row per entry."""
    with open(path, "w") as fh:
        fh.write("user,tone,mode,tx,re_h,im_h,re_g,im_g,d\n")
        K, J, M, N = realization.h.shape
        for k in range(K):
            for j in range(J):
                for m in range(M):
                    for n in range(N):
                        hv = realization.h[k, j, m, n]
                        gv = realization.g[k, j, m, n]
                        fh.write(f"{k + 1},{j + 1},{m + 1},{n + 1},"
                                 f"{float(hv.real)!r},{float(hv.imag)!r},"
                                 f"{float(gv.real)!r},{float(gv.imag)!r},"
                                 f"{float(realization.d[k])!r}\n")
