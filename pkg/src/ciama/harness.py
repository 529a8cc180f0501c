"""Seeded Monte Carlo BER sweeps over schemes and decoders, with CSV output.

Energy convention: the noise floor is fixed at N_0 = 1 and the per-bit energy
E_b = 10^(dB/10) follows the sweep grid, so bounds and simulation share the
axis.  Scheme amplitudes are set so one payload bit carries E_b:

  ciama       sqrt(E_b / 2) per codeword  ->  E||x_k^j||^2 = (3/2) E_b
  stbc-scma   sqrt(E_b / 2) per codeword  ->  12 bits per 24 E_b block pair
  bia         QPSK symbol energy E_b      ->  16 bits per 16 E_b supersymbol
  p2p         QPSK symbol energy E_b      ->   4 bits per  4 E_b Alamouti block

Reproducibility: Monte Carlo trial ``i`` of sweep point ``p`` owns the
generator ``stream_rng(seed, p, i)`` and draws, in order: the channel
Gaussians, the payload bits, the noise block.  Trials are therefore
independent of batching and worker count; aggregation sums batch results in
batch-index order.  ``noiseless=True`` skips the noise draw's use (the draw
protocol is unchanged) and hands the decoders a 10^-6 pseudo noise figure.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import baselines, bia, transceiver
from .channel import PathLossParams, complex_gaussian, path_loss, stream_rng
from .scma import Codebook, build_default_codebooks

#: Fixed noise power per complex sample.
NOISE_POWER = 1.0
#: Trials per work unit; fixed so results never depend on worker count.
BATCH_TRIALS = 500
#: Normalized decoder noise figure used for noiseless sanity runs.
NOISELESS_NVAR = 1e-6

SCHEME_DECODERS = {
    "ciama": ("two-stage", "joint-mpa"),
    "stbc-scma": ("two-stage", "joint-mpa"),
    "bia": ("zf", "mmse"),
    "p2p-alamouti": ("ml",),
}


class ConfigError(ValueError):
    """Invalid simulation configuration (CLI exit code 2)."""


@dataclass
class SimConfig:
    scheme: str = "ciama"
    decoder: str = "joint-mpa"
    ebn0_db: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)
    trials: int = 200_000
    seed: int = 1
    iters: int = 8
    faithful: bool = False
    noiseless: bool = False
    max_log: bool = False
    workers: int = 1
    n_users: int = 6
    n_tones: int = 4
    n_tx: int = 2
    n_layers: int = 6
    distances: tuple | None = None
    alpha: float = 3.0
    r0: float = 1.0
    all_users: bool = False
    stop_after_errors: int | None = None
    codebook_file: str | None = None
    out: str | None = None

    def validate(self) -> None:
        if self.scheme not in SCHEME_DECODERS:
            raise ConfigError(f"unknown scheme {self.scheme!r}; valid: {valid_matrix()}")
        if self.decoder not in SCHEME_DECODERS[self.scheme]:
            raise ConfigError(f"decoder {self.decoder!r} not valid for scheme "
                              f"{self.scheme!r}; valid: {valid_matrix()}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.iters < 1:
            raise ConfigError("iters must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        grid = tuple(float(x) for x in self.ebn0_db)
        if len(grid) == 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("ebn0_db grid must be non-empty and strictly increasing")
        if self.distances is not None and len(self.distances) != self.n_users:
            raise ConfigError(f"need {self.n_users} distances")
        if (self.n_users, self.n_tones, self.n_tx, self.n_layers) != (6, 4, 2, 6):
            # the default frame geometry is the only one wired end to end
            raise ConfigError("only the 6-user, 4-tone, 2-antenna, 6-layer geometry is supported")

    def path_loss_params(self) -> PathLossParams:
        return PathLossParams(alpha=self.alpha, r0=self.r0)


def valid_matrix() -> str:
    return "; ".join(f"{s}: {', '.join(d)}" for s, d in SCHEME_DECODERS.items())


@dataclass(frozen=True)
class BerRecord:
    scheme: str
    decoder: str
    ebn0_db: float
    trials: int
    bit_errors: int
    ber: float
    stderr: float
    seed: int
    wall_ms: float


def estimate_ber(errors: int, bits: int) -> tuple:
    """Binomial point estimate and standard error."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    ber = errors / bits
    return ber, float(np.sqrt(ber * (1.0 - ber) / bits))


def _trial_rngs(seed: int, point: int, start: int, count: int) -> list:
    return [stream_rng(seed, point, start + i) for i in range(count)]


def _stack_draws(rngs, draw) -> np.ndarray:
    return np.stack([draw(r) for r in rngs])


def _channel_h(rngs, cfg: SimConfig) -> np.ndarray:
    K, J, N = cfg.n_users, cfg.n_tones, cfg.n_tx
    g = _stack_draws(rngs, lambda r: complex_gaussian(r, (K, J, N, N)))
    if cfg.distances is None:
        return g
    att = np.sqrt(path_loss(np.asarray(cfg.distances, float), cfg.path_loss_params()))
    return g / att[:, None, None, None]


def _decode_users(cfg: SimConfig) -> list:
    return list(range(1, cfg.n_users + 1)) if cfg.all_users else [1]


def _run_batch(cfg: SimConfig, point: int, ebn0_db: float, start: int, count: int) -> tuple:
    """Simulate one batch of trials; returns (bit_errors, bits_counted)."""
    rngs = _trial_rngs(cfg.seed, point, start, count)
    K, J, N, L = cfg.n_users, cfg.n_tones, cfg.n_tx, cfg.n_layers
    T = K + 1
    eb = 10.0 ** (ebn0_db / 10.0) * NOISE_POWER
    cb = _load_codebook(cfg)
    h = _channel_h(rngs, cfg)
    errors = 0
    bits_counted = 0

    if cfg.scheme in ("ciama", "stbc-scma"):
        amp = np.sqrt(eb / 2.0)
        nvar = NOISELESS_NVAR * amp ** 2 if cfg.noiseless else NOISE_POWER
        if cfg.scheme == "ciama":
            payload = _stack_draws(rngs, lambda r: r.integers(0, 2, (K, N, L)))
            noise = _stack_draws(rngs, lambda r: complex_gaussian(r, (K, J, T), NOISE_POWER))
            frame = transceiver.ciama_encode(payload, cb, amplitude=amp)
            sched = bia.supersymbol_schedule(K)
            y_clean = bia.receive(frame.tx, h, sched)
            y = y_clean if cfg.noiseless else y_clean + noise
            for u in _decode_users(cfg):
                if cfg.decoder == "two-stage":
                    dec = transceiver.decode_two_stage(
                        y[:, u - 1], h, u, cb, nvar, iters=cfg.iters, amplitude=amp,
                        faithful=cfg.faithful, max_log=cfg.max_log)
                else:
                    p = bia.ic_matrix(u, K)
                    y_hat = bia.apply_ic(y[:, u - 1], p)
                    h_eff = bia.user_effective_channels(h, u, K)
                    vg = transceiver.build_virtual_graph(h_eff, cb)
                    dec = transceiver.decode_joint_mpa(
                        y_hat, vg, nvar, iters=cfg.iters, amplitude=amp, max_log=cfg.max_log)
                errors += int(np.sum(dec != payload[:, u - 1]))
                bits_counted += dec.size
        else:
            payload = _stack_draws(rngs, lambda r: r.integers(0, 2, (K, N)))
            noise = _stack_draws(rngs, lambda r: complex_gaussian(r, (K, J, 2), NOISE_POWER))
            for u in _decode_users(cfg):
                dec = baselines.stbc_scma_link(
                    payload, h, nvar, decoder=cfg.decoder, codebook=cb, user=u,
                    amplitude=amp, iters=cfg.iters, max_log=cfg.max_log,
                    noise=None if cfg.noiseless else noise[:, u - 1])
                errors += int(np.sum(dec[..., u - 1, :] != payload[:, u - 1]))
                bits_counted += count * N
    elif cfg.scheme == "bia":
        nvar = NOISELESS_NVAR * eb if cfg.noiseless else NOISE_POWER
        payload = _stack_draws(rngs, lambda r: r.integers(0, 2, (K, J, N, 2)))
        noise = _stack_draws(rngs, lambda r: complex_gaussian(r, (K, J, T), NOISE_POWER))
        for u in _decode_users(cfg):
            dec = baselines.bia_only_link(
                payload, h, nvar, detector=cfg.decoder, user=u, energy=eb,
                noise=None if cfg.noiseless else noise)
            errors += int(np.sum(dec != payload[:, u - 1]))
            bits_counted += dec.size
    elif cfg.scheme == "p2p-alamouti":
        payload = _stack_draws(rngs, lambda r: r.integers(0, 2, (J, 2, 2)))
        noise = _stack_draws(rngs, lambda r: complex_gaussian(r, (J, 2), NOISE_POWER))
        chan = h[:, 0, :, 0, :]     # user 1, mode-1 transmit rows per tone
        dec = baselines.p2p_alamouti_link(
            payload, chan, NOISE_POWER, energy=eb,
            noise=None if cfg.noiseless else noise)
        errors += int(np.sum(dec != payload))
        bits_counted += dec.size
    else:  # pragma: no cover - validate() guards this
        raise ConfigError(f"unknown scheme {cfg.scheme!r}")
    return errors, bits_counted


_CODEBOOK_CACHE: dict = {}


def _load_codebook(cfg: SimConfig) -> Codebook:
    key = cfg.codebook_file
    if key not in _CODEBOOK_CACHE:
        if key is None:
            _CODEBOOK_CACHE[key] = build_default_codebooks()
        else:
            from .scma import load_codebook
            _CODEBOOK_CACHE[key] = load_codebook(key)
    return _CODEBOOK_CACHE[key]


def _batch_args(cfg: SimConfig, point: int, db: float) -> list:
    starts = range(0, cfg.trials, BATCH_TRIALS)
    return [(cfg, point, db, s, min(BATCH_TRIALS, cfg.trials - s)) for s in starts]


def _worker(args) -> tuple:
    return _run_batch(*args)


def run_sweep(cfg: SimConfig) -> list:
    """Run the configured sweep; one BerRecord per grid point, in grid order."""
    cfg.validate()
    records = []
    for point, db in enumerate(float(x) for x in cfg.ebn0_db):
        t0 = time.perf_counter()
        errors = 0
        bits = 0
        trials_done = 0
        args = _batch_args(cfg, point, db)
        if cfg.workers == 1:
            results = map(_worker, args)
        else:
            pool = get_context("fork").Pool(cfg.workers)
            results = pool.imap(_worker, args)
        try:
            for (spec, res) in zip(args, results):
                errors += res[0]
                bits += res[1]
                trials_done += spec[4]
                if cfg.stop_after_errors is not None and errors >= cfg.stop_after_errors:
                    break
        finally:
            if cfg.workers > 1:
                pool.terminate()
                pool.join()
        ber, stderr = estimate_ber(errors, bits)
        records.append(BerRecord(
            scheme=cfg.scheme, decoder=cfg.decoder, ebn0_db=db, trials=trials_done,
            bit_errors=errors, ber=ber, stderr=stderr, seed=cfg.seed,
            wall_ms=(time.perf_counter() - t0) * 1e3))
    return records


CSV_HEADER = "scheme,decoder,ebn0_db,trials,bit_errors,ber,stderr,seed"


def format_csv(records) -> str:
    """Exact CSV schema shared with the plotting front end (wall time excluded)."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(f"{r.scheme},{r.decoder},{r.ebn0_db!r},{r.trials},"
                     f"{r.bit_errors},{r.ber!r},{r.stderr!r},{r.seed}")
    return "\n".join(lines) + "\n"


def write_csv(records, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_csv(records))
