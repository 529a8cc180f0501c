"""Generic log-domain message passing on sparse bipartite factor graphs.

A :class:`FactorGraph` couples function nodes (FNs, one per observation) to
variable nodes (VNs, one per data symbol with ``n_states`` values).  For FN
``f`` with neighbours ``(v_1 .. v_d)``, the signature table stores the complex
contribution of every neighbour state at that observation; signatures may be
scalar or short vectors (uniform length per FN).  The FN likelihood of a local
configuration ``(s_1 .. s_d)`` is

    metric_f(s) = -|| y_f - sum_n sig_f[n, s_n] ||^2 / nvar_f,

i.e. a Gaussian log-likelihood up to a constant.  ``nvar_f`` may vary per FN
(post-equalization noise enhancement) and an infinite value erases the FN
(its metric contributes nothing).

``log_mpa_decode`` runs flooding-schedule belief propagation: each round
updates all FN-to-VN messages from the current VN-to-FN messages, then all
VN-to-FN messages.  Combination uses exact log-sum-exp; ``max_log=True``
replaces it with a max (Max-Log approximation).  No damping is applied.
Messages start uniform, so the decode is deterministic given inputs.

``ml_oracle_decode`` enumerates every joint hypothesis and returns the exact
maximum-likelihood configuration together with exact per-VN marginals.  It is
the brute-force reference the iterative decoder is tested against, and shares
nothing with the message-passing path beyond the metric definition.

All entry points broadcast over leading batch dimensions in the observations
and signature tables; decoding keeps per-call state only, so one graph can be
shared by concurrent decodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

#: Enumeration guard for the brute-force oracle (total joint bits).
ML_ORACLE_MAX_BITS = 24


@dataclass(frozen=True)
class FactorGraph:
    """Bipartite graph plus per-FN signature tables.

    ``indicator``: (F, V) 0/1 adjacency.  ``signatures``: one array per FN of
    shape ``batch + (d_f, n_states)`` (scalar observations) or
    ``batch + (d_f, n_states, obs_dim)`` (vector observations); neighbour
    order is ascending VN index.
    """

    indicator: np.ndarray
    signatures: tuple
    n_states: int = 2
    fn_neighbors: tuple = field(init=False)
    vn_neighbors: tuple = field(init=False)

    def __post_init__(self):
        F = np.asarray(self.indicator)
        if F.ndim != 2:
            raise ValueError("indicator must be 2-D")
        fn_nb = tuple(tuple(np.flatnonzero(F[f]).tolist()) for f in range(F.shape[0]))
        vn_nb = tuple(tuple(np.flatnonzero(F[:, v]).tolist()) for v in range(F.shape[1]))
        if len(self.signatures) != F.shape[0]:
            raise ValueError("need one signature table per FN")
        for f, sig in enumerate(self.signatures):
            d = len(fn_nb[f])
            if sig.shape[-2:] != (d, self.n_states) and sig.shape[-3:-1] != (d, self.n_states):
                raise ValueError(f"FN {f}: signature table shape {sig.shape} "
                                 f"does not match degree {d} x {self.n_states}")
        object.__setattr__(self, "fn_neighbors", fn_nb)
        object.__setattr__(self, "vn_neighbors", vn_nb)

    @property
    def n_fns(self) -> int:
        return self.indicator.shape[0]

    @property
    def n_vns(self) -> int:
        return self.indicator.shape[1]

    def is_vector_fn(self, f: int) -> bool:
        return self.signatures[f].ndim >= 3 and self.signatures[f].shape[-2] == self.n_states

    def permuted_fns(self, order) -> "FactorGraph":
        """Same model with FNs relabelled by ``order`` (decode must not care)."""
        order = list(order)
        return FactorGraph(indicator=self.indicator[order],
                           signatures=tuple(self.signatures[f] for f in order),
                           n_states=self.n_states)


@dataclass(frozen=True)
class DecodeResult:
    """Per-VN state beliefs (log domain, normalized); LLRs/bits for binary VNs."""

    beliefs: np.ndarray
    llr: np.ndarray | None
    bits: np.ndarray | None


def _local_configs(degree: int, n_states: int) -> np.ndarray:
    idx = np.arange(n_states ** degree)
    return np.stack([(idx // n_states ** n) % n_states for n in range(degree)], axis=1)


def _per_fn_nvar(noise_var, n_fns: int):
    nv = noise_var
    if np.isscalar(nv) or (isinstance(nv, np.ndarray) and nv.ndim == 0):
        return [np.asarray(float(nv))] * n_fns
    if isinstance(nv, (list, tuple)):
        if len(nv) != n_fns:
            raise ValueError(f"need {n_fns} per-FN noise variances, got {len(nv)}")
        return [np.asarray(v, dtype=float) for v in nv]
    nv = np.asarray(nv, dtype=float)
    if nv.shape[-1] != n_fns:
        raise ValueError(f"per-FN noise variance last axis must be {n_fns}, got {nv.shape}")
    return [nv[..., f] for f in range(n_fns)]


def _as_obs_list(observations, graph: FactorGraph):
    if isinstance(observations, (list, tuple)):
        obs = [np.asarray(o) for o in observations]
        if len(obs) != graph.n_fns:
            raise ValueError(f"need {graph.n_fns} observations, got {len(obs)}")
    else:
        arr = np.asarray(observations)
        if arr.shape[-1] != graph.n_fns:
            raise ValueError(f"observation last axis must be {graph.n_fns}, got {arr.shape}")
        obs = [arr[..., f] for f in range(graph.n_fns)]
    for f, o in enumerate(obs):
        if not np.all(np.isfinite(o)):
            raise ValueError(f"non-finite observation at FN {f}")
    return obs


def fn_metrics(observations, graph: FactorGraph, noise_var) -> list:
    """Per-FN Gaussian log metrics over local configurations.

    Returns one array per FN of shape ``batch + (n_states ** d_f,)``.
    """
    obs = _as_obs_list(observations, graph)
    nvars = _per_fn_nvar(noise_var, graph.n_fns)
    metrics = []
    for f in range(graph.n_fns):
        sig = graph.signatures[f]
        cfg = _local_configs(len(graph.fn_neighbors[f]), graph.n_states)
        vector = graph.is_vector_fn(f)
        if vector:
            total = np.zeros(sig.shape[:-3] + (cfg.shape[0], sig.shape[-1]), dtype=complex)
            for n in range(cfg.shape[1]):
                total = total + sig[..., n, :, :][..., cfg[:, n], :]
            err = obs[f][..., None, :] - total
            sq = np.sum(np.abs(err) ** 2, axis=-1)
        else:
            total = np.zeros(sig.shape[:-2] + (cfg.shape[0],), dtype=complex)
            for n in range(cfg.shape[1]):
                total = total + sig[..., n, :][..., cfg[:, n]]
            sq = np.abs(obs[f][..., None] - total) ** 2
        nv = nvars[f]
        with np.errstate(divide="ignore", invalid="ignore"):
            m = -sq / np.asarray(nv)[..., None]
        if np.any(np.isinf(nv)):
            m = np.where(np.isinf(np.asarray(nv))[..., None], 0.0, m)
        metrics.append(m)
    return metrics


def log_mpa_decode(observations, graph: FactorGraph, noise_var, iters: int = 8,
                   max_log: bool = False) -> DecodeResult:
    """Flooding log-MPA; see module docstring for the update equations."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    metrics = fn_metrics(observations, graph, noise_var)
    M = graph.n_states
    batch = np.broadcast_shapes(*(m.shape[:-1] for m in metrics))
    reduce_ = (lambda a, axis: np.max(a, axis=axis)) if max_log else (lambda a, axis: logsumexp(a, axis=axis))

    cfgs, groups = [], []
    for f in range(graph.n_fns):
        d = len(graph.fn_neighbors[f])
        cfg = _local_configs(d, M)
        cfgs.append(cfg)
        # groups[f][n][s]: config indices whose n-th neighbour is in state s
        groups.append([[np.flatnonzero(cfg[:, n] == s) for s in range(M)] for n in range(d)])

    mu = [np.full(batch + (len(graph.fn_neighbors[f]), M), -np.log(M)) for f in range(graph.n_fns)]
    fn_msg = [np.zeros(batch + (len(graph.fn_neighbors[f]), M)) for f in range(graph.n_fns)]
    beliefs = np.zeros(batch + (graph.n_vns, M))

    for _ in range(iters):
        for f in range(graph.n_fns):
            cfg = cfgs[f]
            score = metrics[f] + 0.0
            for n in range(cfg.shape[1]):
                score = score + mu[f][..., n, cfg[:, n]]
            for n in range(cfg.shape[1]):
                for s in range(M):
                    sel = score[..., groups[f][n][s]] - mu[f][..., n, s][..., None]
                    fn_msg[f][..., n, s] = reduce_(sel, -1)
        beliefs = np.zeros(batch + (graph.n_vns, M))
        for f in range(graph.n_fns):
            for n, v in enumerate(graph.fn_neighbors[f]):
                beliefs[..., v, :] += fn_msg[f][..., n, :]
        for f in range(graph.n_fns):
            for n, v in enumerate(graph.fn_neighbors[f]):
                out = beliefs[..., v, :] - fn_msg[f][..., n, :]
                mu[f][..., n, :] = out - logsumexp(out, axis=-1, keepdims=True)

    beliefs = beliefs - logsumexp(beliefs, axis=-1, keepdims=True)
    if M == 2:
        llr = beliefs[..., 0] - beliefs[..., 1]
        bits = (llr < 0).astype(np.int8)  # ties decide state 0
        return DecodeResult(beliefs=beliefs, llr=llr, bits=bits)
    return DecodeResult(beliefs=beliefs, llr=None, bits=None)


@dataclass(frozen=True)
class OracleResult:
    """Exact joint-MAP states plus exact marginals from full enumeration."""

    map_states: np.ndarray
    beliefs: np.ndarray
    n_hypotheses: int

    @property
    def bits(self) -> np.ndarray:
        return self.map_states.astype(np.int8)

    @property
    def llr(self) -> np.ndarray:
        return self.beliefs[..., 0] - self.beliefs[..., 1]

    @property
    def marginal_states(self) -> np.ndarray:
        """Per-VN argmax of the exact marginals (ties decide the lower state)."""
        return np.argmax(self.beliefs, axis=-1).astype(np.int8)


def ml_oracle_decode(observations, graph: FactorGraph, noise_var) -> OracleResult:
    """Enumerate all joint hypotheses; exact argmax and exact marginals."""
    M, V = graph.n_states, graph.n_vns
    total_bits = V * int(np.ceil(np.log2(M)))
    if total_bits > ML_ORACLE_MAX_BITS:
        raise ValueError(f"oracle guard: {total_bits} joint bits exceeds {ML_ORACLE_MAX_BITS}")
    metrics = fn_metrics(observations, graph, noise_var)
    n_hyp = M ** V
    hyp = np.arange(n_hyp)
    states = np.stack([(hyp // M ** v) % M for v in range(V)], axis=1)  # (n_hyp, V)
    batch = np.broadcast_shapes(*(m.shape[:-1] for m in metrics))
    total = np.zeros(batch + (n_hyp,))
    for f in range(graph.n_fns):
        nb = graph.fn_neighbors[f]
        local = np.zeros(n_hyp, dtype=np.int64)
        for n, v in enumerate(nb):
            local += states[:, v] * M ** n
        total = total + metrics[f][..., local]
    best = np.argmax(total, axis=-1)
    map_states = np.stack([(best // M ** v) % M for v in range(V)], axis=-1).astype(np.int8)
    beliefs = np.empty(batch + (V, M))
    for v in range(V):
        for s in range(M):
            beliefs[..., v, s] = logsumexp(total[..., states[:, v] == s], axis=-1)
    beliefs = beliefs - logsumexp(beliefs, axis=-1, keepdims=True)
    return OracleResult(map_states=map_states, beliefs=beliefs, n_hypotheses=n_hyp)
