"""Sparse-code layer: indicator structure, codebooks, encoding, codebook file I/O.

The default design spreads L = 6 one-bit layers over J = 4 tones.  Layer i
occupies the two tones marked in column i of the indicator matrix and maps its
bit to phase-rotated BPSK on both tones:

    c_i(b)[p] = (1 / sqrt(2)) * (1 - 2 b) * exp(1j * (i - 1) * pi / 7),  p in supp(i).

The rotation step pi/7 keeps, on every tone, the three resident layers
pairwise distinct modulo pi and free of +/-1-weighted triple cancellations,
which makes every superposition of layer differences visible on both tones of
each flipped layer.  That property is what gives the scheme its full
pairwise-difference support (and hence its diversity order); see
``analysis.diversity_order``.  Any other design with matching support and unit
energies can be loaded from a plain-text file instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Rotation step between consecutive layers (radians).
PHASE_STEP = np.pi / 7

_DEFAULT_INDICATOR = np.array([
    [1, 1, 1, 0, 0, 0],
    [1, 0, 0, 1, 1, 0],
    [0, 1, 0, 1, 0, 1],
    [0, 0, 1, 0, 1, 1],
], dtype=np.int8)


def default_indicator() -> np.ndarray:
    """The 4 x 6 tone-by-layer indicator (row weight 3, column weight 2)."""
    return _DEFAULT_INDICATOR.copy()


@dataclass(frozen=True)
class Codebook:
    """Per-layer codeword sets.

    ``codewords`` has shape (L, M, J): layer, bit value, tone.  Each codeword's
    support equals the matching indicator column and carries unit energy.
    """

    codewords: np.ndarray
    indicator: np.ndarray

    def __post_init__(self):
        cw, F = self.codewords, self.indicator
        if cw.ndim != 3 or F.shape != (cw.shape[2], cw.shape[0]):
            raise ValueError("codewords (L, M, J) and indicator (J, L) disagree")
        support = (np.abs(cw) > 1e-12)
        for i in range(cw.shape[0]):
            col = F[:, i].astype(bool)
            for b in range(cw.shape[1]):
                if not np.array_equal(support[i, b], col):
                    raise ValueError(f"layer {i + 1} bit {b}: support does not match indicator")

    @property
    def n_layers(self) -> int:
        return self.codewords.shape[0]

    @property
    def n_points(self) -> int:
        return self.codewords.shape[1]

    @property
    def n_tones(self) -> int:
        return self.codewords.shape[2]

    def layer_support(self, i: int) -> np.ndarray:
        """Tone indices (0-based) used by layer ``i`` (0-based)."""
        return np.flatnonzero(self.indicator[:, i])


def build_default_codebooks(indicator: np.ndarray | None = None,
                            phase_step: float = PHASE_STEP) -> Codebook:
    """Phase-rotated BPSK codebooks on the given indicator (default 4 x 6)."""
    F = default_indicator() if indicator is None else np.asarray(indicator)
    J, L = F.shape
    cw = np.zeros((L, 2, J), dtype=complex)
    for i in range(L):
        support = np.flatnonzero(F[:, i])
        rot = np.exp(1j * i * phase_step)
        for b in (0, 1):
            cw[i, b, support] = (1 - 2 * b) / np.sqrt(len(support)) * rot
    return Codebook(codewords=cw, indicator=F.astype(np.int8))


def scma_encode(bits, codebook: Codebook) -> np.ndarray:
    """Superpose the selected codewords: S = sum_i c_i(bit_i).

    ``bits`` may carry leading batch dimensions; the last axis must have
    length L.  Returns shape ``bits.shape[:-1] + (J,)``.
    """
    bits = np.asarray(bits)
    if bits.shape[-1] != codebook.n_layers:
        raise ValueError(f"expected {codebook.n_layers} bits per frame, got {bits.shape[-1]}")
    # codewords[i, bits[..., i], :] summed over i
    out = np.zeros(bits.shape[:-1] + (codebook.n_tones,), dtype=complex)
    for i in range(codebook.n_layers):
        out += codebook.codewords[i, bits[..., i]]
    return out


def save_codebook(codebook: Codebook, path) -> None:
    """Write the plain-text codebook format.

    One line per (layer, bit), layers outermost, holding J whitespace-separated
    complex entries as ``re,im`` pairs.
    """
    with open(path, "w") as fh:
        for i in range(codebook.n_layers):
            for b in range(codebook.n_points):
                entries = " ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in codebook.codewords[i, b])
                fh.write(entries + "\n")


def load_codebook(path, indicator: np.ndarray | None = None) -> Codebook:
    """Read the ``save_codebook`` format back; validates support and energy."""
    rows = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [complex(*map(float, tok.split(","))) for tok in line.split()]
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed entry on line {line_no}") from exc
            rows.append(row)
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: need uniform-length non-empty rows")
    flat = np.array(rows, dtype=complex)
    if flat.shape[0] % 2:
        raise ValueError(f"{path}: expected 2 codewords per layer")
    cw = flat.reshape(flat.shape[0] // 2, 2, flat.shape[1])
    if indicator is None:
        support = np.abs(cw[:, 0]) > 1e-12
        indicator = support.T.astype(np.int8)
    energies = np.sum(np.abs(cw) ** 2, axis=2)
    if not np.allclose(energies, 1.0, atol=1e-9):
        raise ValueError(f"{path}: codewords must have unit energy")
    return Codebook(codewords=cw, indicator=np.asarray(indicator, dtype=np.int8))
