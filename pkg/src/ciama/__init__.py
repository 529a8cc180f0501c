"""Link-level simulator and error-bound toolkit for combined sparse-code /
blind-interference-alignment multiple access (CIAMA) and its baselines."""

from .channel import (ChannelRealization, NoiseSpec, PathLossParams, draw_awgn,
                      draw_channels, path_loss, stream_rng)
from .scma import (Codebook, build_default_codebooks, default_indicator,
                   load_codebook, save_codebook, scma_encode)
from .mpa import FactorGraph, log_mpa_decode, ml_oracle_decode
from .bia import (apply_ic, bia_transmit, effective_channel, ic_matrix, receive,
                  supersymbol_schedule, user_effective_channels)
from .transceiver import (CiamaFrame, VirtualGraph, build_virtual_graph, ciama_encode,
                          decode_joint_mpa, decode_two_stage, zf_detect)
from .baselines import (alamouti_encode, bia_only_link, p2p_alamouti_link,
                        stbc_scma_link)
from .analysis import (CodewordPair, PepParams, average_pep_bound, ber_union_bound,
                       conditional_pep, diversity_order, scheme_rates)
from .harness import BerRecord, SimConfig, estimate_ber, run_sweep, write_csv

__version__ = "0.1.0"
