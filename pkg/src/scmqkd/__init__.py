"""Subcarrier-multiplexed CV-QKD: intermodulation noise and collective-attack key rates."""
from .intermod import (ModulationConfig, NoiseProfile, bessel_k0, intermod_noise_ratio,
                       noise_profile, pairwise_term_variance, product_gaussian_pdf,
                       sample_delta_x, sample_signal, source_noise)
from .security import (PAPER_SEC6, DetectorModel, GainUndefinedError, KeyRateResult, LinkModel,
                       ProtocolParams, channel_key_rate, g_function, holevo_bound,
                       multichannel_gain, mutual_information, single_channel_rate,
                       symplectic_eigenvalues_conditional, symplectic_eigenvalues_state,
                       total_key_rate)
from .spectrum import (HIGH_PLAN, LOW_PLAN, MEDIUM_PLAN, ChannelPlan, lo_distortion,
                       m2_bounds_check, m2_count, m2_enumerate, plan_from_name)

__version__ = "0.1.0"
