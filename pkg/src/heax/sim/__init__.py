"""Analytical and functional model of the HEAX accelerator."""
from .model import (  # noqa: F401
    DEVICES,
    REFERENCE_CONFIGS,
    CoreCosts,
    HeaxConfig,
    bram_pack_utilization,
    buffer_depths,
    derive_config,
    dyadic_cycles,
    keyswitch_throughput,
    ksk_bandwidth_required,
    ksk_size_bits,
    lowlevel_throughput,
    ntt_aggregate_throughput,
    ntt_cycles,
    reference_config,
    resource_estimate,
)
