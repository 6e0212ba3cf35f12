"""Probabilistically shaped 64QAM link simulator."""

from ._pcslink import (
    AirTable,
    CcdmError,
    Distribution,
    SnrTrace,
    air_for_rate,
    build_air_table,
    ccdm_decode,
    ccdm_encode,
    ccdm_input_length,
    default_rain_config,
    evm_percent,
    gen_trace,
    gmi_from_samples,
    mb_distribution,
    mb_for_entropy,
    net_bit_rate,
    ngmi,
    predict_snr,
    quantize_composition,
    realize_link,
    run_campaign,
    select_rate,
    simulate_awgn,
    snr_from_evm,
)

__all__ = [
    "AirTable",
    "CcdmError",
    "Distribution",
    "SnrTrace",
    "air_for_rate",
    "build_air_table",
    "ccdm_decode",
    "ccdm_encode",
    "ccdm_input_length",
    "default_rain_config",
    "evm_percent",
    "gen_trace",
    "gmi_from_samples",
    "mb_distribution",
    "mb_for_entropy",
    "net_bit_rate",
    "ngmi",
    "predict_snr",
    "quantize_composition",
    "realize_link",
    "run_campaign",
    "select_rate",
    "simulate_awgn",
    "snr_from_evm",
]
