"""Entropy-based spectrum sensing: detectors, fusion and Monte Carlo harness."""

__version__ = "0.1.0"

from .calibration import (
    CalibrationRecord,
    CalibrationSpec,
    DetectorKind,
    calibrate,
    calibrate_energy,
    calibrate_one_stage,
    calibrate_two_stage,
)
from .cooperative import (
    FusionResult,
    FusionRule,
    fuse_n_out_of_k,
    fuse_two_bit,
    map_two_bit_to_int,
    run_cooperative_round,
)
from .detectors import (
    OneStageResult,
    Thresholds,
    TwoBitDecision,
    TwoStageResult,
    detect_energy,
    detect_entropy_amplitude,
    detect_entropy_power,
    two_stage_detect,
    two_stage_two_bit,
)
from .entropy import (
    Histogram,
    build_histogram,
    estimate_entropy,
    spectrum_entropy,
    theoretical_amplitude_entropy,
    theoretical_power_entropy,
)
from .signal import (
    ChannelKind,
    ChannelModel,
    Frame,
    FrameSource,
    Hypothesis,
    NoiseModel,
    ScenarioConfig,
    SignalParams,
    gen_bpsk_symbols,
    make_frame,
    synth_primary,
    trial_rng,
)
from .spectral import Spectrum, amplitude, dft, power_density
