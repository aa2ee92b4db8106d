"""Plane-wave ultrasound beamforming and bone-surface enhancement."""

from .acquisition import (ArrayGeometry, ImagingGrid, PlaneWaveFrame, RfSweep,
                          make_linear_array, steering_angle_set,
                          validate_sweep)
from .beamform import (ApodizationSpec, BeamformedImage, BModeImage,
                       compound, das_beamform, envelope_detect, log_compress,
                       receive_delay, transmit_delay)
from .bpm import (BoneProbabilityMap, FilterBankConfig, MonogenicField,
                  bone_probability_map, feature_symmetry,
                  integrated_backscatter, local_phase, log_gabor_filter,
                  monogenic, phase_tensor, shadow_map)
from .config import (GridSpec, PipelineConfig, load_config, load_phantom,
                     save_config)
from .enhance import (AttentionWeights, EnhancedImage, beam_enhance,
                      otsu_threshold)
from .metrics import (MetricsReport, RoiMask, contrast_ratio, epi, evaluate,
                      make_background, snr, ssi, ssim)
from .pipeline import (DatasetRecord, PipelineError, PipelineResult,
                       compute_pipeline, export_dataset, read_dataset,
                       read_sweep, run_pipeline, write_sweep)
from .simulate import (Phantom, PointScatterer, PulseModel, SpecularSurface,
                       add_noise, simulate_frame, simulate_sweep)

__version__ = "0.1.0"
