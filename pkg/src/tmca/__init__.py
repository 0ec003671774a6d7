"""Temporally multiplexed coded aperture (TMCA) forward models, conditioning
analysis, ADMM-TV reconstruction and binary code optimization."""
from .codeopt import (CodeParams, SurrogateObjective, init_params, objective_and_gradient,
                      optimize_codes, random_baseline)
from .conditioning import SpectrumReport, conditioning_study, spectrum
from .core import (ApertureSequence, CodeSequence, MeasurementMatrix, ShutterSequence, TimingConfig,
                   apply_adjoint, apply_matrix, compose_exposure, quantize_codes)
from .errors import (CapacityError, DimensionError, DivergenceError, InvalidInputError, SolverError,
                     TMCAError)
from .lightfield import (LightFieldGeometry, lf_assemble_matrix, lf_contract, lf_equivalent_aperture,
                         lf_simulate)
from .metrics import MetricReport, dd, ergas, evaluate, psnr, rmse, sam, ssim, uiqi
from .phantoms import gen_phantom
from .recon import AdmmConfig, ReconResult, admm_tv, backproject, tv_prox
from .spectral import (SpectralConfig, hs_assemble_matrix, hs_contract, hs_equivalent_aperture,
                       hs_simulate)
from .systems import System

__version__ = "0.1.0"
