"""Block-sparse greedy recovery on toroidal grids and a multi-user
mm-wave channel-estimation simulator built on top of it."""

from .blocks import (
    BlockAnchor,
    BlockCollection,
    BlockIndexSet,
    block_index_set,
    block_index_set_1d,
    valid_blocks,
    valid_blocks_1d,
)
from .channels import (
    ArrayGeometry,
    MultipathChannel,
    SpectralChannel,
    fourier_dictionary,
    grid_channel,
    physical_channel,
    ula_response,
    vec_dictionary,
)
from .experiment import (
    AggregateRow,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    run_sweep,
    spectral_magnitude_dump,
)
from .solver import SolverConfig, SolverResult, default_tau, gbomp, least_squares, omp
from .strategies import (
    BeamformerPair,
    StrategyOutcome,
    beamforming_gain,
    dominant_singular_pair,
    perfect_csi_gain,
    run_method1,
    run_method2,
    run_method3,
)
from .training import (
    MeasurementEnsemble,
    TrainingSet,
    bernoulli_beam,
    method1_measurements,
    method2_measurements,
    method3_phase2_measurements,
)

__version__ = "0.1.0"
