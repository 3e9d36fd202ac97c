"""Discrete-time coined quantum walks on one- and two-dimensional lattices."""

from .coins import (
    CoinOperator, StateSpec, build_coin, build_initial_state, check_unitary,
)
from .config import SimulationConfig, load, parse, serialize, validate
from .errors import ConfigError, QWalkError, SimulationError
from .evolution import (
    SimulationResult, StepContext, run, step, step_1d, step_2d_diagonal, step_2d_natural,
)
from .lattice import (
    Distribution, LatticeSpec, WaveFunction, allocate_wavefunction, norm_sq, probability,
    uniform,
)
from .links import (
    LinkTopology, build_permanent_topology, empty_topology, merge, sample_random_links,
)
from .measurement import (
    DetectorSet, MeasurementOutcome, measure, run_ensemble, sample_decoherence_detectors,
)
from .output import OutputBundle, amplify, read_dat, write_bundle
from .statistics import (
    ScreenSpec, approximate_stationary, check_symmetry, make_screen, mixing_time, moments,
    record_screen, tvd,
)

__version__ = "0.1.0"
