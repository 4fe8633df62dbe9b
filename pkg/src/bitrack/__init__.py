"""Leader-follower tracking over one-bit noisy links.

Followers see each neighbor only through a thresholded noisy bit, estimate
the neighbor's state with a projected stochastic-approximation recursion and
steer toward those estimates. Two gain schedules are provided: a decaying one
(``crs``) that converges when the leader settles, and a constant one (``brs``)
that keeps errors bounded for a moving leader.
"""

from .analysis import format_table, theory_report
from .channel import GaussianNoise, SensorBank, excitation_gain, observe_bit, observe_bits
from .config import PRESETS, config_from_dict, config_hash, config_to_dict, parse_config, preset, validate_config
from .control import (
    BRS,
    CRS,
    ConstantReference,
    GainPolicy,
    PowerLawReference,
    SinusoidReference,
    SummableReference,
    TableReference,
    brs_control,
    crs_control,
    leader_step,
)
from .engine import MetricSeries, RateFit, RunConfig, RunResult, Simulation, TrajectoryLog, fit_rate, log_steps, run
from .errors import ConfigurationError, NumericalError, RunDiverged
from .estimation import CONSTANT, DECAYING, EstimatorBank, project, rpa_step
from .export import export
from .spectral import LyapunovSolution, SpectralReduction, error_coordinates, reduce, solve_lyapunov
from .theory import (
    BrsBound,
    RateReport,
    TheoryConstants,
    bound_envelope,
    brs_bound,
    compute_constants,
    crs_condition,
    crs_rate,
    l1_alt,
    l1_theorem,
    l2_alt,
)
from .topology import (
    EdgeIndex,
    Topology,
    build_M,
    build_W,
    has_spanning_tree_rooted_at_leader,
    laplacian,
    max_degree,
    paper_topology,
)

__version__ = "0.1.0"
