"""Multi-dimensional matrix-pencil estimation and prediction of wideband channels."""

from .bounds import BoundInputs, BoundReport, F1, F2, brute_force_bound_oracle, lower_bound_Nt
from .config import ScenarioConfig, load_config, load_config_text
from .errors import MDMPError
from .estimator import (
    EstimateSet,
    decode_angles,
    decode_delay,
    decode_doppler,
    detect_paths,
    estimate_angle_delay,
    estimate_angle_doppler,
    joint_diagonalize,
    psi_matrix,
)
from .harness import nmse, run_scenario, sweep
from .pencil import PencilConfig, build_G3_freq, build_G3_time, feasibility_check, selection_J, shuffle_left
from .predict import (
    correct_doppler,
    estimate_gains,
    pair_paths,
    predict_channel,
    run_mdmp,
    stale_csi_baseline,
)
from .synth import (
    ArrayGeometry,
    PathSpec,
    PathTruth,
    SamplingGrid,
    VelocitySpec,
    add_awgn,
    channel_snapshot,
    channel_trajectory,
    doppler_from_velocity,
    draw_paths,
    path_delay_at,
    steering_vector,
)
from .tensor import AxisSpec, ComplexTensor, read_cct, tensor_new, write_cct
from .unitary import to_real_pencil, unitary_Q

__version__ = "0.1.0"
