"""Grid-free Walk-on-Spheres solver with a neural solution/gradient field."""

from .config import PRESETS, RunConfig, load_config
from .errors import ConfigError, EstimationError, InputError, NumericalError, TrainingError
from .fdm import FdmGrid, solve_fdm, solve_fdm_grid
from .fields import FieldGrid, export_field, import_field, mean_error, mse, rrmse
from .geometry import Box, LShape2D, domain_from_config
from .greens import InverseCdfTable, default_table, green_function, green_total_mass, radial_cdf, sample_in_ball
from .nn import AdamState, Network, YzNet, adam_step, init, load_checkpoint, save_checkpoint
from .problems import PdeProblem, builtin_problem, polynomial_problem
from .rng import STARTS_STREAM, RngStream
from .trainer import PathDataset, TrainConfig, path_loss, predict_field, train, train_wos_driven, vectorize
from .wos import WosPath, load_paths, sample_dataset, sample_path, save_paths, walk, wos_estimate, wos_field

__version__ = "0.1.0"
