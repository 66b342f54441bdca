"""Run configuration: flat dotted keys, experiment presets and YAML loading.

Precedence, lowest first: built-in defaults, the preset, the config file,
``--set`` overrides and dedicated command-line flags.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import List, Optional

import yaml

from .errors import ConfigError
from .geometry import Box, domain_from_config
from .problems import builtin_problem, polynomial_problem
from .trainer import TrainConfig


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a reproduction run.  Field ``a_b`` is config key ``a.b``.

    Defaults reproduce the 2D Laplace experiment.
    """

    preset: Optional[str] = None
    problem_name: Optional[str] = "laplace2d_xy"
    problem_custom_g: Optional[str] = None
    problem_custom_f: Optional[str] = None
    problem_custom_u: Optional[str] = None
    domain_kind: Optional[str] = None
    domain_lo: Optional[List[float]] = None
    domain_hi: Optional[List[float]] = None
    domain_corner: Optional[List[float]] = None
    # path sampling for WoS-NN training
    eps: float = 1e-3
    max_steps: int = 20
    n_starts: int = 40000
    # YzNet and its training
    hidden: List[int] = field(default_factory=lambda: [32, 64, 128])
    init: str = "glorot"
    lr: float = 3e-4
    batch_size: int = 2048
    epochs: int = 50
    shuffle: bool = True
    seed: int = 0
    # classic WoS baseline on the evaluation grid
    wos_n_paths: int = 50
    wos_eps: Optional[float] = None
    wos_max_steps: Optional[int] = None
    # WoS-driven regression network
    baseline_lr: float = 1e-4
    baseline_batch_size: int = 256
    baseline_epochs: int = 50
    # evaluation lattice; probe_planes keeps only the three mid-planes of [lo, hi]
    grid_spacing: float = 0.02
    grid_lo: Optional[List[float]] = None
    grid_hi: Optional[List[float]] = None
    grid_probe_planes: bool = False
    # finite differences
    fdm_h: float = 0.02
    fdm_tol: float = 1e-10
    fdm_max_iters: int = 200000
    fdm_omega: float = 1.9
    out: str = "run"
    workers: int = 1

    # --- keys -----------------------------------------------------------------

    @staticmethod
    def key_of(name):
        for prefix in ("problem_custom_", "domain_", "problem_", "wos_", "baseline_", "grid_", "fdm_"):
            if name.startswith(prefix):
                return prefix.replace("_", ".") + name[len(prefix) :]
        return name

    @classmethod
    def keys(cls):
        return {cls.key_of(f.name): f.name for f in dataclasses.fields(cls)}

    @classmethod
    def from_mapping(cls, mapping, base=None):
        keys = cls.keys()
        values = {}
        for key, value in _flatten(mapping).items():
            if key not in keys:
                raise ConfigError("unknown configuration key", key=key)
            values[keys[key]] = value
        cfg = dataclasses.replace(base or cls(), **values)
        cfg.validate()
        return cfg

    def to_mapping(self):
        return {self.key_of(f.name): getattr(self, f.name) for f in dataclasses.fields(self)}

    def result_mapping(self):
        """Keys that influence results (excludes output location and worker count)."""
        m = self.to_mapping()
        m.pop("out")
        m.pop("workers")
        return m

    def validate(self):
        checks = [
            ("eps", self.eps > 0, "must be positive"),
            ("max_steps", self.max_steps >= 1, "must be at least 1"),
            ("n_starts", self.n_starts >= 1, "must be at least 1"),
            ("epochs", self.epochs >= 1, "must be at least 1"),
            ("batch_size", self.batch_size >= 1, "must be at least 1"),
            ("wos.n_paths", self.wos_n_paths >= 1, "must be at least 1"),
            ("grid.spacing", self.grid_spacing > 0, "must be positive"),
            ("workers", self.workers >= 1, "must be at least 1"),
            ("init", self.init in ("glorot", "he"), "must be 'glorot' or 'he'"),
            ("hidden", len(self.hidden) >= 1 and all(int(w) >= 1 for w in self.hidden), "needs positive widths"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(msg, key=key)
        if self.problem_custom_g is None and self.problem_name is None:
            raise ConfigError("set problem.name or problem.custom.g", key="problem.name")

    # --- derived objects ------------------------------------------------------

    def problem(self):
        if self.problem_custom_g is not None:
            if self.domain_kind is None:
                raise ConfigError("custom problems need a domain", key="domain.kind")
            domain = domain_from_config(self.domain_kind, self.domain_lo, self.domain_hi, self.domain_corner)
            return polynomial_problem(
                domain, self.problem_custom_g, self.problem_custom_f or "0", self.problem_custom_u
            )
        problem = builtin_problem(self.problem_name)
        if self.domain_kind is not None:
            domain = domain_from_config(self.domain_kind, self.domain_lo, self.domain_hi, self.domain_corner)
            if domain.dim != problem.dim:
                raise ConfigError("domain dimension does not match the problem", key="domain.kind")
            problem = dataclasses.replace(problem, domain=domain)
        return problem

    def train_config(self):
        return TrainConfig(lr=self.lr, batch_size=self.batch_size, epochs=self.epochs, seed=self.seed, shuffle=self.shuffle)

    def baseline_config(self):
        return TrainConfig(
            lr=self.baseline_lr, batch_size=self.baseline_batch_size, epochs=self.baseline_epochs,
            seed=self.seed, shuffle=self.shuffle,
        )


def _flatten(mapping, prefix=""):
    flat = {}
    for key, value in (mapping or {}).items():
        key = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, key + "."))
        else:
            flat[key] = value
    return flat


PRESETS = {
    "laplace2d": {"problem.name": "laplace2d_xy"},
    "poisson2d": {"problem.name": "poisson2d_xy2"},
    "lshape": {"problem.name": "lshape_indicator"},
    "poisson3d": {
        "problem.name": "poisson3d_x2yz",
        "eps": 1e-2,
        "max_steps": 80,
        "n_starts": 60000,
        "hidden": [64, 128, 128],
        "lr": 2e-4,
        "batch_size": 1024,
        "grid.lo": [-1.0, 0.0, 0.0],
        "grid.hi": [0.0, 1.0, 1.0],
        "grid.probe_planes": True,
        "fdm.h": 0.05,
    },
}


def preset_config(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}", key="preset")
    return RunConfig.from_mapping(dict(PRESETS[name], preset=name))


def load_config(file=None, preset=None, overrides=None):
    """Merge preset, YAML file and overrides into a :class:`RunConfig`."""
    data = {}
    if file is not None:
        try:
            with open(file) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}", key="config") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config file: {exc}", key="config") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a key-value mapping", key="config")
    data = _flatten(data)
    preset = preset or data.get("preset")
    base = preset_config(preset) if preset else RunConfig()
    data.update(overrides or {})
    if preset:
        data["preset"] = preset
    return RunConfig.from_mapping(data, base)


def wos_settings(cfg):
    eps = cfg.wos_eps if cfg.wos_eps is not None else cfg.eps
    max_steps = cfg.wos_max_steps if cfg.wos_max_steps is not None else cfg.max_steps
    return eps, max_steps


def evaluation_grid(cfg, domain):
    from .fields import FieldGrid

    lo = domain.lo if cfg.grid_lo is None else cfg.grid_lo
    hi = domain.hi if cfg.grid_hi is None else cfg.grid_hi
    if not cfg.grid_probe_planes:
        return FieldGrid.lattice(domain, cfg.grid_spacing, lo, hi)
    region = Box(lo, hi)
    mid = 0.5 * (region.lo + region.hi)
    grid = None
    for axis in range(domain.dim):
        plo, phi = region.lo.copy(), region.hi.copy()
        plo[axis] = phi[axis] = mid[axis]
        plane = FieldGrid.lattice(domain, cfg.grid_spacing, plo, phi)
        grid = plane if grid is None else grid.union(plane)
    return grid
