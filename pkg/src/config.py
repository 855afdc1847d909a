"""
Configuration module for the nonholonomic Maupertuis-Jacobi simulator
Handles numerical tolerances, logging settings and per-run configuration
"""
import json
import math
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_float(name, default):
    return float(os.getenv(name, str(default)))


class Config:
    """Configuration class for simulator settings"""

    # Geometry Settings
    KAPPA_MAX = _env_float('NHSIM_KAPPA_MAX', 1e12)
    COMPLEMENT_EPS = _env_float('NHSIM_COMPLEMENT_EPS', 1e-8)
    FD_STEP = _env_float('NHSIM_FD_STEP', 1e-5)
    CONSTRAINT_TOL = _env_float('NHSIM_CONSTRAINT_TOL', 1e-9)
    SPHERE_TOL = _env_float('NHSIM_SPHERE_TOL', 1e-9)
    SHELL_TOL = _env_float('NHSIM_SHELL_TOL', 1e-10)

    # Hill region
    HILL_EPS = _env_float('NHSIM_HILL_EPS', 1e-8)

    # Integrator Settings
    DEFAULT_METHOD = os.getenv('NHSIM_METHOD', 'rk4').lower()
    DEFAULT_STEP = _env_float('NHSIM_STEP', 1e-3)
    RTOL = _env_float('NHSIM_RTOL', 1e-10)
    ATOL = _env_float('NHSIM_ATOL', 1e-10)
    MAX_STEPS = int(os.getenv('NHSIM_MAX_STEPS', '10000000'))

    # Exponential map
    BALL_EPS = _env_float('NHSIM_BALL_EPS', 0.5)

    # Verification
    VERIFY_TOL = _env_float('NHSIM_VERIFY_TOL', 1e-6)

    # Logging Settings
    LOG_FILE = os.getenv('NHSIM_LOG_FILE', 'nhsim.log')
    LOG_LEVEL = os.getenv('NHSIM_LOG_LEVEL', 'DEBUG').upper()
    CONSOLE_LOG = os.getenv('NHSIM_CONSOLE_LOG', 'False').lower() == 'true'
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

    @classmethod
    def validate(cls):
        """Validate configuration"""
        positive = {
            'NHSIM_KAPPA_MAX': cls.KAPPA_MAX,
            'NHSIM_COMPLEMENT_EPS': cls.COMPLEMENT_EPS,
            'NHSIM_FD_STEP': cls.FD_STEP,
            'NHSIM_CONSTRAINT_TOL': cls.CONSTRAINT_TOL,
            'NHSIM_SPHERE_TOL': cls.SPHERE_TOL,
            'NHSIM_SHELL_TOL': cls.SHELL_TOL,
            'NHSIM_HILL_EPS': cls.HILL_EPS,
            'NHSIM_STEP': cls.DEFAULT_STEP,
            'NHSIM_RTOL': cls.RTOL,
            'NHSIM_ATOL': cls.ATOL,
            'NHSIM_BALL_EPS': cls.BALL_EPS,
        }
        for name, value in positive.items():
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a finite positive number, got {value}")
        if not math.isfinite(cls.VERIFY_TOL) or cls.VERIFY_TOL < 0:
            raise ValueError(f"NHSIM_VERIFY_TOL must be a finite non-negative number, got {cls.VERIFY_TOL}")
        if cls.MAX_STEPS < 1:
            raise ValueError(f"NHSIM_MAX_STEPS must be at least 1, got {cls.MAX_STEPS}")
        if cls.DEFAULT_METHOD not in ('rk4', 'rkf45'):
            raise ValueError(
                f"NHSIM_METHOD must be rk4 or rkf45, got {cls.DEFAULT_METHOD}"
            )
        return True


@dataclass
class RunConfig:
    """
    One CLI invocation: which system to run and with which parameters.

    Values come from an optional JSON config file overlaid by command line
    flags. ``validate`` enforces the invariants through ``Validator``.
    """

    system: str = 'disk-harmonic'
    energy: Optional[float] = None
    q0: Optional[List[float]] = None
    v0: Optional[List[float]] = None
    y0: Optional[List[float]] = None
    t_end: float = 1.0
    method: str = field(default_factory=lambda: Config.DEFAULT_METHOD)
    step: float = field(default_factory=lambda: Config.DEFAULT_STEP)
    tol: float = field(default_factory=lambda: Config.RTOL)
    verify_tol: float = field(default_factory=lambda: Config.VERIFY_TOL)
    samples: int = 11
    directions: Optional[List[List[float]]] = None
    num_directions: int = 8
    radii: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    workers: int = 1
    format: str = 'csv'
    out: Optional[str] = None
    seed: int = 0
    wrap_angles: bool = True

    @classmethod
    def from_dict(cls, data):
        """Build a RunConfig from a parsed JSON mapping (keys use underscores or dashes)"""
        known = set(cls.__dataclass_fields__)
        kwargs = {}
        for key, value in data.items():
            name = key.replace('-', '_')
            if name not in known:
                from validator import ValidationError
                raise ValidationError(f"Unknown config key: {key}")
            kwargs[name] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        """Load a RunConfig from a JSON config file"""
        from validator import ValidationError
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"Cannot read config file {path}: {e}")
        if not isinstance(data, dict):
            raise ValidationError(f"Config file {path} must hold a JSON object")
        return cls.from_dict(data)

    def merged(self, overrides):
        """Return a copy with every non-None override applied"""
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(data)

    def to_dict(self):
        return asdict(self)

    def validate(self, needs_energy=False):
        """
        Validate the numeric fields of this run

        Args:
            needs_energy: the command requires an energy value

        Returns:
            self, with normalized values

        Raises:
            ValidationError: If any field is invalid
        """
        from validator import Validator, ValidationError

        self.method = Validator.validate_method(self.method)
        self.step = Validator.validate_positive(self.step, 'step')
        self.tol = Validator.validate_positive(self.tol, 'tol')
        self.verify_tol = Validator.validate_nonnegative(self.verify_tol, 'verify_tol')
        self.t_end = Validator.validate_positive(self.t_end, 't_end')
        self.samples = Validator.validate_count(self.samples, 'samples', minimum=2)
        self.num_directions = Validator.validate_count(self.num_directions, 'num_directions')
        self.workers = Validator.validate_count(self.workers, 'workers')
        self.radii = Validator.validate_radii(self.radii)
        self.format = Validator.validate_format(self.format)
        self.seed = Validator.validate_seed(self.seed)
        if self.energy is not None:
            self.energy = Validator.validate_finite(self.energy, 'energy')
        elif needs_energy:
            raise ValidationError("This command requires --energy")
        if self.v0 is not None and self.y0 is not None:
            raise ValidationError("Give either v0 (chart velocity) or y0 (frame coefficients), not both")
        return self
