import math
from dataclasses import dataclass, replace

from errors import ConfigError

METHODS = ('structural', 'variational', 'closed', 'all')
FORMATS = ('json', 'csv')
NORMALIZATIONS = ('measured', 'printed')

# grid resolution used by both conjugate-point detectors
STEPS_PER_UNIT_TIME = 4000
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    u0: float = 0.0
    T: float = 2 * math.pi
    steps: int = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    method: str = 'all'
    format: str = 'json'
    out: str = None
    normalization: str = 'measured'
    jobs: int = 1

    def __post_init__(self):
        if self.steps is None and isinstance(self.T, (int, float)) and self.T > 0:
            object.__setattr__(self, 'steps', default_steps(self.T))

    def validate(self):
        """Raise ConfigError on the first invalid field"""
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"--n must be an integer >= 1, got {self.n!r}")
        if not math.isfinite(self.u0):
            raise ConfigError(f"--u0 must be finite, got {self.u0!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ConfigError(f"--T must be positive, got {self.T!r}")
        if not isinstance(self.steps, int) or self.steps < 1:
            raise ConfigError(f"--steps must be a positive integer, got {self.steps!r}")
        if not (self.tol > 0):
            raise ConfigError(f"--tol must be positive, got {self.tol!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"--seed must be an unsigned integer, got {self.seed!r}")
        if self.method not in METHODS:
            raise ConfigError(f"--method must be one of {', '.join(METHODS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"--format must be one of {', '.join(FORMATS)}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"--normalization must be one of {', '.join(NORMALIZATIONS)}")
        if not isinstance(self.jobs, int) or self.jobs == 0:
            raise ConfigError(f"--jobs must be a nonzero integer, got {self.jobs!r}")
        return self

    def with_overrides(self, **changes):
        if 'T' in changes and 'steps' not in changes:
            changes['steps'] = default_steps(changes['T'])
        return replace(self, **changes)


def default_steps(T):
    return max(1, math.ceil(STEPS_PER_UNIT_TIME * T))
