class HopfLabError(Exception):
    """Base class for every error raised by the library modules"""


class GeometryError(HopfLabError, ValueError):
    """Vectors at different base points, degenerate planes, bad shapes"""


class DegenerateMomentumError(HopfLabError, ValueError):
    """Horizontal momentum too small to define the canonical splitting"""


class LevelSetError(HopfLabError, ValueError):
    """Phase point is not on the level set h = 1/2"""


class ConfigError(HopfLabError, ValueError):
    """Invalid run configuration (maps to exit code 2)"""


class NormalizationMismatchError(HopfLabError, ValueError):
    """Report and caller disagree on the charge of the extremal"""


class IntegrationError(HopfLabError, RuntimeError):
    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time:.6f})")
        self.time = time


class RefinementError(HopfLabError, RuntimeError):
    def __init__(self, first, second, step):
        super().__init__(
            f"Two conjugate-time candidates at t = {first:.6f} and t = {second:.6f} "
            f"lie within one grid step ({step:.2e}); raise --steps to separate them"
        )
        self.times = (first, second)
        self.step = step
