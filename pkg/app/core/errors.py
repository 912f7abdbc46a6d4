class DephasingError(Exception):
    """Base class for failures surfaced by the engine."""


class ConfigError(DephasingError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path:
            where = f"{path}:{line}: " if line else f"{path}: "
        super().__init__(f"{where}{message}")


class QuadratureError(DephasingError):
    def __init__(self, integral: str, t: float, abserr: float, tol: float, reason: str | None = None):
        self.integral = integral
        self.t = t
        self.abserr = abserr
        self.tol = tol
        detail = reason or f"error estimate {abserr:.3g} > tolerance {tol:.3g}"
        super().__init__(f"{integral} did not converge at t={t:.6g} ({detail})")


class StepSizeError(DephasingError):
    pass


class ToleranceBreach(DephasingError):
    def __init__(self, n_points: int, worst: float):
        self.n_points = n_points
        self.worst = worst
        super().__init__(f"{n_points} grid point(s) outside the MC tolerance band (worst excess {worst:.3g})")
