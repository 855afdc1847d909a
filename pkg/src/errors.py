"""
Domain exceptions for the nonholonomic simulator
Every error carries a reason code printed by the CLI
"""


class SimulationError(Exception):
    """Base class for numerical and geometric failures"""

    code = 'SimulationError'

    def __init__(self, message, t=None, leg=None):
        super().__init__(message)
        self.t = t
        self.leg = leg

    def __str__(self):
        msg = super().__str__()
        if self.leg is not None:
            msg = f"[{self.leg} leg] {msg}"
        if self.t is not None:
            msg = f"{msg} (at t={self.t!r})"
        return msg


class FrameDegenerate(SimulationError):
    """The distribution frame is linearly dependent (Gram matrix ill-conditioned)"""
    code = 'FrameDegenerate'


class MetricSingular(SimulationError):
    """The metric is not symmetric positive definite at the evaluated point"""
    code = 'MetricSingular'


class JacobianUnavailable(SimulationError):
    """Finite differencing would leave the chart bounds"""
    code = 'JacobianUnavailable'


class HillBoundary(SimulationError):
    """e - V(q) fell below the Hill threshold"""
    code = 'HillBoundary'


class StepUnderflow(SimulationError):
    """Adaptive step size collapsed"""
    code = 'StepUnderflow'


class NotInDistribution(SimulationError):
    """A velocity violates the nonholonomic constraint"""
    code = 'NotInDistribution'


class ZeroVector(SimulationError):
    """A nonzero velocity was required"""
    code = 'ZeroVector'


class NotOnSphere(SimulationError):
    """Input to psi does not lie on the P-sphere"""
    code = 'NotOnSphere'


class NotOnShell(SimulationError):
    """Momentum does not lie on the energy shell"""
    code = 'NotOnShell'


class NotKinetic(SimulationError):
    """A kinetic system (constant potential) was required"""
    code = 'NotKinetic'


class UnknownSystem(SimulationError):
    """No builtin system with that name"""
    code = 'UnknownSystem'


class NoAnalyticSolution(SimulationError):
    """The system has no closed-form trajectory"""
    code = 'NoAnalyticSolution'


class NoAnalyticH(SimulationError):
    """The system has no closed-form reparametrization"""
    code = 'NoAnalyticH'


class RestrictedDomain(SimulationError):
    """The operation is only defined for the disk examples"""
    code = 'RestrictedDomain'


class BallExceeded(UserWarning):
    """Velocity lies outside the configured exponential-map ball"""
    code = 'BallExceeded'


class ChartExit(SimulationError):
    """The trajectory left the declared chart bounds"""
    code = 'ChartExit'


class ExpressionDomain(SimulationError):
    """A system-file expression cannot be evaluated at the current point"""
    code = 'ExpressionDomain'
