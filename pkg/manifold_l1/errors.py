"""
This file contains custom errors and warnings
for the manifold_l1 package.
"""
from manifold_l1 import colour
from manifold_l1 import log


class ManifoldL1Error(Exception):
    def __init__(self, msg, logit=True):
        if logit:
            log.log(msg, 'error')
        super(ManifoldL1Error, self).__init__(msg)

    def __str__(self):
        return colour.cstring(super(ManifoldL1Error, self).__str__(), 'error')

    def get_message(self):
        return super(ManifoldL1Error, self).__str__()


class ParseError(ManifoldL1Error):
    pass


class DegenerateFace(ManifoldL1Error):
    pass


class IndexOutOfRange(ManifoldL1Error):
    pass


class DimensionMismatch(ManifoldL1Error):
    pass


class InputError(ManifoldL1Error):
    pass


class ConfigurationError(ManifoldL1Error):
    pass


class UnrecognizedValueError(ManifoldL1Error):
    pass


class SizeLimitExceeded(ManifoldL1Error):
    pass


class SolveFailure(ManifoldL1Error):
    pass


class NonFiniteObjective(ManifoldL1Error):
    pass


class NotPositiveDefinite(ManifoldL1Error):
    pass


class FactorizationRequired(ManifoldL1Error):
    pass


class CoreSingular(ManifoldL1Error):
    pass


class ShiftFailure(ManifoldL1Error):
    pass


class OrthogonalityLoss(ManifoldL1Error):
    pass


class NoConvergence(ManifoldL1Error):
    def __init__(self, msg, iterations=None, residual=None, logit=True):
        self.iterations = iterations
        self.residual = residual
        super(NoConvergence, self).__init__(msg, logit=logit)


# Custom Warnings
class ManifoldL1Warning(Warning):
    def __str__(self):
        return colour.cstring(super(ManifoldL1Warning, self).__str__(), 'warning')


class LoggedManifoldL1Warning(ManifoldL1Warning):
    def __init__(self, msg):
        log.log(msg, 'warning')
        super(LoggedManifoldL1Warning, self).__init__(msg)


class InvariantViolation(LoggedManifoldL1Warning):
    pass
