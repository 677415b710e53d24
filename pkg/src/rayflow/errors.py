"""Exception hierarchy shared by all rayflow modules."""


class RayflowError(Exception):
    """Base class for every error raised by the package."""


class NoConvergence(RayflowError):
    pass


class NotMisiurewicz(RayflowError):
    pass


class InsideM(RayflowError):
    pass


class OutsideDomain(RayflowError):
    pass


class NotEscaping(RayflowError):
    pass


class NewtonStall(RayflowError):
    """Newton failed during ray continuation.

    ``partial`` holds the polyline traced up to the last good sample.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NoCauchy(RayflowError):
    pass


class StarInKneading(RayflowError):
    pass


class PeriodicE(RayflowError):
    pass


class DepthInsufficient(RayflowError):
    pass


class BranchAmbiguous(RayflowError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class Escaped(RayflowError):
    pass


class NoContraction(RayflowError):
    pass
