class TMCAError(Exception):
    pass


class DimensionError(TMCAError, ValueError):
    pass


class InvalidInputError(TMCAError, ValueError):
    pass


class CapacityError(TMCAError):
    """Instance too large for dense assembly or eigenanalysis."""


class SolverError(TMCAError, RuntimeError):
    pass


class DivergenceError(SolverError):
    def __init__(self, message, iteration=None, last_good=None):
        super().__init__(message)
        self.iteration = iteration
        self.last_good = last_good
