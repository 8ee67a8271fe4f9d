"""Exception hierarchy shared by the solver pipeline."""


class InitJumpError(Exception):
    pass


class InvalidParameter(InitJumpError, ValueError):
    pass


class PositivityViolation(InitJumpError):
    def __init__(self, which: str, where: tuple, value: float):
        self.which = which
        self.where = where
        self.value = value
        coords = ", ".join(f"{c:.6g}" for c in where)
        super().__init__(f"{which} has infimum {value:.6g} <= 0 (attained at ({coords}))")


class NumericalFailure(InitJumpError):
    """Raised when a trajectory solve cannot continue.

    ``label`` and ``epsilon`` are filled in by the caller when known.
    """

    def __init__(self, msg: str, label: float | None = None, epsilon: float | None = None):
        self.label = label
        self.epsilon = epsilon
        super().__init__(msg)


class SingularStep(NumericalFailure):
    pass


class NonFiniteState(NumericalFailure):
    pass


class OutOfStrip(InitJumpError):
    pass


class DegenerateRoots(InitJumpError):
    pass


class DegenerateSpacing(InitJumpError):
    pass


class RegionEmpty(InitJumpError):
    pass


class InsufficientDecay(InitJumpError):
    pass
