class LindbladError(Exception):
    """Base class for operator-algebra and master-equation failures."""


class DimensionMismatchError(LindbladError):
    pass


class NonHermitianError(LindbladError):
    pass


class IntegrationError(LindbladError):
    def __init__(self, message, reached_time):
        super().__init__(f"{message} (reached t={reached_time:.6g} s)")
        self.reached_time = reached_time


class DegenerateSpectrumError(LindbladError):
    def __init__(self, message, candidates):
        listed = ", ".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in candidates)
        super().__init__(f"{message}: [{listed}]")
        self.candidates = list(candidates)
