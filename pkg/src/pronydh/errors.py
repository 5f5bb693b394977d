"""Exception types shared across the package."""


class SolveFailure(RuntimeError):
    """A numerical stage failed (no solutions, singular configuration, aliasing).

    Raised for runtime failures of the solve pipeline, as opposed to plain
    invalid inputs which raise ValueError.  The CLI maps SolveFailure to exit
    code 2 and bad input to exit code 3.
    """
