"""Exception types shared across the pipeline."""


class InstanceError(ValueError):
    """Malformed or invariant-violating input; message names the offending field."""


class InfeasibleError(Exception):
    """No feasible solution exists. ``witness`` locates the cause when known."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SizeLimitError(Exception):
    """An oracle or network would exceed its configured size cap."""


class InternalConsistencyError(AssertionError):
    """A property guaranteed by construction failed; indicates an upstream bug."""


class StageError(Exception):
    """Failure inside one pipeline stage, tagged with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
