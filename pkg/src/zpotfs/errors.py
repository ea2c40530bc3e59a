"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """An argument has the wrong shape, length or range."""


class InvalidConfiguration(ValueError):
    """A parameter combination cannot be simulated."""


class ResourceLimit(MemoryError):
    """A dense construction would exceed the configured size cap."""


class DegenerateInput(ValueError):
    """The input carries no usable information (e.g. an all-zero dictionary)."""


class DetectorDegenerate(RuntimeError):
    """The MRC combining weight vanished for some symbol."""

    def __init__(self, block, position):
        super().__init__(f"zero combining energy in block {block} at delay index {position}")
        self.block = block
        self.position = position


class StageError(RuntimeError):
    """Wraps a failure inside the receiver with the stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
