"""Exception types shared across the package."""


class ShapeMismatchError(ValueError):
    """Two shapes that must agree do not; message names both."""

    def __init__(self, what: str, got, expected):
        self.got = tuple(got)
        self.expected = tuple(expected)
        super().__init__(f"{what}: got {self.got}, expected {self.expected}")


class ArgumentError(ValueError):
    """An argument value is outside its contract."""


class DegenerateStatsError(ValueError):
    """Batch statistics requested over fewer than two elements."""


class TapeStateError(RuntimeError):
    """Backward invoked a second time over an already-consumed tape."""


class ConstructionError(ValueError):
    """Model wiring failed; carries the lateral connection index if known."""

    def __init__(self, message: str, connection: int | None = None):
        self.connection = connection
        if connection is not None:
            message = f"lateral connection {connection}: {message}"
        super().__init__(message)


class UnknownVariantError(ValueError):
    """Variant name not in the registry; message lists valid names."""


class SplitConstraintError(ValueError):
    """Zero-shot split cannot satisfy the per-object coverage constraint."""


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries epoch, batch, and learning rate."""

    def __init__(self, epoch: int, batch: int, lr: float):
        self.epoch = epoch
        self.batch = batch
        self.lr = lr
        super().__init__(
            f"non-finite loss at epoch {epoch}, batch {batch}, lr {lr:g}"
        )


class CheckpointError(ValueError):
    """Checkpoint file is malformed or does not match the model."""
