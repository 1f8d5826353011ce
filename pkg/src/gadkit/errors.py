"""Exception types shared across the library."""


class ShapeError(ValueError):
    """Raster dimensions do not match what the operation requires."""


class RasterFormatError(ValueError):
    """A raster file could not be parsed.

    ``offset`` is the byte position in the file at which parsing failed.
    """

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class MissingClassError(ValueError):
    """A semantic class has no examples in the given label maps."""

    def __init__(self, class_ids):
        self.class_ids = sorted(class_ids)
        super().__init__(f"no pixels found for class id(s) {self.class_ids}")


class UndefinedMetricError(ValueError):
    """A metric was requested on an empty or degenerate evaluation set."""
