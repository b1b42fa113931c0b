"""Exception types shared across the package."""


class GraspdetError(Exception):
    """Base class for all package errors."""


class DegenerateRect(GraspdetError):
    """A corner quad collapses to (near) zero width or height."""


class NotAParallelogram(GraspdetError):
    """Corner quad violates the parallelogram invariant beyond tolerance."""


class EmptyGroundTruth(GraspdetError):
    """An operation that needs ground-truth rectangles got none."""


class IoError(GraspdetError):
    """A file or directory could not be read."""


class EmptyDataset(GraspdetError):
    """No admissible samples were found under the dataset root."""


class MalformedLabelFile(GraspdetError):
    """A rectangle label file has a bad line count or unparsable token."""


class OutOfFrame(GraspdetError):
    """A rectangle lies outside the normalized 224x224 frame."""


class BadMagic(GraspdetError):
    """Feature file does not start with the expected magic bytes."""


class VersionUnsupported(GraspdetError):
    """Feature file declares a format version this reader cannot handle."""


class TruncatedPayload(GraspdetError):
    """Feature file payload is shorter than the header promises."""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"expected {expected} bytes, got {actual}")
        self.expected = expected
        self.actual = actual


class DuplicateId(GraspdetError):
    """Feature file contains the same sample id twice."""


class DimMismatch(GraspdetError):
    """Feature dimension does not match the regressor input width."""


class StaleCache(GraspdetError):
    """backward() was handed a cache that does not match the head."""


class NonFiniteGradient(GraspdetError):
    """A gradient contained NaN or infinity."""


class NonFiniteLoss(GraspdetError):
    """Training loss became NaN or infinite."""

    def __init__(self, batch_index: int):
        super().__init__(f"non-finite loss at batch {batch_index}")
        self.batch_index = batch_index
