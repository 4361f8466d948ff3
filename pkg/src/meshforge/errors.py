"""Exception types shared across the pipeline."""


class MeshforgeError(Exception):
    """Base class for all library errors."""


# --- sketch document errors ---

class MalformedDocument(MeshforgeError):
    """Sketch document is syntactically or structurally invalid."""


class UnsupportedVersion(MeshforgeError):
    """Sketch document declares a version this library does not speak."""


class InvalidStroke(MeshforgeError):
    """Stroke violates its invariants (coordinates, width, point count)."""


class InvalidDimensions(MeshforgeError):
    """Requested raster dimensions are out of range."""


# --- control preparation errors ---

class InvalidSigma(MeshforgeError):
    """Gaussian sigma must be positive."""


class InvalidThresholds(MeshforgeError):
    """Hysteresis thresholds must satisfy 0 < low < high."""


class InvalidWeight(MeshforgeError):
    """Conditioning weight outside [0, 1] or unknown weight key."""


class NoForeground(MeshforgeError):
    """Background removal flooded every pixel."""


class MattingBackendUnavailable(MeshforgeError):
    """External matting backend configured but unreachable, fallback disabled."""


# --- backend gateway errors ---

class BackendError(MeshforgeError):
    """Base class for backend call failures."""


class BackendTimeout(BackendError):
    """Backend did not answer within timeout x (retry_limit + 1)."""


class BackendProtocolError(BackendError):
    """Backend answered but the response violates the wire contract."""


class BackendRejected(BackendError):
    """Backend answered non-2xx with an error message."""


class EmptyForeground(MeshforgeError):
    """Reconstruction input has no foreground pixels."""


# --- field / geometry errors ---

class InvalidResolution(MeshforgeError):
    """Grid resolution outside the supported range."""

class OutOfDomain(MeshforgeError):
    """Sample point outside the [-1, 1]^3 field domain."""


class EmptyMesh(MeshforgeError):
    """Operation requires a non-empty mesh."""


# --- asset errors ---

class ParseError(MeshforgeError):
    """OBJ document could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class IndexOutOfRange(ParseError):
    """OBJ face references a vertex/normal index that does not exist."""
