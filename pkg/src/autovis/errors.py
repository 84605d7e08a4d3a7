"""Exception types shared across the package."""


class AutovisError(Exception):
    """Base class for all package-specific errors."""


# -- volume ------------------------------------------------------------

class FileSizeMismatch(AutovisError):
    """Raw file length does not match the byte length declared by the metadata."""


class UnsupportedScalarKind(AutovisError):
    """Metadata declares a scalar kind this loader does not decode."""


class IoFailure(AutovisError):
    """Underlying I/O operation failed."""


# -- transfer ----------------------------------------------------------

class DegenerateRange(AutovisError):
    """Sampling requested over an empty value range (v_min == v_max)."""


class EmptyRecords(AutovisError):
    """A transfer function cannot be built from zero records."""


# -- viewsphere --------------------------------------------------------

class TooFewAnchors(AutovisError):
    """A trajectory needs at least two anchor viewpoints."""


# -- mllm --------------------------------------------------------------

class ProviderUnavailable(AutovisError):
    """Remote provider unreachable after the configured retries."""


class FixtureMiss(AutovisError):
    """Scripted mock has no fixture for the request fingerprint."""


class ParseFailure(AutovisError):
    """Reply violates the expected structured schema."""


# -- knowledge ---------------------------------------------------------

class InvalidOverlap(AutovisError):
    """Chunk overlap must satisfy 0 <= overlap < chunk_size."""


class AdapterUnavailable(AutovisError):
    """Configured web-search adapter cannot serve queries."""


# -- pipeline / cli ----------------------------------------------------

class AllEvaluationsFailed(AutovisError):
    """Every evaluator reply came back failed; profiling cannot proceed."""


class ConfigError(AutovisError):
    """Run configuration is malformed (unknown keys, bad values)."""


class ArtifactError(AutovisError):
    """An artifact directory is missing or inconsistent."""
