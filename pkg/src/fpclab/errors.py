"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An operation was called with arguments outside its precondition."""


class ProvenanceError(ValueError):
    """A sample draw was applied to a population it was not drawn from."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""


class PhaseError(RuntimeError):
    """A full-run phase failed; carries the phase name and the original error."""

    def __init__(self, phase: str, cause: BaseException):
        super().__init__(f"{phase}: {cause}")
        self.phase = phase
        self.cause = cause


class PopulationFileError(RuntimeError):
    """Base class for population file I/O problems."""


class PopulationFormatError(PopulationFileError):
    """Wrong magic bytes or unsupported format version."""


class CorruptPopulationError(PopulationFileError):
    """Checksum mismatch or truncated file."""
