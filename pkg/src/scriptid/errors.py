"""Exception hierarchy shared across the package."""


class ScriptIdError(Exception):
    """Base class for all scriptid errors."""


class InvalidSample(ScriptIdError):
    """A stroke sample violates its structural invariants."""


class DegenerateComponent(ScriptIdError):
    """A component selected for standardization has zero variance."""


class StatsMismatch(ScriptIdError):
    """Normalization stats do not match the sequence they are applied to."""


class InsufficientClass(ScriptIdError):
    """A class has fewer samples than the number of requested splits."""


class InvalidLength(ScriptIdError):
    """Requested word length is outside the configured range."""


class InvalidCanvas(ScriptIdError):
    """Rasterization canvas is empty or otherwise unusable."""


class BlankImage(ScriptIdError):
    """An operation requiring ink received a blank image."""


class ShapeError(ScriptIdError):
    """Array shapes are inconsistent with the model or operation."""


class InvalidSplit(ScriptIdError):
    """A train/validation split is empty or malformed."""


class InvalidStart(ScriptIdError):
    """Traversal was started from an already-visited pixel."""


class Exhausted(ScriptIdError):
    """No unvisited start candidates remain."""


class InvalidInput(ScriptIdError):
    """Generic invalid input to a model operation."""


class InvalidError(ScriptIdError):
    """A confidence value passed to the combiner is out of domain."""


class ConfigError(ScriptIdError):
    """An experiment or CLI configuration is invalid."""


class DataError(ScriptIdError):
    """A data file is unreadable or violates the stroke file format."""
