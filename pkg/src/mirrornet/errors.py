"""Exception taxonomy shared across the package."""


class MirrorNetError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(MirrorNetError):
    """Invalid or internally inconsistent configuration."""


class ShapeError(MirrorNetError):
    """An array or tensor shape violates an operation's contract."""


class PlantError(MirrorNetError):
    """The synthesizer (built-in or external process) failed to render."""


class TrainingDiverged(MirrorNetError):
    """The encoder loss blew past the divergence guard."""
