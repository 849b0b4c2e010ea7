class FusionError(Exception):
    """
    Root of every error raised by the fusion library.
    """
    pass


class ShapeError(FusionError, ValueError):
    """
    Tensor dimensions, divisibility or channel arithmetic do not line up.
    """
    pass


class ConfigError(FusionError, ValueError):
    """
    Unknown configuration key or a value that cannot be parsed.
    """
    pass


class ImageFormatError(FusionError, ValueError):
    """
    Malformed or unsupported PNM file.
    """
    pass


class CheckpointError(FusionError, ValueError):
    """
    Checkpoint manifest or payload disagrees with the configuration.
    """
    pass


class NumericalError(FusionError, ArithmeticError):
    """
    A non-finite intermediate or a violated numerical assertion.
    """
    pass


class TapeError(FusionError, RuntimeError):
    """
    Misuse of the gradient tape.
    """
    pass
