from typing import Callable

from .errors import CheckpointError, ConfigError, ImageFormatError, NumericalError, ShapeError

SUCCESS = 0
FAILURE = 1
USAGE = 2

USAGE_ERRORS = (ShapeError, ConfigError, ImageFormatError, CheckpointError, OSError)


def finish(api, action: Callable[[], bool]):
    """
    Run a command body and exit 0 on success, 1 on a computational failure and
    2 on bad input files, flags or configuration.
    """
    try:
        done = action()
    except NumericalError as error:
        api.error('{}', error)
        exit(FAILURE)
    except USAGE_ERRORS as error:
        api.error('{}', error)
        exit(USAGE)
    exit(SUCCESS) if done else exit(FAILURE)
