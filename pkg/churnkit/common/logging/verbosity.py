"""
Console logging based on the number of -v flags
"""
import logging

from ZConfig.matcher import SectionValue

from churnkit.common.logging import DEBUG_EPOCHS, DEBUG_STEPS
from churnkit.common.logging.config_datatypes import logging_level


def set_verbosity_logger(logger: logging.Logger, verbosity: int, existing_console: logging.Handler = None):
    """
    Install a console based logger based on the given verbosity: 1 shows warnings, 2 progress, 3 debug output, 4
    every epoch and 5 every minibatch.

    :param logger: The logger to add the handlers to
    :param verbosity: The verbosity level given as command line argument
    :param existing_console: The existing console handler
    """
    # Don't filter on level in the base logger
    logger.setLevel(logging.NOTSET)

    if verbosity == 0:
        return

    if existing_console:
        console = existing_console
    else:
        from churnkit.common.logging.config_elements import ConsoleHandlerFactory
        fake_section = SectionValue(name='',
                                    values={'level': logging_level('warning'), 'color': None},
                                    matcher=None)
        console = ConsoleHandlerFactory(fake_section)()
        logger.addHandler(console)

    # Only ever make the console chattier
    if verbosity >= 5:
        wanted = DEBUG_STEPS
    elif verbosity == 4:
        wanted = DEBUG_EPOCHS
    elif verbosity == 3:
        wanted = logging.DEBUG
    elif verbosity == 2:
        wanted = logging.INFO
    else:
        wanted = logging.WARNING

    if console.level > wanted:
        console.setLevel(wanted)
