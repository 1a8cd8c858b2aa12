import os
import logging


levels = {'debug': logging.DEBUG,
          'info': logging.INFO,
          'warning': logging.WARNING,
          'error': logging.ERROR,
          'critical': logging.CRITICAL}

LOG_FORMAT = "%(levelname)s - %(asctime)s - %(name)s %(command)s\n%(message)s\n"


def get_logger():
    """Get the logger of the current process. Its name carries
        the process ID so that worker processes do not share
        handlers.

        Output:
            logger: A logging.Logger instance.
    """
    return logging.getLogger("manifold_l1[%d]" % os.getpid())


class CommandFilter(logging.Filter):
    """Tag every record with the command being run.
    """
    def __init__(self, command):
        logging.Filter.__init__(self)
        self.command = command

    def filter(self, record):
        record.command = self.command
        return True


def setup_logger(logfn, command=None):
    """Install a FileHandler on the current process' logger.
        Existing handlers are removed first.

        Inputs:
            logfn: File to receive log entries.
            command: Name of the command being run, shown in every
                entry's header.
                (Default: no command)

        Outputs:
            None
    """
    logger = get_logger()
    disconnect_logger()
    # What gets logged is decided by the verbosity checks in
    # utils.print_info, not by logging's level.
    logger.setLevel(logging.DEBUG)
    logfile = logging.FileHandler(filename=logfn, encoding='utf-8')
    logfile.setFormatter(logging.Formatter(fmt=LOG_FORMAT,
                                           datefmt="%Y-%m-%d %H:%M:%S"))
    logfile.addFilter(CommandFilter(command or "-"))
    logger.addHandler(logfile)


def disconnect_logger():
    """Remove and close all handlers of the current process' logger.
    """
    logger = get_logger()
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def log(msg, levelname):
    get_logger().log(levels[levelname], msg)
