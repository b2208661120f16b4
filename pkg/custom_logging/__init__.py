import logging
import logging.config
import os
import threading
from pathlib import Path

import yaml


with open(Path(__file__).with_name('logging.yaml'), 'r') as f:
    logging_configuration = yaml.safe_load(f.read())

_configured = False
_lock = threading.Lock()


def logging_setup(name: str, level: int = logging.DEBUG, log_file: str = 'separation.log') -> logging.Logger:
    """
    Return the logger for ``name``, applying the YAML logging configuration the first time any module asks for one.

    The log directory is ``log/`` below the working directory unless ``SEPARATION_LOG_DIR`` points elsewhere.

    :param name: The logger name, usually ``__name__``.
    :param level: The level of the returned logger.
    :param log_file: The file name of the file handler inside the log directory.
    :return: The configured logger.
    """
    global _configured
    with _lock:
        if not _configured:
            log_dir = Path(os.environ.get('SEPARATION_LOG_DIR', 'log'))
            if not log_dir.exists():
                log_dir.mkdir(parents=True)

            logging_configuration['handlers']['file']['filename'] = str(log_dir / log_file)
            logging.config.dictConfig(logging_configuration)
            _configured = True

    logger = logging.getLogger(name)
    logger.setLevel(level)

    return logger
