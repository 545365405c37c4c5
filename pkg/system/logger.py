# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

import logging
import traceback

from config import config


class Logger:
    _instance: 'Logger' = None

    def __new__(cls) -> 'Logger':
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialize()
        return cls._instance

    def _initialize(self) -> None:
        """
        Initializes the shared logger from the `general.*` config keys.

        Returns:
            None
        """

        self._logger: logging.Logger = logging.getLogger('envelopes')
        self._logger.setLevel(config.get('general.log_level', 'DEBUG'))
        self._logger.propagate = False

        formatter: logging.Formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

        # File handler is optional; a null path keeps runs free of side files
        log_path = config.get('general.log_path')
        if log_path:
            file_handler: logging.FileHandler = logging.FileHandler(log_path, encoding='utf-8')
            file_handler.setLevel(config.get('general.log_level', 'DEBUG'))
            file_handler.setFormatter(formatter)
            self._logger.addHandler(file_handler)

        # Console goes to stderr, stdout is reserved for results
        console_handler: logging.StreamHandler = logging.StreamHandler()
        console_handler.setLevel(config.get('general.console_log_level', 'WARNING'))
        console_handler.setFormatter(formatter)
        self._logger.addHandler(console_handler)

    def log(self, level: int, msg: str, *args, **kwargs) -> None:
        """
        Logs a message with the specified level.

        Args:
            level (int): The logging level.
            msg (str or Exception): The message to log.
            *args: Variable length argument list.
            **kwargs: Arbitrary keyword arguments.
        """
        self._logger.log(level, msg, *args, **kwargs)

    def error(self, msg: str | Exception) -> None:
        self._logger.error(msg)

    def warning(self, msg: str) -> None:
        self._logger.warning(msg)

    def info(self, msg: str) -> None:
        self._logger.info(msg)

    def debug(self, msg: str) -> None:
        self._logger.debug(msg)

    def log_exception(self) -> None:
        """
        Logs the exception currently being handled, with traceback.
        """
        exception_info: str = traceback.format_exc()
        self._logger.error("Exception occurred:\n%s", exception_info)
