# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from system.exception_handler import ConfigNotFoundError, InvalidConfigError


class ConfigManager:
    """
    Process-wide view of the JSON config file.

    The first instantiation fixes the path; relative paths resolve against the
    project root, so tests and the CLI read the same file from any directory.
    """
    _instance: Optional['ConfigManager'] = None
    _init_path: Optional[str] = None

    def __new__(cls, config_path: Union[str, Path]) -> 'ConfigManager':
        if not os.path.isabs(config_path):
            project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
            config_path = os.path.join(project_root, config_path)
        if cls._instance is None:
            cls._instance = super(ConfigManager, cls).__new__(cls)
            cls._instance._config_path = str(config_path)
            cls._instance._config = cls._instance.read_config()
            cls._init_path = str(config_path)
        elif str(config_path) != cls._init_path:
            raise ValueError("Cannot instantiate ConfigManager with a different config path")
        return cls._instance

    def read_config(self) -> Dict[str, Any]:
        """
        Reads and parses the config file.

        Returns:
            Dict[str, Any]: The top-level JSON object.

        Raises:
            ConfigNotFoundError: If the file does not exist.
            InvalidConfigError: If the file is not a JSON object.
        """
        try:
            with open(self._config_path, 'r', encoding='utf-8') as config_file:
                config_data = json.load(config_file)
        except FileNotFoundError:
            raise ConfigNotFoundError(self._config_path)
        except json.JSONDecodeError as e:
            raise InvalidConfigError(f"Invalid JSON in configuration file: {e}")
        if not isinstance(config_data, dict):
            raise InvalidConfigError("Configuration must be a JSON object")
        return config_data

    def get(self, keys: str, default: Optional[Any] = None) -> Any:
        """
        Returns a value from the config.

        Args:
            keys (str): Dotted path, e.g. 'simulation.threads'.
            default (Optional[Any]): Returned when any part of the path is missing.

        Returns:
            Any: The value.
        """
        val = self._config
        try:
            for key in keys.split('.'):
                val = val[key]
            return val
        except (KeyError, TypeError):
            return default

    def set(self, keys: str, value: Any) -> None:
        """
        Overrides a value for the running process; the file is left untouched.

        Args:
            keys (str): Dotted path; missing sections are created.
            value (Any): The value.
        """
        *sections, last = keys.split('.')
        val = self._config
        for key in sections:
            val = val.setdefault(key, {})
        val[last] = value
