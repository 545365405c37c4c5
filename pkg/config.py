# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

from system.config_manager import ConfigManager

config = ConfigManager("config.json")
