"""Experiment runner: config parsing, task execution and result files."""

from .config import ExperimentConfig, ParseError, ValidationError, parse_config
from .emit import IoError, emit
from .runner import ResultRecord, TaskError, run
