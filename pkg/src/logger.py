"""
Logging module for the nonholonomic simulator
Provides structured logging with timestamps and error traces
"""
import logging
import sys
from pathlib import Path
from config import Config


class SimLogger:
    """Process-wide logger for simulation runs"""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(SimLogger, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self._initialized = True
        self.logger = logging.getLogger('NonholonomicSim')
        self.logger.setLevel(getattr(logging, Config.LOG_LEVEL, logging.DEBUG))
        self.logger.propagate = False

        log_dir = Path(__file__).parent.parent
        log_file = log_dir / Config.LOG_FILE

        # File handler, opened on first record
        file_handler = logging.FileHandler(log_file, encoding='utf-8', delay=True)
        file_handler.setLevel(logging.DEBUG)
        file_formatter = logging.Formatter(
            Config.LOG_FORMAT,
            datefmt=Config.LOG_DATE_FORMAT
        )
        file_handler.setFormatter(file_formatter)
        self.logger.addHandler(file_handler)

        # stderr is reserved for the single-line CLI reason code unless asked
        if Config.CONSOLE_LOG:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(logging.INFO)
            console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
            self.logger.addHandler(console_handler)

    def info(self, message):
        """Log info message"""
        self.logger.info(message)

    def debug(self, message):
        """Log debug message"""
        self.logger.debug(message)

    def warning(self, message):
        """Log warning message"""
        self.logger.warning(message)

    def error(self, message, exc_info=False):
        """Log error message with optional exception trace"""
        self.logger.error(message, exc_info=exc_info)

    def log_run(self, command, **params):
        """Log the start of a CLI command"""
        rendered = ", ".join(f"{k}={v}" for k, v in sorted(params.items()) if v is not None)
        self.info(f"RUN [{command}] {rendered}")

    def log_integration(self, tag, method, steps, t_end):
        """Log a finished integration"""
        self.debug(f"INTEGRATE [{tag}] method={method} steps={steps} t_end={t_end}")

    def log_check(self, name, value, tolerance, passed):
        """Log a numerical check against its tolerance"""
        status = 'PASS' if passed else 'FAIL'
        self.info(f"CHECK [{name}] value={value:.3e} tol={tolerance:.3e} - {status}")

    def log_error_trace(self, error, context=""):
        """Log error with full trace"""
        msg = f"ERROR: {context} - {str(error)}" if context else f"ERROR: {str(error)}"
        self.error(msg, exc_info=True)


# Global logger instance
logger = SimLogger()
