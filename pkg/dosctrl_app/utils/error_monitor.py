import logging
import time
from typing import Dict, Any, Optional
from collections import defaultdict, deque

from .errors import (CertificationError, ConfigError, DimensionError, DomainError,
                     EmptySequenceError, InfeasibleError, InputContractError)


class ErrorMonitor:
    """Track errors raised by the toolkit and turn them into one-line messages"""

    def __init__(self):
        self.error_counts = defaultdict(int)
        self.recent_errors = deque(maxlen=100)
        self.error_patterns = defaultdict(int)
        self.logger = logging.getLogger('dosctrl.errors')

    def record_error(self, error: Exception, command: Optional[str] = None,
                     additional_context: Optional[Dict[str, Any]] = None) -> str:
        """Record an error and return a user-facing message"""
        error_type = type(error).__name__
        error_message = str(error)

        self.recent_errors.append({
            'timestamp': time.time(),
            'type': error_type,
            'message': error_message,
            'command': command,
            'context': additional_context or {}
        })
        self.error_counts[error_type] += 1
        pattern = self._extract_error_pattern(error)
        self.error_patterns[pattern] += 1

        self.logger.debug(f"Error recorded - Type: {error_type}, Message: {error_message[:200]}, "
                          f"Command: {command}")

        return self._get_user_friendly_message(pattern, error_message)

    def _extract_error_pattern(self, error: Exception) -> str:
        """Categorize by exception type"""
        by_type = (
            (ConfigError, 'config'),
            (CertificationError, 'certificate'),
            (InfeasibleError, 'infeasible'),
            (DimensionError, 'dimension'),
            (EmptySequenceError, 'no_success'),
            (InputContractError, 'contract'),
            (DomainError, 'domain'),
            (OSError, 'file'),
        )
        for cls, pattern in by_type:
            if isinstance(error, cls):
                return pattern
        return 'unknown'

    def _get_user_friendly_message(self, pattern: str, error_message: str) -> str:
        prefixes = {
            'config': 'Invalid configuration',
            'certificate': 'Cannot certify the closed loop',
            'infeasible': 'Stability condition cannot be met',
            'dimension': 'Matrix dimensions do not match',
            'no_success': 'No transmission got through',
            'contract': 'Controller input contract broken',
            'domain': 'Parameter out of range',
            'file': 'Cannot access a file',
            'unknown': 'Unexpected error',
        }
        return f"{prefixes.get(pattern, prefixes['unknown'])}: {error_message}"


# Global error monitor instance
error_monitor = ErrorMonitor()
