#!/usr/bin/env python3
"""
Logger Module

Run logging for the command-line tools.
Tracks operations (certify, simulate, dos-fit, reproduce), their timing,
the artifacts they write, and errors. Console output goes to stderr so
stdout stays reserved for the summary path.
"""

import os
import sys
import json
import time
import logging
from typing import Dict, List, Any, Optional
from pathlib import Path
from dataclasses import dataclass
from datetime import datetime
from enum import Enum


class LogLevel(Enum):
    """Log levels for run operations"""
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"

    @classmethod
    def parse(cls, value: str) -> 'LogLevel':
        try:
            return cls(str(value).lower())
        except ValueError:
            return cls.INFO


class OperationType(Enum):
    """Types of toolkit operations"""
    CERTIFY = "certify"
    SIMULATE = "simulate"
    DOS_FIT = "dos_fit"
    REPRODUCE = "reproduce"
    SWEEP = "sweep"
    FILE_IO = "file_io"
    VALIDATION = "validation"


@dataclass
class LogEntry:
    """Single log entry"""
    timestamp: float
    level: LogLevel
    operation_type: OperationType
    message: str
    file_path: Optional[str] = None
    metadata: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'timestamp': self.timestamp,
            'datetime': datetime.fromtimestamp(self.timestamp).isoformat(),
            'level': self.level.value,
            'operation_type': self.operation_type.value,
            'message': self.message,
            'file_path': self.file_path,
            'metadata': self.metadata or {}
        }


@dataclass
class PerformanceMetrics:
    """Timing of one operation"""
    operation_id: str
    operation_type: OperationType
    start_time: float
    end_time: float
    duration: float
    success: bool = True
    seed: Optional[int] = None
    rows: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'operation_id': self.operation_id,
            'operation_type': self.operation_type.value,
            'start_time': self.start_time,
            'end_time': self.end_time,
            'duration': self.duration,
            'start_datetime': datetime.fromtimestamp(self.start_time).isoformat(),
            'end_datetime': datetime.fromtimestamp(self.end_time).isoformat(),
            'success': self.success,
            'seed': self.seed,
            'rows': self.rows
        }


class RunLogger:
    """Logger for one command-line session; also routes the dosctrl.* library loggers"""

    def __init__(self, log_dir: str = "logs",
                 enable_file_logging: bool = False,
                 enable_console_logging: bool = True,
                 log_level: LogLevel = LogLevel.INFO,
                 stream=None):

        self.log_dir = Path(log_dir)
        self.enable_file_logging = enable_file_logging
        self.enable_console_logging = enable_console_logging
        self.log_level = log_level

        self.log_entries: List[LogEntry] = []
        self.performance_metrics: List[PerformanceMetrics] = []
        self.artifacts: Dict[str, str] = {}
        self.active_operations: Dict[str, float] = {}

        self.logger = logging.getLogger('dosctrl')
        self.logger.setLevel(getattr(logging, self.log_level.value.upper()))
        self._handlers: List[logging.Handler] = []

        self._setup_file_logging()
        self._setup_console_logging(stream)

        self.session_id = self._generate_session_id()
        self.session_start = time.time()

        self.log(LogLevel.DEBUG, OperationType.VALIDATION,
                 f"RunLogger initialized - Session: {self.session_id}")

    def _add_handler(self, handler: logging.Handler, fmt: str):
        handler.setLevel(getattr(logging, self.log_level.value.upper()))
        handler.setFormatter(logging.Formatter(fmt))
        self.logger.addHandler(handler)
        self._handlers.append(handler)

    def _setup_file_logging(self):
        if not self.enable_file_logging:
            return
        self.log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.main_log_file = self.log_dir / f"dosctrl_{timestamp}.log"
        self._add_handler(
            logging.FileHandler(self.main_log_file, encoding='utf-8'),
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )

    def _setup_console_logging(self, stream):
        if not self.enable_console_logging:
            return
        self._add_handler(logging.StreamHandler(stream or sys.stderr), '%(levelname)s: %(message)s')

    def _generate_session_id(self) -> str:
        return f"session_{int(time.time())}_{os.getpid()}"

    def log(self, level: LogLevel, operation_type: OperationType,
            message: str, file_path: str = None, metadata: Dict[str, Any] = None):
        entry = LogEntry(
            timestamp=time.time(),
            level=level,
            operation_type=operation_type,
            message=message,
            file_path=file_path,
            metadata=metadata
        )
        self.log_entries.append(entry)

        log_msg = message
        if file_path:
            log_msg += f" [{file_path}]"
        getattr(self.logger, level.value)(log_msg)

    def log_artifact(self, name: str, path, operation_type: OperationType = OperationType.FILE_IO):
        """Record a file written by an operation"""
        self.artifacts[name] = str(path)
        self.log(LogLevel.DEBUG, operation_type, f"Wrote {name}", file_path=str(path))

    def start_operation(self, operation_type: OperationType, operation_id: str = None) -> str:
        if operation_id is None:
            operation_id = f"{operation_type.value}_{int(time.time() * 1000)}"
        self.active_operations[operation_id] = time.time()
        self.log(LogLevel.DEBUG, operation_type, f"Started operation: {operation_id}",
                 metadata={'operation_id': operation_id})
        return operation_id

    def end_operation(self, operation_id: str, operation_type: OperationType,
                      success: bool = True, seed: int = None, rows: int = None):
        if operation_id not in self.active_operations:
            self.log(LogLevel.WARNING, OperationType.VALIDATION,
                     f"Attempted to end unknown operation: {operation_id}")
            return

        start_time = self.active_operations.pop(operation_id)
        end_time = time.time()
        duration = end_time - start_time
        self.performance_metrics.append(PerformanceMetrics(
            operation_id=operation_id,
            operation_type=operation_type,
            start_time=start_time,
            end_time=end_time,
            duration=duration,
            success=success,
            seed=seed,
            rows=rows
        ))

        status = "completed" if success else "failed"
        self.log(
            LogLevel.INFO if success else LogLevel.ERROR,
            operation_type,
            f"Operation {status}: {operation_id} ({duration:.3f}s)",
            metadata={'operation_id': operation_id, 'duration': duration, 'success': success}
        )

    def log_error(self, operation_type: OperationType, error: Exception,
                  context: Dict[str, Any] = None):
        self.log(
            LogLevel.ERROR, operation_type,
            f"Error: {type(error).__name__}: {str(error)}",
            metadata={
                'error_type': type(error).__name__,
                'error_message': str(error),
                'context': context or {}
            }
        )

    def get_session_summary(self) -> Dict[str, Any]:
        operation_counts: Dict[str, int] = {}
        level_counts: Dict[str, int] = {}
        for entry in self.log_entries:
            op_type = entry.operation_type.value
            operation_counts[op_type] = operation_counts.get(op_type, 0) + 1
            level_counts[entry.level.value] = level_counts.get(entry.level.value, 0) + 1

        durations = [m.duration for m in self.performance_metrics]
        return {
            'session_id': self.session_id,
            'session_start': self.session_start,
            'session_duration': time.time() - self.session_start,
            'total_log_entries': len(self.log_entries),
            'total_operations': len(self.performance_metrics),
            'failed_operations': sum(1 for m in self.performance_metrics if not m.success),
            'active_operations': len(self.active_operations),
            'operation_counts': operation_counts,
            'level_counts': level_counts,
            'artifacts': dict(self.artifacts),
            'performance': {
                'total_duration': sum(durations),
                'max_operation_duration': max(durations, default=0.0),
            }
        }

    def export_logs(self, output_dir: str = None) -> Dict[str, str]:
        """Write the session log and performance metrics as JSON"""
        output_dir = Path(output_dir) if output_dir is not None else self.log_dir
        output_dir.mkdir(parents=True, exist_ok=True)

        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        files_created = {}

        main_log_file = output_dir / f"run_logs_{timestamp}.json"
        with open(main_log_file, 'w', encoding='utf-8') as f:
            json.dump({
                'session_summary': self.get_session_summary(),
                'log_entries': [entry.to_dict() for entry in self.log_entries]
            }, f, indent=2, default=str)
        files_created['main_logs'] = str(main_log_file)

        if self.performance_metrics:
            perf_log_file = output_dir / f"performance_{timestamp}.json"
            with open(perf_log_file, 'w', encoding='utf-8') as f:
                json.dump({
                    'session_id': self.session_id,
                    'metrics': [metric.to_dict() for metric in self.performance_metrics]
                }, f, indent=2, default=str)
            files_created['performance'] = str(perf_log_file)

        return files_created

    def close(self):
        for handler in self._handlers:
            self.logger.removeHandler(handler)
            handler.close()
        self._handlers = []

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type:
            self.log_error(OperationType.VALIDATION, exc_val)
        if self.enable_file_logging:
            self.export_logs()
        self.log(LogLevel.DEBUG, OperationType.VALIDATION,
                 f"Session ended - Duration: {time.time() - self.session_start:.2f}s")
        self.close()
