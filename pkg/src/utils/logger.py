"""
Logger Utility

This module provides centralized logging for the quantum services pipeline:
root logger setup plus structured event helpers that emit one JSON payload
per line.
"""

import logging
import logging.handlers
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Dict, Any
import json


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Setup logging configuration"""

    level = getattr(logging, log_level.upper(), logging.INFO)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    # Console handler writes to stderr; stdout is reserved for CLI results
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    # werkzeug's per-request access lines duplicate log_api_event
    logging.getLogger("werkzeug").setLevel(max(level, logging.WARNING))


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance with the specified name"""
    return logging.getLogger(name)


def _emit(channel: str, label: str, payload: Dict[str, Any], level: int = logging.INFO, **kwargs) -> None:
    """Write one ``Label: {json}`` line; every payload gets a UTC timestamp"""
    payload['timestamp'] = datetime.now(timezone.utc).isoformat()
    get_logger(channel).log(level, f"{label}: {json.dumps(payload)}", **kwargs)


def log_pipeline_event(stage: str, status: str, extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log a pipeline stage transition (validate, generate, deploy, ...)"""
    level = logging.ERROR if status.lower() == "failed" else logging.INFO
    _emit("pipeline_events", "Pipeline Event",
          {'stage': stage, 'status': status, 'extra_data': extra_data or {}}, level)


def log_deployment_event(deployment_id: str, event_type: str, message: str, extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log deployment lifecycle events. Callers pass credential counts, never values."""
    level = logging.WARNING if event_type == "failed" else logging.INFO
    _emit("deployment_events", "Deployment Event", {
        'deployment_id': deployment_id,
        'event_type': event_type,
        'message': message,
        'extra_data': extra_data or {},
    }, level)


def log_execution_event(operation_id: str, backend: str, shots: int, seed: int, duration: float, success: bool) -> None:
    _emit("execution_events", "Execution Event", {
        'operation_id': operation_id,
        'backend': backend,
        'shots': shots,
        'seed': seed,
        'duration_seconds': round(duration, 6),
        'success': success,
    }, logging.INFO if success else logging.WARNING)


def log_performance_event(operation: str, duration: float, success: bool, extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log performance metrics"""
    _emit("performance_events", "Performance Event", {
        'operation': operation,
        'duration_seconds': round(duration, 6),
        'success': success,
        'extra_data': extra_data or {},
    })


def log_api_event(endpoint: str, method: str, status_code: int, duration: float, extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log API requests and responses; 4xx/5xx at WARNING"""
    _emit("api_events", "API Event", {
        'endpoint': endpoint,
        'method': method,
        'status_code': status_code,
        'duration_seconds': round(duration, 6),
        'extra_data': extra_data or {},
    }, logging.WARNING if status_code >= 400 else logging.INFO)


def log_error(error: Exception, context: Optional[str] = None, extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log errors with context and traceback"""
    _emit("errors", "Error", {
        'error_type': type(error).__name__,
        'error_code': getattr(error, 'code', None),
        'error_message': str(error),
        'context': context,
        'extra_data': extra_data or {},
    }, logging.ERROR, exc_info=True)
