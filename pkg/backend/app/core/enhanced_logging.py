#!/usr/bin/env python3
"""
Enhanced Logging System for RedunFlow
Provides structured, one-line JSON detail logging for explanation runs,
evaluations and verification checks.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(level: str = "INFO", log_file: Optional[Union[str, Path]] = None):
    """Setup logging configuration"""
    handlers: list = [logging.StreamHandler()]
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(path))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        datefmt=DATE_FORMAT,
        handlers=handlers,
        force=True,
    )


def _to_jsonable(value: Any) -> Any:
    """Make numpy scalars and sets JSON friendly"""
    if hasattr(value, "item") and callable(value.item):
        try:
            return value.item()
        except (ValueError, TypeError):
            pass
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return str(value)


class RedunFlowLogger:
    """Enhanced logger with structured logging for RedunFlow operations"""

    def __init__(self, component_name: str):
        self.component_name = component_name
        self.logger = logging.getLogger(f"redunflow.{component_name}")

    def _payload(self, component: str, details: Dict[str, Any]) -> str:
        log_data = {
            "timestamp": datetime.now().isoformat(),
            "component": component,
            **details,
        }
        return json.dumps(log_data, default=_to_jsonable, sort_keys=True)

    def log_explanation(
        self,
        instance_id: str,
        method: str,
        d: int,
        sample_count: int,
        evaluations: int,
        runtime_seconds: float = 0.0,
    ):
        """Log one per-instance explanation run"""
        details = {
            "instance_id": instance_id,
            "method": method,
            "d": d,
            "sample_count": sample_count,
            "evaluations": evaluations,
            "runtime_seconds": round(runtime_seconds, 6),
        }
        self.logger.info(f"🧮 EXPLANATION: {self._payload('explanation', details)}")

    def log_evaluation(self, protocol: str, instances: int, summary: Dict[str, Any]):
        """Log the outcome of an evaluation protocol"""
        details = {"protocol": protocol, "instances": instances, "summary": summary}
        self.logger.info(f"📊 EVALUATION: {self._payload('evaluation', details)}")

    def log_check(self, check: str, passed: int, failed: int, first_failure: Any = None):
        """Log the outcome of one verification check"""
        details = {
            "check": check,
            "passed": passed,
            "failed": failed,
            "first_failure": first_failure,
        }
        level = logging.INFO if failed == 0 else logging.ERROR
        self.logger.log(level, f"🔎 CHECK: {self._payload('verification', details)}")

    def error(self, message: str, details: Optional[Dict] = None):
        """Log error with optional structured details"""
        if details:
            self.logger.error(f"❌ {message} | Details: {json.dumps(details, default=_to_jsonable)}")
        else:
            self.logger.error(f"❌ {message}")

    def warning(self, message: str, details: Optional[Dict] = None):
        """Log warning with optional structured details"""
        if details:
            self.logger.warning(f"⚠️ {message} | Details: {json.dumps(details, default=_to_jsonable)}")
        else:
            self.logger.warning(f"⚠️ {message}")

    def info(self, message: str, details: Optional[Dict] = None):
        """Log info with optional structured details"""
        if details:
            self.logger.info(f"ℹ️ {message} | Details: {json.dumps(details, default=_to_jsonable)}")
        else:
            self.logger.info(f"ℹ️ {message}")

    def success(self, message: str, details: Optional[Dict] = None):
        """Log success with optional structured details"""
        if details:
            self.logger.info(f"✅ {message} | Details: {json.dumps(details, default=_to_jsonable)}")
        else:
            self.logger.info(f"✅ {message}")


def create_component_logger(component_name: str) -> RedunFlowLogger:
    """Create a logger for a specific component"""
    return RedunFlowLogger(component_name)
