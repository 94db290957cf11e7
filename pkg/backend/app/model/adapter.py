#!/usr/bin/env python3
"""
External model adapter client

Talks to a child process over line-delimited JSON on stdin/stdout:

    {"cmd": "meta"}                              -> {"d": <int>, "classes": <int>}
    {"cmd": "predict", "instances": [[...], ...]} -> {"probs": [[...], ...]}

Any reply carrying an ``error`` key aborts with AdapterProtocolError.
"""

import json
import logging
import shlex
import subprocess
import threading
from typing import Any, Dict, List, Optional

import numpy as np

from backend.app.core.exceptions import AdapterProtocolError, InvalidConfig
from backend.app.model.predictors import PROBABILITY_TOLERANCE, Predictor, PredictorKind

logger = logging.getLogger(__name__)


class AdapterPredictor(Predictor):
    """Predictor served by an external process, one connection per instance"""

    kind = PredictorKind.ADAPTER

    def __init__(self, command: str, batch_size: int = 256):
        if batch_size < 1:
            raise InvalidConfig("adapter batch size must be >= 1", {"batch_size": batch_size})
        self.command = command
        self.batch_size = batch_size
        self.calls = 0
        self._lock = threading.Lock()

        try:
            argv = shlex.split(command)
        except ValueError as e:
            raise InvalidConfig(f"cannot parse adapter command: {e}", {"command": command}) from e
        if not argv:
            raise InvalidConfig("empty adapter command")
        try:
            self._process = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as e:
            raise AdapterProtocolError(f"cannot start adapter: {e}", {"command": command}) from e

        try:
            meta = self._request({"cmd": "meta"})
        except AdapterProtocolError:
            self.close()
            raise
        try:
            self.d = int(meta["d"])
            self.class_count = int(meta["classes"])
        except (KeyError, TypeError, ValueError) as e:
            self.close()
            raise AdapterProtocolError("malformed meta reply", {"reply": meta}) from e
        if self.d < 1 or self.class_count < 2:
            self.close()
            raise AdapterProtocolError("adapter reported invalid dimensions", {"d": self.d, "classes": self.class_count})

        logger.info(f"Connected to adapter '{command}' (d={self.d}, classes={self.class_count})")

    def _request(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        with self._lock:
            if self._process.poll() is not None:
                raise AdapterProtocolError("adapter process is not running", {"returncode": self._process.returncode})
            try:
                self._process.stdin.write(json.dumps(payload) + "\n")
                self._process.stdin.flush()
                line = self._process.stdout.readline()
            except (BrokenPipeError, OSError) as e:
                raise AdapterProtocolError(f"adapter connection failed: {e}") from e

        if not line:
            raise AdapterProtocolError("adapter closed its output", {"returncode": self._process.poll()})
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as e:
            raise AdapterProtocolError("adapter reply is not JSON", {"line": line[:200]}) from e
        if not isinstance(reply, dict):
            raise AdapterProtocolError("adapter reply is not an object", {"line": line[:200]})
        if "error" in reply:
            raise AdapterProtocolError(f"adapter error: {reply['error']}")
        return reply

    def _predict_chunk(self, rows: np.ndarray) -> np.ndarray:
        reply = self._request({"cmd": "predict", "instances": rows.tolist()})
        self.calls += 1
        try:
            probs = np.asarray(reply["probs"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise AdapterProtocolError("predict reply lacks a numeric probs matrix") from e
        if probs.shape != (len(rows), self.class_count):
            raise AdapterProtocolError(
                "predict reply has the wrong shape",
                {"expected": [len(rows), self.class_count], "got": list(probs.shape)},
            )
        if (
            not np.isfinite(probs).all()
            or (probs < -PROBABILITY_TOLERANCE).any()
            or (np.abs(probs.sum(axis=1) - 1.0) > PROBABILITY_TOLERANCE).any()
        ):
            raise AdapterProtocolError("predict reply rows are not probability vectors")
        return probs

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        chunks: List[np.ndarray] = [
            self._predict_chunk(X[start:start + self.batch_size]) for start in range(0, len(X), self.batch_size)
        ]
        return np.vstack(chunks)

    def fork(self) -> "AdapterPredictor":
        return AdapterPredictor(self.command, self.batch_size)

    def close(self, timeout: Optional[float] = 5.0):
        process = getattr(self, "_process", None)
        if process is None or process.poll() is not None:
            return
        try:
            process.stdin.close()
            process.wait(timeout=timeout)
        except (OSError, subprocess.TimeoutExpired):
            logger.warning(f"Adapter '{self.command}' did not exit, killing it")
            process.kill()
            process.wait()
