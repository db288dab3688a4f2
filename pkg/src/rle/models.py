"""Black-box scoring: built-in synthetic models and the external bridge.

A model scores batches of (possibly permuted) raw inputs.  Three kinds are
provided: synthetic models with planted pairwise ground truth (scored from
placement metadata, exact by construction), in-process callables (handy for
tests and custom scoring functions), and a client for external model
processes speaking newline-delimited JSON over stdio.
"""

from __future__ import annotations

import base64
import json
import os
import queue
import subprocess
import threading
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import math

import numpy as np

from .decompose import IMAGE, TEXT, ImageBuffer, SlotLayout
from .errors import (
    HandshakeTimeout,
    ModelUnavailable,
    ProtocolError,
    ScoreNotFinite,
    SpawnFailed,
)

PROTOCOL_VERSION = 1
DEFAULT_HANDSHAKE_TIMEOUT = 30.0
TIMEOUT_ENV_VAR = "RLE_BRIDGE_TIMEOUT_SECS"


@dataclass(frozen=True)
class ScoreInput:
    """One raw input plus the placement metadata that produced it.

    placement/layout are None for inputs that are not permuted samples
    (e.g. mean-filled images during evaluation).
    """

    modality: str  # "image" | "text"
    raw: Union[ImageBuffer, str]
    placement: Optional[tuple] = None
    layout: Optional[SlotLayout] = None


class Model:
    """Scoring interface shared by all model kinds."""

    batch_size: int = 64

    def score_batch(self, inputs, target_class: int = 0):
        """Return one finite float per input, order-preserving."""
        raise NotImplementedError

    def score_all(self, inputs, target_class: int = 0):
        """score_batch in batch_size chunks, concatenated."""
        out = []
        for start in range(0, len(inputs), self.batch_size):
            out.extend(
                self.score_batch(inputs[start:start + self.batch_size],
                                 target_class)
            )
        return out

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted pairwise ground truth: score = bias + sum coeff * adjacent(u,v)."""

    terms: tuple = ()  # of ((u, v), coefficient)
    bias: float = 0.0
    noise_sigma: float = 0.0
    noise_seed: int = 0

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        """Parse "pairs=2-5:1.0,0-1:-1;bias=0.3;sigma=0.05;noise_seed=7"."""
        terms = []
        bias = 0.0
        sigma = 0.0
        noise_seed = 0
        for part in filter(None, text.split(";")):
            key, _, value = part.partition("=")
            key = key.strip()
            if key == "pairs":
                for item in filter(None, value.split(",")):
                    pair_str, _, coeff_str = item.partition(":")
                    u, v = (int(x) for x in pair_str.split("-"))
                    terms.append(((u, v), float(coeff_str or 1.0)))
            elif key == "bias":
                bias = float(value)
            elif key == "sigma":
                sigma = float(value)
            elif key == "noise_seed":
                noise_seed = int(value)
            else:
                raise ValueError(f"unknown synthetic spec field {key!r}")
        return cls(terms=tuple(terms), bias=bias, noise_sigma=sigma,
                   noise_seed=noise_seed)


class SyntheticModel(Model):
    """Scores permuted samples from their placement metadata.

    Noise is a pure function of (noise_seed, placement), so identical inputs
    always score identically regardless of call order.
    """

    def __init__(self, spec: SyntheticSpec, batch_size: int = 64):
        self.spec = spec
        self.batch_size = batch_size

    def score_batch(self, inputs, target_class: int = 0):
        return [self._score_one(inp) for inp in inputs]

    def _score_one(self, inp: ScoreInput) -> float:
        if inp.placement is None or inp.layout is None:
            raise ValueError(
                "synthetic models score placement metadata; input has none"
            )
        p = inp.placement
        score = self.spec.bias
        for (u, v), coeff in self.spec.terms:
            want = {u, v}
            for s, t in inp.layout.adjacency:
                if {p[s], p[t]} == want:
                    score += coeff
                    break
        if self.spec.noise_sigma > 0:
            key = zlib.crc32(np.asarray(p, dtype=np.int64).tobytes())
            rng = np.random.default_rng([self.spec.noise_seed, key])
            score += float(rng.normal(0.0, self.spec.noise_sigma))
        return float(score)


class CallableModel(Model):
    """Wraps a plain Python function f(raw, target_class) -> float."""

    def __init__(self, fn: Callable, batch_size: int = 64):
        self.fn = fn
        self.batch_size = batch_size

    def score_batch(self, inputs, target_class: int = 0):
        scores = [float(self.fn(inp.raw, target_class)) for inp in inputs]
        for s in scores:
            if not math.isfinite(s):
                raise ScoreNotFinite(f"callable model returned {s}")
        return scores


def _encode_input(inp: ScoreInput) -> dict:
    if inp.modality == IMAGE:
        img = inp.raw
        return {
            "width": img.width,
            "height": img.height,
            "channels": 3,
            "pixels": base64.b64encode(img.pixels).decode("ascii"),
        }
    return {"text": inp.raw}


class BridgeModel(Model):
    """Client for an external model process.

    Wire format: one JSON object per line over the child's stdin/stdout.
    The handshake is {"type":"hello","protocol":1} -> {"type":"ready",...};
    each {"type":"score"} request must be answered by exactly one response
    echoing its id.  One request is in flight at a time per handle.
    """

    def __init__(self, process: subprocess.Popen, batch_size: int = 64,
                 handshake_timeout: Optional[float] = None):
        self._proc = process
        self.batch_size = batch_size
        self._next_id = 1
        self._lock = threading.Lock()
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        timeout = handshake_timeout
        if timeout is None:
            timeout = float(os.environ.get(TIMEOUT_ENV_VAR,
                                           DEFAULT_HANDSHAKE_TIMEOUT))
        self._handshake(timeout)

    def _read_loop(self):
        try:
            for line in self._proc.stdout:
                line = line.strip()
                if line:
                    self._lines.put(line)
        finally:
            self._lines.put(None)  # EOF sentinel

    def _read_message(self, timeout: float) -> dict:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise HandshakeTimeout(
                f"no bridge message within {timeout:.0f}s"
            ) from None
        if line is None:
            raise ModelUnavailable("bridge process closed its stdout")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"bridge sent invalid JSON: {line[:200]}") from exc
        if not isinstance(msg, dict):
            raise ProtocolError("bridge message is not a JSON object")
        return msg

    def _send(self, obj: dict):
        if self._proc.poll() is not None:
            raise ModelUnavailable(
                f"bridge process exited with code {self._proc.returncode}"
            )
        try:
            self._proc.stdin.write(json.dumps(obj, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ModelUnavailable("bridge stdin pipe is closed") from exc

    def _handshake(self, timeout: float):
        self._send({"type": "hello", "protocol": PROTOCOL_VERSION})
        msg = self._read_message(timeout)
        if msg.get("type") != "ready" or msg.get("protocol") != PROTOCOL_VERSION:
            raise ProtocolError(f"bad handshake reply: {msg}")
        self.modalities = tuple(msg.get("modalities", ()))

    def score_batch(self, inputs, target_class: int = 0):
        if not inputs:
            return []
        modality = inputs[0].modality
        with self._lock:
            request_id = self._next_id
            self._next_id += 1
            self._send({
                "type": "score",
                "id": request_id,
                "modality": modality,
                "target_class": int(target_class),
                "inputs": [_encode_input(inp) for inp in inputs],
            })
            timeout = float(os.environ.get(TIMEOUT_ENV_VAR,
                                           DEFAULT_HANDSHAKE_TIMEOUT))
            msg = self._read_message(timeout)
        if msg.get("type") == "error":
            raise ProtocolError(f"bridge error: {msg.get('message')}")
        if msg.get("type") != "scores" or msg.get("id") != request_id:
            raise ProtocolError(f"unexpected bridge reply: {msg}")
        scores = msg.get("scores")
        if not isinstance(scores, list) or len(scores) != len(inputs):
            raise ProtocolError(
                f"expected {len(inputs)} scores, got {scores!r}"
            )
        out = []
        for s in scores:
            if not isinstance(s, (int, float)) or not math.isfinite(s):
                raise ScoreNotFinite(f"bridge returned non-finite score {s!r}")
            out.append(float(s))
        return out

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


def spawn_bridge(command: Sequence[str], batch_size: int = 64,
                 handshake_timeout: Optional[float] = None) -> BridgeModel:
    """Start a bridge child process and complete the handshake."""
    try:
        proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
    except (FileNotFoundError, PermissionError, OSError) as exc:
        raise SpawnFailed(f"cannot start bridge {command!r}: {exc}") from exc
    try:
        return BridgeModel(proc, batch_size=batch_size,
                           handshake_timeout=handshake_timeout)
    except Exception:
        proc.kill()
        raise
