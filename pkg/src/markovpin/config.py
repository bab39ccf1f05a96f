"""Run configuration files (YAML) with line-accurate error messages.

A run file looks like::

    seed: 7
    samples: 0
    kernel:
      alpha: 0.5
      L: {variant: constant}      # or log-power with rho, or table: [...]
      T_K: 100000                 # or probs: [...] for an explicit law
    chain:
      states: [-1, 1]
      Q: [[0.3, 0.7], [0.7, 0.3]]
      f: [-1, 1]                  # defaults to the states when numeric
      center: false
    grid:
      beta: {start: 0.0, stop: 3.0, num: 31}
      h: [0.0, 0.5]
      N: [1000]

``chain`` may instead hold ``moving_average: {weights, alphabet, probs}``;
Model B runs use ``family: {states, Q, f, gamma}``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .exceptions import ModelError
from .model import (DEFAULT_SUPPORT, DisorderChain, RenewalKernel, build_chain, build_kernel,
                    build_moving_average_chain)
from .modelb import ScaledChainFamily, two_state_family


class ConfigError(Exception):
    def __init__(self, message, source="<config>", line=None, key=None):
        self.source, self.line, self.key = source, line, key
        where = source if line is None else f"{source}:{line}"
        prefix = f"{key}: " if key else ""
        super().__init__(f"{where}: {prefix}{message}")


def _line_map(node, path=(), out=None):
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out[path + (k.value,)] = k.start_mark.line + 1
            _line_map(v, path + (k.value,), out)
            out[path + (k.value,)] = k.start_mark.line + 1  # key line, not value line
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


@dataclass
class RunConfig:
    data: dict
    source: str = "<config>"
    lines: dict = field(default_factory=dict, repr=False)

    # -- access helpers -------------------------------------------------
    def line(self, path) -> int | None:
        path = tuple(path)
        while path:
            if path in self.lines:
                return self.lines[path]
            path = path[:-1]
        return self.lines.get(())

    def error(self, path, message) -> ConfigError:
        key = ".".join(str(p) for p in path) if path else None
        return ConfigError(message, self.source, self.line(path), key)

    def get(self, path, default=None):
        node = self.data
        for p in path:
            if not isinstance(node, dict) or p not in node:
                return default
            node = node[p]
        return node

    def number(self, path, default=None, integer=False):
        v = self.get(path, default)
        if v is None:
            raise self.error(path, "required number is missing")
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.error(path, f"expected a number, got {v!r}")
        if integer:
            if int(v) != v:
                raise self.error(path, f"expected an integer, got {v!r}")
            return int(v)
        return float(v)

    def grid(self, name, default=None) -> np.ndarray:
        path = ("grid", name)
        v = self.get(path, default)
        if v is None:
            raise self.error(path, "grid is missing")
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return np.array([float(v)])
        if isinstance(v, dict):
            try:
                return np.linspace(float(v["start"]), float(v["stop"]), int(v["num"]))
            except (KeyError, TypeError, ValueError):
                raise self.error(path, "range grid needs numeric start, stop and num") from None
        if isinstance(v, list) and v and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            return np.array(v, dtype=float)
        raise self.error(path, f"expected a number, a list of numbers or {{start, stop, num}}, got {v!r}")

    @property
    def seed(self) -> int:
        return self.number(("seed",), 0, integer=True)

    @property
    def samples(self) -> int:
        n = self.number(("samples",), 0, integer=True)
        if n < 0:
            raise self.error(("samples",), "must be >= 0")
        return n

    def digest(self) -> str:
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode()).hexdigest()

    # -- model objects ---------------------------------------------------
    def kernel(self) -> RenewalKernel:
        base = ("kernel",)
        if self.get(base + ("probs",)) is not None:
            probs = self.get(base + ("probs",))
            try:
                return RenewalKernel.from_probs(probs)
            except (ModelError, TypeError, ValueError) as exc:
                raise self.error(base + ("probs",), str(exc)) from None
        alpha = self.number(base + ("alpha",), 0.5)
        T_K = self.number(base + ("T_K",), DEFAULT_SUPPORT, integer=True)
        variant = self.get(base + ("L", "variant"), "constant")
        rho = self.number(base + ("L", "rho"), 0.0)
        table = self.get(base + ("L", "table"))
        try:
            return build_kernel(alpha, variant, T_K, rho=rho, table=table)
        except (ModelError, TypeError, ValueError) as exc:
            raise self.error(base, str(exc)) from None

    def _matrix(self, path):
        Q = self.get(path)
        if Q is None:
            raise self.error(path, "transition matrix is missing")
        try:
            arr = np.array(Q, dtype=float)
        except (TypeError, ValueError):
            raise self.error(path, "transition matrix must be a list of numeric rows") from None
        if arr.ndim != 2:
            raise self.error(path, "transition matrix must be a list of equal-length rows")
        sums = arr.sum(axis=1)
        for i, s in enumerate(sums):
            if abs(s - 1.0) > 1e-14 or np.any(arr[i] < 0):
                raise self.error(path + (i,), f"row {i} is not a probability vector (sum {float(s)!r})")
        return arr

    def _states_scores(self, base):
        states = self.get(base + ("states",))
        if not isinstance(states, list) or not states:
            raise self.error(base + ("states",), "expected a non-empty list of state labels")
        f = self.get(base + ("f",))
        if f is None:
            if not all(isinstance(s, (int, float)) and not isinstance(s, bool) for s in states):
                raise self.error(base + ("f",), "scores are required when states are not numeric")
            f = states
        if not isinstance(f, list) or len(f) != len(states):
            raise self.error(base + ("f",), f"expected {len(states)} scores")
        return states, f

    def chain(self) -> DisorderChain:
        base = ("chain",)
        if self.get(base) is None:
            raise self.error(base, "a disorder chain is required for this command")
        center = bool(self.get(base + ("center",), False))
        ma = self.get(base + ("moving_average",))
        try:
            if ma is not None:
                mb = base + ("moving_average",)
                return build_moving_average_chain(self.get(mb + ("weights",)), self.get(mb + ("alphabet",), [-1, 1]),
                                                  self.get(mb + ("probs",)), center=center)
            states, f = self._states_scores(base)
            Q = self._matrix(base + ("Q",))
            return build_chain(states, f, Q, center=center)
        except (ModelError, TypeError, ValueError) as exc:
            raise self.error(base, str(exc)) from None

    def family(self) -> ScaledChainFamily:
        base = ("family",)
        if self.get(base) is None:
            return two_state_family(0.4)
        gamma = self.number(base + ("gamma",), 0.4)
        try:
            if self.get(base + ("Q",)) is None:
                return two_state_family(gamma)
            states, f = self._states_scores(base)
            Q = self._matrix(base + ("Q",))
            return ScaledChainFamily(build_chain(states, f, Q), gamma)
        except (ModelError, TypeError, ValueError) as exc:
            raise self.error(base, str(exc)) from None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML ({getattr(exc, 'problem', exc)})", source, line) from None
    if data is None:
        data, lines = {}, {}
    else:
        if not isinstance(data, dict):
            raise ConfigError("top level must be a mapping", source, 1)
        lines = _line_map(node)
    return RunConfig(data, source, lines)


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config ({exc.strerror})", str(p)) from None
    return parse_config(text, str(p))
