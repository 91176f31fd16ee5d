"""Bridge protocol for external featurizer processes.

An external backend is a child process speaking line-delimited JSON over
its standard streams, one message per line, UTF-8:

    -> {"op": "hello"}
    <- {"name": "<backend>", "dim": D, "batch_limit": B}

    -> {"op": "featurize", "clouds": [{"id": "...", "points": [[x,y,z], ...]}, ...]}
    <- {"features": [{"id": "...", "vector": [...]}, ...]}

    -> {"op": "shutdown"}        backend exits with code 0, no response

A backend may answer any request with {"error": "<message>"} and keep its
loop alive. Clouds are sent post-augmentation, so the backend sees exactly
the normalized geometry the builtin descriptor would.

The client validates everything before a vector can reach a bank: response
ids must match request ids one-to-one and in order, every vector must have
the handshake dimension, and all values must be finite. Run this module
(``python -m anchorcloud.backend``) to serve the builtin descriptor over
the same protocol - a reference backend and a differential test target.
"""

from __future__ import annotations

import json
import os
import selectors
import shlex
import subprocess
import sys
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .descriptor import DescriptorConfig, FeatureVector, builtin_descriptor
from .errors import AnchorCloudError, BackendError
from .geometry import AugmentConfig, PointCloud, augment


@dataclass(frozen=True)
class BackendHandshake:
    name: str
    dim: int
    batch_limit: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("backend name must be non-empty")
        if self.dim < 1:
            raise ValueError(f"feature dim must be positive; got {self.dim}")
        if self.batch_limit < 1:
            raise ValueError(f"batch_limit must be positive; got {self.batch_limit}")


class BackendProcess:
    """One backend child process with a single in-flight request."""

    def __init__(self, cmd: Sequence[str] | str, timeout: float = 30.0):
        self.cmd = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self.timeout = timeout
        self._handshake: BackendHandshake | None = None
        self._buffer = b""
        try:
            self._proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                bufsize=0,
            )
        except OSError as exc:
            raise BackendError(f"cannot start backend {self.cmd!r}: {exc}") from exc
        self._selector = selectors.DefaultSelector()
        self._selector.register(self._proc.stdout, selectors.EVENT_READ)

    # -- low-level line transport ------------------------------------------

    def _send(self, obj: dict) -> None:
        data = (json.dumps(obj) + "\n").encode("utf-8")
        try:
            self._proc.stdin.write(data)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendError(f"backend pipe closed: {exc}") from exc

    def _read_line(self) -> bytes:
        deadline = time.monotonic() + self.timeout
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BackendError(f"backend timed out after {self.timeout}s")
            if not self._selector.select(remaining):
                continue
            chunk = os.read(self._proc.stdout.fileno(), 65536)
            if not chunk:
                raise BackendError(
                    f"backend exited (code {self._proc.poll()}) before responding"
                )
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line

    def _request(self, obj: dict) -> dict:
        self._send(obj)
        line = self._read_line()
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BackendError(f"backend sent invalid JSON: {exc}") from None
        if not isinstance(msg, dict):
            raise BackendError(f"backend response is not an object: {msg!r}")
        if "error" in msg:
            raise BackendError(f"backend error: {msg['error']}")
        return msg

    # -- protocol operations ------------------------------------------------

    def hello(self) -> BackendHandshake:
        if self._handshake is None:
            msg = self._request({"op": "hello"})
            try:
                self._handshake = BackendHandshake(
                    name=str(msg["name"]),
                    dim=int(msg["dim"]),
                    batch_limit=int(msg["batch_limit"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise BackendError(f"invalid handshake {msg!r}: {exc}") from None
        return self._handshake

    @property
    def handshake(self) -> BackendHandshake:
        return self.hello()

    def featurize(self, clouds: Sequence[PointCloud]) -> list[FeatureVector]:
        """Send one batch and validate the response against the handshake."""
        h = self.hello()
        if len(clouds) > h.batch_limit:
            raise BackendError(
                f"batch of {len(clouds)} exceeds backend batch_limit {h.batch_limit}"
            )
        msg = self._request(
            {
                "op": "featurize",
                "clouds": [{"id": c.id, "points": c.points.tolist()} for c in clouds],
            }
        )
        rows = msg.get("features")
        if not isinstance(rows, list) or len(rows) != len(clouds):
            raise BackendError(
                f"expected {len(clouds)} features, got {rows if rows is None else len(rows)}"
            )
        features = []
        for cloud, row in zip(clouds, rows):
            got_id = row.get("id") if isinstance(row, dict) else None
            if got_id != cloud.id:
                raise BackendError(
                    f"response id {got_id!r} does not match request id {cloud.id!r}"
                )
            vector = np.asarray(row.get("vector"), dtype=np.float64)
            if vector.ndim != 1 or len(vector) != h.dim:
                raise BackendError(
                    f"vector for {cloud.id!r} has dim {vector.shape}, expected {h.dim}"
                )
            if not np.isfinite(vector).all():
                raise BackendError(f"vector for {cloud.id!r} contains non-finite values")
            features.append(FeatureVector(vector, source=h.name))
        return features

    def shutdown(self) -> int:
        """Request a clean exit and return the backend's exit code."""
        if self._proc.poll() is None:
            try:
                self._send({"op": "shutdown"})
            except BackendError:
                pass
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                self.close()
                raise BackendError(f"backend did not exit within {self.timeout}s")
        self._selector.close()
        return self._proc.returncode

    def close(self) -> None:
        """Kill the process unconditionally (error-path cleanup)."""
        if self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()
        try:
            self._selector.close()
        except (KeyError, OSError):
            pass

    def __enter__(self) -> "BackendProcess":
        try:
            self.hello()
        except BackendError:
            self.close()
            raise
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.shutdown()
        else:
            self.close()


class BackendFeaturizer:
    """Pipeline adapter: chunks batches to the backend's declared limit."""

    def __init__(self, cmd: Sequence[str] | str, timeout: float = 30.0):
        self._backend = BackendProcess(cmd, timeout=timeout)

    @property
    def dim(self) -> int:
        return self._backend.hello().dim

    @property
    def name(self) -> str:
        return self._backend.hello().name

    def __call__(self, clouds: Sequence[PointCloud]) -> list[FeatureVector]:
        limit = self._backend.hello().batch_limit
        features: list[FeatureVector] = []
        for start in range(0, len(clouds), limit):
            features.extend(self._backend.featurize(clouds[start : start + limit]))
        return features

    def shutdown(self) -> int:
        return self._backend.shutdown()

    def close(self) -> None:
        self._backend.close()

    def __enter__(self) -> "BackendFeaturizer":
        self._backend.__enter__()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self._backend.__exit__(exc_type, exc, tb)


# ---------------------------------------------------------------------------
# conformance checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConformanceReport:
    cmd: tuple[str, ...]
    checks: tuple[tuple[str, bool, str], ...]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def summary(self) -> str:
        lines = [f"conformance of {' '.join(self.cmd)}"]
        for name, passed, detail in self.checks:
            lines.append(f"  {'PASS' if passed else 'FAIL'} {name}: {detail}")
        return "\n".join(lines)


def check_conformance(
    cmd: Sequence[str] | str, timeout: float = 30.0, seed: int = 0
) -> ConformanceReport:
    """Exercise a backend against the bridge contract.

    Checks the handshake, id matching and ordering, dimension stability
    across calls, value finiteness, batch-limit handling, and a clean
    shutdown with exit code 0. Stops at the first violated check.
    """
    rng = np.random.default_rng(seed)
    cfg = AugmentConfig(target_points=32, rotate=False)
    clouds = [
        augment(PointCloud(f"conformance-{i}", rng.normal(size=(64, 3))), cfg)
        for i in range(4)
    ]

    results: list[tuple[str, bool, str]] = []
    backend = BackendProcess(cmd, timeout=timeout)

    def run(name: str, fn) -> bool:
        try:
            detail = fn()
            results.append((name, True, detail))
            return True
        except BackendError as exc:
            results.append((name, False, str(exc)))
            return False

    def handshake():
        h = backend.hello()
        return f"name={h.name!r} dim={h.dim} batch_limit={h.batch_limit}"

    def featurize_ids():
        backend.featurize(clouds[:2])  # id/order/dim/finiteness enforced client-side
        return "ids echoed in request order"

    def dim_stability():
        first = backend.featurize(clouds[2:3])
        second = backend.featurize(clouds[3:4])
        dims = {f.dim for f in first + second}
        if dims != {backend.hello().dim}:
            raise BackendError(f"dims drifted across calls: {sorted(dims)}")
        return f"dim {backend.hello().dim} stable across calls"

    def batch_limit():
        size = min(backend.hello().batch_limit, len(clouds))
        backend.featurize(clouds[:size])
        return f"accepted a batch of {size}"

    def shutdown_exit():
        code = backend.shutdown()
        if code != 0:
            raise BackendError(f"exit code {code} after shutdown")
        return "exit code 0"

    try:
        for name, fn in [
            ("handshake", handshake),
            ("featurize-ids", featurize_ids),
            ("dim-stability", dim_stability),
            ("batch-limit", batch_limit),
            ("shutdown-exit", shutdown_exit),
        ]:
            if not run(name, fn):
                break
    finally:
        backend.close()

    return ConformanceReport(cmd=tuple(backend.cmd), checks=tuple(results))


# ---------------------------------------------------------------------------
# reference server: the builtin descriptor behind the protocol
# ---------------------------------------------------------------------------


def _respond(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def serve(mode: str, batch_limit: int, name: str, cfg: DescriptorConfig) -> int:
    dim = cfg.dim if mode == "builtin" else 3
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            _respond({"error": f"invalid JSON request: {exc}"})
            continue
        op = msg.get("op")
        if op == "hello":
            _respond({"name": name, "dim": dim, "batch_limit": batch_limit})
        elif op == "featurize":
            clouds = msg.get("clouds", [])
            if len(clouds) > batch_limit:
                _respond({"error": f"batch of {len(clouds)} exceeds limit {batch_limit}"})
                continue
            try:
                features = []
                for entry in clouds:
                    cloud = PointCloud(
                        str(entry.get("id", "")), np.asarray(entry["points"], dtype=np.float64)
                    )
                    if mode == "builtin":
                        vector = builtin_descriptor(cloud, cfg).values
                    else:
                        # diagnostic stub: the centroid of an augmented cloud,
                        # rounded so it is an exact zero vector
                        vector = np.round(cloud.points.mean(axis=0), 12) + 0.0
                    features.append(
                        {"id": entry.get("id"), "vector": [float(v) for v in vector]}
                    )
                _respond({"features": features})
            except (KeyError, TypeError, ValueError, AnchorCloudError) as exc:
                _respond({"error": f"featurize failed: {exc}"})
        elif op == "shutdown":
            return 0
        else:
            _respond({"error": f"unknown op {op!r}"})
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="python -m anchorcloud.backend",
        description="Serve the builtin descriptor over the featurizer bridge protocol.",
    )
    parser.add_argument("--mode", choices=["builtin", "centroid"], default="builtin")
    parser.add_argument("--batch-limit", type=int, default=64)
    parser.add_argument("--name", default=None)
    parser.add_argument("--pair-bins", type=int, default=64)
    parser.add_argument("--radial-bins", type=int, default=32)
    args = parser.parse_args(argv)
    name = args.name or f"anchorcloud-{args.mode}"
    cfg = DescriptorConfig(pair_bins=args.pair_bins, radial_bins=args.radial_bins)
    return serve(args.mode, args.batch_limit, name, cfg)


if __name__ == "__main__":
    sys.exit(main())
