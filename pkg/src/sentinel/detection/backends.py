"""Detector backends behind one interface.

Three implementations:
  mock:<path>    scripted JSON file mapping image id -> detections list
  remote:<url>   HTTP service; raster bytes in, detection JSON out
  model:<path>   TorchScript network taking a (1,3,416,416) normalized tensor

All backends answer in input-size (416x416) coordinates with items shaped
{"box": [x_min, y_min, x_max, y_max], "class": "wildfire"|"smoke",
 "confidence": float}.
"""
from __future__ import annotations

import json
import queue
import threading
from pathlib import Path

import numpy as np

from .core import (
    BackendUnavailable,
    DetectorConfig,
    InferenceTimeout,
    MalformedBackendOutput,
)


class DetectorBackend:
    """One backend handle; serves a single in-flight inference at a time."""

    model_id: str = "unknown"

    def infer(self, pixels: np.ndarray, image_id: str) -> list[dict]:
        raise NotImplementedError


class MockBackend(DetectorBackend):
    """Replays detections from a JSON script keyed by image id.

    The optional reserved key "model_id" names the pretend model; every
    other top-level key is an image id mapped to its detections list.
    """

    def __init__(self, script_path: str):
        try:
            doc = json.loads(Path(script_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BackendUnavailable(f"mock script {script_path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise BackendUnavailable(f"mock script {script_path}: expected an object")
        self.model_id = str(doc.pop("model_id", "mock"))
        self._by_image = doc

    def infer(self, pixels: np.ndarray, image_id: str) -> list[dict]:
        dets = self._by_image.get(image_id, [])
        if not isinstance(dets, list):
            raise MalformedBackendOutput(f"mock entry for {image_id!r} is not a list")
        return dets


class RemoteBackend(DetectorBackend):
    """POSTs the raster to an HTTP detector and parses the JSON reply.

    Wire format: request body is the raw uint8 buffer, dimensions declared
    in headers; response is {"model_id": str, "detections": [...]}.
    """

    def __init__(self, url: str, timeout_s: float = 30.0):
        import httpx

        self._url = url
        self._client = httpx.Client(timeout=timeout_s)
        self.model_id = "remote"

    def infer(self, pixels: np.ndarray, image_id: str) -> list[dict]:
        import httpx

        channels = 1 if pixels.ndim == 2 else pixels.shape[2]
        headers = {
            "Content-Type": "application/octet-stream",
            "X-Image-Width": str(pixels.shape[1]),
            "X-Image-Height": str(pixels.shape[0]),
            "X-Image-Channels": str(channels),
            "X-Image-Id": image_id,
        }
        try:
            resp = self._client.post(
                self._url, content=pixels.tobytes(), headers=headers
            )
        except httpx.TimeoutException as exc:
            raise InferenceTimeout(f"{self._url}: {exc}") from exc
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"{self._url}: {exc}") from exc
        if resp.status_code >= 500 or resp.status_code == 503:
            raise BackendUnavailable(f"{self._url}: HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise MalformedBackendOutput(f"{self._url}: HTTP {resp.status_code}")
        try:
            doc = resp.json()
            dets = doc["detections"]
        except (ValueError, KeyError) as exc:
            raise MalformedBackendOutput(f"{self._url}: bad response body") from exc
        self.model_id = str(doc.get("model_id", "remote"))
        if not isinstance(dets, list):
            raise MalformedBackendOutput(f"{self._url}: detections is not a list")
        return dets

    def close(self) -> None:
        self._client.close()


class ModelFileBackend(DetectorBackend):
    """Runs a serialized TorchScript network from disk.

    Contract: input is a (1, 3, H, W) float tensor scaled to [0,1]; output is
    an (N, 6) tensor of [x_min, y_min, x_max, y_max, class_id, confidence]
    rows in input-frame coordinates, class ids 0=wildfire, 1=smoke.
    """

    def __init__(self, model_path: str):
        try:
            import torch
        except ImportError as exc:  # pragma: no cover
            raise BackendUnavailable("torch is required for model-file backends") from exc
        try:
            self._model = torch.jit.load(model_path, map_location="cpu")
            self._model.eval()
        except (OSError, RuntimeError, ValueError) as exc:
            raise BackendUnavailable(f"cannot load model {model_path}: {exc}") from exc
        self._torch = torch
        self.model_id = Path(model_path).stem

    def infer(self, pixels: np.ndarray, image_id: str) -> list[dict]:
        from ..imagery import ID_TO_CLASS

        torch = self._torch
        if pixels.ndim == 2:
            pixels = np.stack([pixels] * 3, axis=-1)
        tensor = torch.from_numpy(
            pixels.astype(np.float32).transpose(2, 0, 1) / 255.0
        ).unsqueeze(0)
        with torch.no_grad():
            try:
                out = self._model(tensor)
            except RuntimeError as exc:
                raise MalformedBackendOutput(f"model forward failed: {exc}") from exc
        rows = out.detach().cpu().numpy()
        if rows.ndim != 2 or (rows.size and rows.shape[1] != 6):
            raise MalformedBackendOutput(f"expected (N,6) output, got {rows.shape}")
        dets = []
        for x0, y0, x1, y1, class_id, conf in rows:
            class_id = int(round(float(class_id)))
            if class_id not in ID_TO_CLASS:
                raise MalformedBackendOutput(f"unknown class id {class_id}")
            dets.append(
                {
                    "box": [float(x0), float(y0), float(x1), float(y1)],
                    "class": ID_TO_CLASS[class_id].value,
                    "confidence": float(conf),
                }
            )
        return dets


def create_backend(cfg: DetectorConfig) -> DetectorBackend:
    """Build a backend handle from the config's "<kind>:<target>" spec."""
    spec = cfg.backend
    kind, sep, target = spec.partition(":")
    if not sep or not target:
        raise BackendUnavailable(f"bad backend spec {spec!r}; want kind:target")
    if kind == "mock":
        return MockBackend(target)
    if kind == "remote":
        return RemoteBackend(target, timeout_s=cfg.timeout_s)
    if kind == "model":
        return ModelFileBackend(target)
    raise BackendUnavailable(f"unknown backend kind {kind!r}")


class BackendPool:
    """Fixed pool of backend handles shared across request workers.

    Each handle serves one inference at a time; acquire() blocks until a
    handle is free.
    """

    def __init__(self, cfg: DetectorConfig, size: int = 4):
        self._handles: queue.Queue[DetectorBackend] = queue.Queue()
        self._lock = threading.Lock()
        for _ in range(max(size, 1)):
            self._handles.put(create_backend(cfg))

    def acquire(self) -> "PooledHandle":
        return PooledHandle(self)


class PooledHandle:
    def __init__(self, pool: BackendPool):
        self._pool = pool
        self._backend: DetectorBackend | None = None

    def __enter__(self) -> DetectorBackend:
        self._backend = self._pool._handles.get()
        return self._backend

    def __exit__(self, *exc_info) -> None:
        if self._backend is not None:
            self._pool._handles.put(self._backend)
            self._backend = None
