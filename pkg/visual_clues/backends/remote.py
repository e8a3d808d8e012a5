import logging
import threading

import requests

from ..errors import BackendError
from .base import CAPABILITIES, ModelBackend

LOG = logging.getLogger(__name__)

# Transport-level failures that earn one retry; 4xx answers never do.
_RETRYABLE = (requests.ConnectionError, requests.Timeout)


class RemoteBackend(ModelBackend):
    """JSON-over-HTTP backend (``/v1/<capability>`` POST endpoints).

    A :class:`threading.BoundedSemaphore` per capability caps in-flight
    requests at ``max_in_flight``; the session is shared between worker
    threads (requests' connection pool is thread-safe for this use).
    """

    kind = "remote"

    def __init__(self, backend_cfg):
        self.cfg = backend_cfg
        self.timeout_s = float(backend_cfg.timeout_ms) / 1000.0
        self.session = requests.Session()
        self.session.headers["Content-Type"] = "application/json"
        if backend_cfg.bearer_token:
            self.session.headers["Authorization"] = f"Bearer {backend_cfg.bearer_token}"
        self._slots = {c: threading.BoundedSemaphore(int(backend_cfg.max_in_flight)) for c in CAPABILITIES}

    def endpoint(self, capability):
        return self.cfg.endpoints[capability]

    def _post(self, capability, payload):
        url = self.endpoint(capability)
        last_exc = None
        for attempt in range(2):
            with self._slots[capability]:
                try:
                    resp = self.session.post(url, json=payload, timeout=self.timeout_s)
                except _RETRYABLE as exc:
                    last_exc = exc
                    LOG.warning("%s: transport error on attempt %d: %s", url, attempt + 1, exc)
                    continue
            if 400 <= resp.status_code < 500:
                raise BackendError(f"request rejected with HTTP {resp.status_code}", endpoint=url,
                                   cause=resp.text[:200])
            if resp.status_code >= 500:
                last_exc = requests.HTTPError(f"HTTP {resp.status_code}")
                LOG.warning("%s: server error on attempt %d: HTTP %d", url, attempt + 1, resp.status_code)
                continue
            try:
                return resp.json()
            except ValueError as exc:
                raise BackendError("response is not valid JSON", endpoint=url, cause=exc) from exc
        raise BackendError("backend unreachable", endpoint=url, cause=last_exc)

    def _field(self, capability, body, key):
        if not isinstance(body, dict) or not isinstance(body.get(key), list):
            raise BackendError(f"response lacks list field {key!r}", endpoint=self.endpoint(capability))
        return body[key]

    def _image_payload(self, image, boxes):
        payload = {"image_b64": image.b64()}
        if boxes is not None:
            payload["boxes"] = [list(map(float, b[:4])) for b in boxes]
        return payload

    def embed_texts(self, texts):
        body = self._post("embed_text", {"texts": list(texts)})
        return self._field("embed_text", body, "embeddings")

    def embed_image(self, image, boxes=None):
        body = self._post("embed_image", self._image_payload(image, boxes))
        return self._field("embed_image", body, "embeddings")

    def caption(self, image, boxes=None):
        body = self._post("caption", self._image_payload(image, boxes))
        return self._field("caption", body, "captions")

    def detect(self, image):
        body = self._post("detect", {"image_b64": image.b64()})
        return self._field("detect", body, "boxes")

    def complete(self, prompt, n, temperature, frequency_penalty, max_tokens):
        body = self._post(
            "complete",
            {
                "prompt": prompt,
                "n": int(n),
                "temperature": float(temperature),
                "frequency_penalty": float(frequency_penalty),
                "max_tokens": int(max_tokens),
            },
        )
        return self._field("complete", body, "completions")

    def close(self):
        self.session.close()
