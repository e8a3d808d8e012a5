import abc

CAPABILITIES = ("embed_text", "embed_image", "caption", "detect", "complete")


class ModelBackend(abc.ABC):
    """Abstract interface for the five model capabilities.

    Backends speak in raw batches (plain lists of floats / strings) and do no
    validation; :class:`visual_clues.gateway.ModelGateway` owns normalization,
    clamping, ordering and retries on partial batches.

    ``image`` is an :class:`visual_clues.images.ImageRef`; ``boxes`` is None
    (whole image) or a list of ``[x0, y0, x1, y1]``.
    """

    kind = "abstract"

    def endpoint(self, capability):
        """Identifier reported in errors (URL for remote backends)."""
        return f"{self.kind}:{capability}"

    @abc.abstractmethod
    def embed_texts(self, texts):
        raise NotImplementedError

    @abc.abstractmethod
    def embed_image(self, image, boxes=None):
        raise NotImplementedError

    @abc.abstractmethod
    def caption(self, image, boxes=None):
        raise NotImplementedError

    @abc.abstractmethod
    def detect(self, image):
        raise NotImplementedError

    @abc.abstractmethod
    def complete(self, prompt, n, temperature, frequency_penalty, max_tokens):
        raise NotImplementedError

    def close(self):
        pass
