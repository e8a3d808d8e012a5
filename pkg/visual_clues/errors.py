"""Exception hierarchy shared by every module of the package."""


class VisualCluesError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(VisualCluesError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(VisualCluesError, ValueError):
    """The run configuration is incomplete or out of range."""


class ParseError(VisualCluesError, ValueError):
    """Malformed input file. ``line`` is 1-based (None when unknown)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BackendError(VisualCluesError):
    """A model backend could not serve a request.

    Parameters
    ----------
    message : str
        Human readable description.
    endpoint : str or None
        URL (remote) or capability name (mock) that failed.
    cause : BaseException or None
        Underlying exception, if any.
    stage : str or None
        Pipeline stage annotation added by callers (e.g. ``"detect"``).
    """

    def __init__(self, message, endpoint=None, cause=None, stage=None):
        self.endpoint = endpoint
        self.cause = cause
        self.stage = stage
        super().__init__(message)

    def with_stage(self, stage):
        """Return the same error annotated with the failing pipeline stage."""
        if self.stage is None:
            self.stage = stage
        return self

    def __str__(self):
        text = super().__str__()
        parts = []
        if self.stage:
            parts.append(f"stage={self.stage}")
        if self.endpoint:
            parts.append(f"endpoint={self.endpoint}")
        if self.cause is not None:
            parts.append(f"cause={self.cause!r}")
        return f"{text} ({', '.join(parts)})" if parts else text


class PartialCompletion(BackendError):
    """The language model returned fewer completions than requested."""

    def __init__(self, received, expected, endpoint=None):
        self.received = int(received)
        self.expected = int(expected)
        super().__init__(
            f"received {self.received} of {self.expected} completions",
            endpoint=endpoint,
        )


def run_stage(stage, fn, *args):
    """Call ``fn(*args)``, tagging any :class:`BackendError` with ``stage``."""
    try:
        return fn(*args)
    except BackendError as exc:
        raise exc.with_stage(stage)
