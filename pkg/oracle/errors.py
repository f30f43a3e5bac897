from config.errors import BackendError, PotemkinError


class MalformedResponseError(PotemkinError):
    """The response did not follow the answer protocol; `raw` is kept for the exclusion report."""

    def __init__(self, raw: str, reason: str = "missing final tag"):
        self.raw = raw
        self.reason = reason
        super().__init__(reason)


class BackendUnavailableError(BackendError):
    pass


class TransientBackendError(BackendError):
    """Retryable transport failure (timeouts, 429, 5xx)."""


class AuthFailureError(BackendError):
    pass


class BudgetExceededError(BackendError):
    pass


class CacheMissError(BackendUnavailableError):
    pass
