"""Base exception shared by every package; the CLI turns exit_code into the process status."""

VALIDATION_EXIT = 1
BACKEND_EXIT = 2


class PotemkinError(Exception):
    exit_code = VALIDATION_EXIT


class BackendError(PotemkinError):
    exit_code = BACKEND_EXIT
