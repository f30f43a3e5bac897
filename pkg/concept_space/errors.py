from config.errors import PotemkinError


class ConceptSpecError(PotemkinError):
    """Raised when a concept spec document fails validation; `path` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnknownInstanceError(PotemkinError):
    def __init__(self, instance_id: str):
        self.instance_id = instance_id
        super().__init__(f"Unknown instance: {instance_id!r}")


class DimensionMismatchError(PotemkinError):
    pass
