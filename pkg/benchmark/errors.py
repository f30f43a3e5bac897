from config.errors import PotemkinError


class SchemaError(PotemkinError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DanglingReferenceError(PotemkinError):
    def __init__(self, item_id: str, reference: str, field: str):
        self.item_id = item_id
        self.reference = reference
        super().__init__(f"item {item_id!r} references unknown {field} {reference!r}")


class GraderMismatchError(PotemkinError):
    pass


class MissingAnnotationError(PotemkinError):
    """The annotation file has no label for (item, model); distinct from an Excluded response."""


class UnknownCheckerError(PotemkinError):
    pass
