from config.errors import PotemkinError


class RunConfigError(PotemkinError):
    pass


class InsufficientItemsError(PotemkinError):
    def __init__(self, concept_id: str, needed: int, available: int, kind: str = "Classify"):
        self.concept_id = concept_id
        self.needed = needed
        self.available = available
        super().__init__(f"concept {concept_id!r} has {available} {kind} items, needs {needed}")


class MissingReportError(PotemkinError):
    pass
