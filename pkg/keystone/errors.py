from config.errors import PotemkinError


class UnsolvableConceptError(PotemkinError):
    pass


class SearchBudgetExceededError(PotemkinError):
    """The exact search ran out of nodes; `incumbent` is the best keystone found so far."""

    def __init__(self, incumbent, nodes: int):
        self.incumbent = incumbent
        self.nodes = nodes
        super().__init__(f"Search budget exhausted after {nodes} nodes; best objective {incumbent.objective}")
