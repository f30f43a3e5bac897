from config.errors import PotemkinError


class EmptyTallyError(PotemkinError):
    """No valid trials to score; callers report "no data" rather than a zero rate."""
