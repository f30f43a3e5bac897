from config.errors import PotemkinError


class ParameterOverflowError(PotemkinError):
    pass


class EmptyGridError(PotemkinError):
    pass


class NotAKeystoneError(PotemkinError):
    pass
