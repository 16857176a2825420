class DomainError(ValueError):
    """Argument outside the domain of a model formula."""


class UnsupportedRegimeError(ValueError):
    """Geometry outside the regime the propagation model is configured for."""


class ContractError(ValueError):
    """Caller violated a documented precondition (lengths, brackets, signs)."""


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending setting."""

    def __init__(self, key, message, line=None, prefixed=True):
        self.key = key
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {message}" if prefixed else message)
