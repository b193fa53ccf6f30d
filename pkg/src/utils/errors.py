from typing import Optional

class PeaceError(Exception):
    pass

class ValidationError(PeaceError, ValueError):
    pass

class SchemaError(ValidationError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)

class ConfigurationError(PeaceError, ValueError):
    pass

class ContractError(PeaceError, RuntimeError):
    pass
