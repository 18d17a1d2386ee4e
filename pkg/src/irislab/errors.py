"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was invoked outside its documented contract."""


class TemplateFormatError(ValueError):
    """Template bytes or hex records could not be decoded."""
