class InputError(ValueError):
    """Raised when caller-supplied data violates an operation's preconditions."""
