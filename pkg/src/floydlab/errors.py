"""Exception types shared by the floydlab modules."""


class FloydLabError(Exception):
    pass


class InputError(FloydLabError, ValueError):
    """Malformed user input: unknown generator, bad group file, bad word."""


class PreconditionError(FloydLabError, ValueError):
    """An operation was called outside its documented domain."""


class ResourceError(FloydLabError, RuntimeError):
    """A configured size cap would be exceeded."""


class UnsupportedOperation(FloydLabError, NotImplementedError):
    pass


class ConstructionError(FloydLabError, RuntimeError):
    """Tree construction failed (for instance an empty child set)."""
