"""Exception hierarchy shared across the package."""


class NbrError(Exception):
    """Base class for all nbrkit errors."""


class ParseError(NbrError):
    """A source file is syntactically malformed (bad JSON line, bad record shape)."""


class ValidationError(NbrError):
    """Inputs are well-formed but violate a contract (duplicate id, empty title, ...)."""


class FormatError(NbrError):
    """A binary or serialized artifact has the wrong magic, version, or is truncated."""


class TransportError(NbrError):
    """A remote endpoint stayed unreachable after retries."""


class ProtocolError(NbrError):
    """A remote endpoint answered, but its response breaks the wire contract."""
