"""Exception hierarchy for the aigif codec."""


class AigifError(Exception):
    """Base class for every error raised by this package."""


class EncodeError(AigifError):
    pass


class ValidationError(EncodeError):
    """A manifest violates one of its invariants."""


class DecodeError(AigifError):
    """Structured decode failure; carries the field being read and the byte offset."""

    def __init__(self, message, *, field=None, offset=None):
        super().__init__(message)
        self.field = field
        self.offset = offset


class TruncationError(DecodeError):
    pass


class BadMagicError(DecodeError):
    pass


class UnsupportedVersionError(DecodeError):
    pass


class TrailingGarbageError(DecodeError):
    pass


class RegistryError(AigifError):
    pass


class UnknownCodeError(RegistryError):
    def __init__(self, table, code, *, offset=None):
        super().__init__("no code %r registered in table %r" % (code, table))
        self.table = table
        self.code = code
        self.offset = offset


class UnknownNameError(RegistryError):
    def __init__(self, table, name):
        super().__init__("no name %r registered in table %r" % (name, table))
        self.table = table
        self.name = name


class UnknownModelError(RegistryError):
    def __init__(self, model_id):
        super().__init__("unknown model id %r" % (model_id,))
        self.model_id = model_id
