"""Bit-level I/O: MSB-first sub-byte fields plus the escape-byte expandable integer code.

Packing order is MSB-first within each byte (bit 7 is filled first), and
multi-byte integers written through ``write_bits`` are big-endian.  The
expandable code ("exp code") encodes a non-negative integer v as
floor(v/255) escape bytes of 0xFF followed by a final byte equal to
v mod 255, so the final byte is never 0xFF.
"""

from .errors import DecodeError, EncodeError, TruncationError

EXP_ESCAPE = 0xFF
EXP_RADIX = 255


class BitWriter:
    """Append-only bit buffer, MSB-first."""

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0  # bits pending in _acc, always < 8 after write_bits

    @property
    def bit_length(self):
        return 8 * len(self._buf) + self._nacc

    def write_bits(self, value, width):
        if not 1 <= width <= 32:
            raise EncodeError("bit width must be in 1..32, got %d" % width)
        if value < 0 or value >> width:
            raise EncodeError("value %d does not fit in %d bits" % (value, width))
        self._acc = (self._acc << width) | value
        self._nacc += width
        while self._nacc >= 8:
            self._nacc -= 8
            self._buf.append((self._acc >> self._nacc) & 0xFF)
        self._acc &= (1 << self._nacc) - 1

    def align(self):
        """Pad with zero bits to the next byte boundary."""
        if self._nacc:
            self.write_bits(0, 8 - self._nacc)

    def write_bytes(self, data):
        if self._nacc:
            raise EncodeError("byte write requires byte alignment")
        self._buf += data

    def write_uint(self, value, nbytes):
        """Big-endian unsigned integer of nbytes bytes."""
        if value < 0 or value >> (8 * nbytes):
            raise EncodeError("value %d does not fit in %d bytes" % (value, nbytes))
        if self._nacc:
            raise EncodeError("byte write requires byte alignment")
        self._buf += value.to_bytes(nbytes, "big")

    def getvalue(self):
        if self._nacc:
            raise EncodeError("unflushed bits; call align() first")
        return bytes(self._buf)


class BitReader:
    """Bounds-checked MSB-first reader over an immutable byte buffer.

    Every read takes a field name so truncation errors can say which
    field was interrupted and at what byte offset.
    """

    def __init__(self, data):
        self._data = data
        self._pos = 0  # bit position

    @property
    def bit_position(self):
        return self._pos

    @property
    def byte_position(self):
        return self._pos // 8

    @property
    def remaining_bits(self):
        return 8 * len(self._data) - self._pos

    def _require(self, nbits, field):
        if self._pos + nbits > 8 * len(self._data):
            raise TruncationError(
                "truncated while reading %r (%d bits needed, %d left) at byte %d"
                % (field, nbits, self.remaining_bits, self.byte_position),
                field=field,
                offset=self.byte_position,
            )

    def read_bits(self, width, field="bits"):
        if not 1 <= width <= 32:
            raise EncodeError("bit width must be in 1..32, got %d" % width)
        self._require(width, field)
        end = self._pos + width
        out = 0
        pos = self._pos
        while pos < end:
            byte = self._data[pos >> 3]
            bit_off = pos & 7
            take = min(8 - bit_off, end - pos)
            out = (out << take) | ((byte >> (8 - bit_off - take)) & ((1 << take) - 1))
            pos += take
        self._pos = end
        return out

    def read_bytes(self, n, field="bytes"):
        if self._pos & 7:
            raise DecodeError("byte read requires byte alignment", field=field,
                              offset=self.byte_position)
        self._require(8 * n, field)
        start = self._pos >> 3
        self._pos += 8 * n
        return bytes(self._data[start:start + n])

    def read_uint(self, nbytes, field):
        return int.from_bytes(self.read_bytes(nbytes, field), "big")

    def align(self, field="padding", check_zero=True):
        """Skip to the next byte boundary; canonical streams pad with zeros."""
        rem = (-self._pos) % 8
        if rem:
            pad = self.read_bits(rem, field=field)
            if check_zero and pad:
                raise DecodeError("nonzero padding bits in %r" % field,
                                  field=field, offset=self.byte_position)

    def read_exp_code(self, field="exp_code"):
        """Read an exp code: 0xFF escape run, then the remainder byte."""
        if self._pos & 7:
            raise DecodeError("exp code read requires byte alignment",
                              field=field, offset=self.byte_position)
        start = self._pos >> 3
        rest = bytes(self._data[start:])
        tail = rest.lstrip(b"\xff")
        if not tail:
            raise TruncationError(
                "truncated while reading %r: buffer ends on an escape byte"
                % field, field=field, offset=len(self._data))
        escapes = len(rest) - len(tail)
        self._pos = (start + escapes + 1) * 8
        return escapes * EXP_RADIX + tail[0]


def encode_exp_code(value):
    """Encode a non-negative integer as escape bytes + remainder byte."""
    if value < 0:
        raise EncodeError("exp code value must be non-negative, got %d" % value)
    n, last = divmod(value, EXP_RADIX)
    return b"\xff" * n + bytes([last])


def decode_exp_code(reader, field="exp_code"):
    """Read an exp code from a byte-aligned reader."""
    return reader.read_exp_code(field)


def exp_code_length(value):
    """Encoded length in bytes: floor(value/255) + 1."""
    return value // EXP_RADIX + 1
