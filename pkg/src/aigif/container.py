"""The AIGIF container: manifest data model and byte-exact encode/decode.

File layout (all multi-byte integers big-endian, sections byte-aligned,
zero padding bits):

  header          magic "AIGF", version byte 0x01
  options         saving_pixels(1b) pixel_compressor(4b) text_compressor(4b)
                  saving_model(1b) model_compressor(4b) pad(2b)  = 2 bytes
  platform        device nibble + zero nibble, gpu byte, cuda byte,
                  extras count u8, then TLV records (tag u8, length u16, bytes)
  model           model id (exp code), data_type nibble followed by the
                  schema's 4-bit model fields (zero padding to the byte)
  data            height u32, width u32, seed u32, schema data fields in
                  order (u16/u32/f32 inline; strings go to the string
                  block), extension count u8 + TLV records
  string block    u32 block length, then the string table compressed with
                  the declared text compressor.  Inside: u16 string count,
                  then per string u32 byte length + UTF-8 bytes.  Order:
                  prompt, negative prompt, then schema string fields.
  model payload   u32 length + bytes, only when saving_model=1
  pixel payload   u32 length + bytes, only when saving_pixels=1

Payload bytes are opaque and pass through bit-exactly; the codec never
reinterprets them.  Encoding is canonical: re-encoding a decoded file
reproduces it byte for byte.
"""

import struct
import zlib
from dataclasses import dataclass, field

from .bitstream import BitReader, BitWriter, encode_exp_code
from .errors import (
    BadMagicError,
    DecodeError,
    TrailingGarbageError,
    TruncationError,
    UnknownCodeError,
    UnsupportedVersionError,
    ValidationError,
)

MAGIC = b"AIGF"
VERSION = 1

# cap on decompressed string-table size, so hostile inputs cannot balloon
MAX_STRING_TABLE_BYTES = 64 * 1024 * 1024

U8_MAX = 0xFF
U16_MAX = 0xFFFF
U32_MAX = 0xFFFFFFFF


@dataclass
class CompressionOptions:
    saving_pixels: bool
    pixel_compressor: int
    text_compressor: int
    saving_model: bool
    model_compressor: int


@dataclass
class TLVRecord:
    tag: int
    value: bytes


@dataclass
class PlatformConfig:
    device: int
    gpu: int
    cuda: int
    extras: list = field(default_factory=list)


@dataclass
class ModelConfig:
    model_id: int
    data_type: int
    model_fields: dict = field(default_factory=dict)


@dataclass
class DataConfig:
    prompt: str
    negative_prompt: str
    height: int
    width: int
    seed: int
    model_data_fields: dict = field(default_factory=dict)


@dataclass
class GenerationManifest:
    options: CompressionOptions
    platform: PlatformConfig
    model: ModelConfig
    data: DataConfig
    extensions: list = field(default_factory=list)
    pixel_payload: bytes = None
    model_payload: bytes = None


@dataclass
class FieldTrace:
    """One decoded field, for the inspect dump."""
    section: str
    name: str
    bit_offset: int
    bit_width: int
    raw: object
    resolved: str = None


@dataclass
class SizeReport:
    encoded_bytes: int
    raw_pixel_bytes: int
    ratio: float


def _check_tlvs(records, where):
    for rec in records:
        if not 0 <= rec.tag <= U8_MAX:
            raise ValidationError("%s: TLV tag %d out of u8 range" % (where, rec.tag))
        if len(rec.value) > U16_MAX:
            raise ValidationError("%s: TLV value longer than u16 length" % where)
    if len(records) > U8_MAX:
        raise ValidationError("%s: more than %d TLV records" % (where, U8_MAX))


def _check_code(registry, table, code):
    if not registry.has_code(table, code):
        raise UnknownCodeError(table, code)


def validate_manifest(manifest, registry):
    """Raise ValidationError/RegistryError unless the manifest is encodable."""
    o = manifest.options
    _check_code(registry, "pixel_compressors", o.pixel_compressor)
    _check_code(registry, "text_compressors", o.text_compressor)
    _check_code(registry, "model_compressors", o.model_compressor)
    if o.saving_pixels != (manifest.pixel_payload is not None):
        raise ValidationError("saving_pixels flag and pixel_payload presence disagree")
    if o.saving_model != (manifest.model_payload is not None):
        raise ValidationError("saving_model flag and model_payload presence disagree")
    if manifest.pixel_payload is not None and len(manifest.pixel_payload) > U32_MAX:
        raise ValidationError("pixel payload longer than u32 length")
    if manifest.model_payload is not None and len(manifest.model_payload) > U32_MAX:
        raise ValidationError("model payload longer than u32 length")

    p = manifest.platform
    _check_code(registry, "devices", p.device)
    _check_code(registry, "gpus", p.gpu)
    _check_code(registry, "cuda_versions", p.cuda)
    if registry.name_of("devices", p.device) == "CPU" and (p.gpu or p.cuda):
        raise ValidationError("gpu/cuda codes must be 0 when the device is CPU")
    _check_tlvs(p.extras, "platform extras")
    _check_tlvs(manifest.extensions, "extensions")

    m = manifest.model
    schema = registry.schema_for(m.model_id)
    _check_code(registry, "data_types", m.data_type)
    want = [f.name for f in schema.model_fields]
    if list(m.model_fields) != want:
        raise ValidationError("model fields %r do not match schema %r"
                              % (list(m.model_fields), want))
    for f in schema.model_fields:
        value = m.model_fields[f.name]
        if not 0 <= value <= 15:
            raise ValidationError("model field %r out of 4-bit range" % f.name)
        if f.name == "scheduler":
            _check_code(registry, "schedulers", value)

    d = manifest.data
    if not 1 <= d.height <= U32_MAX or not 1 <= d.width <= U32_MAX:
        raise ValidationError("height and width must be in 1..2^32-1")
    if not 0 <= d.seed <= U32_MAX:
        raise ValidationError("seed must fit in u32")
    want = [f.name for f in schema.data_fields]
    if list(d.model_data_fields) != want:
        raise ValidationError("data fields %r do not match schema %r"
                              % (list(d.model_data_fields), want))
    for f in schema.data_fields:
        value = d.model_data_fields[f.name]
        if f.wire_type == "u16":
            if not 0 <= value <= U16_MAX:
                raise ValidationError("data field %r out of u16 range" % f.name)
            if f.name == "diffusion_steps" and value < 1:
                raise ValidationError("diffusion_steps must be >= 1")
        elif f.wire_type == "u32":
            if not 0 <= value <= U32_MAX:
                raise ValidationError("data field %r out of u32 range" % f.name)
        elif f.wire_type == "f32":
            if not isinstance(value, (int, float)):
                raise ValidationError("data field %r must be numeric" % f.name)
        elif f.wire_type == "string":
            if not isinstance(value, str):
                raise ValidationError("data field %r must be a string" % f.name)
    return schema


def _string_table(strings):
    out = bytearray(struct.pack(">H", len(strings)))
    for s in strings:
        raw = s.encode("utf-8")
        out += struct.pack(">I", len(raw))
        out += raw
    return bytes(out)


def compress_string_block(strings, text_compressor, registry):
    """Build and compress the string table with the declared compressor."""
    if len(strings) > U16_MAX:
        raise ValidationError("too many strings for the string table")
    table = _string_table(strings)
    name = registry.name_of("text_compressors", text_compressor)
    if name == "None":
        return table
    if name == "zlib":
        return zlib.compress(table, 6)
    raise ValidationError("text compressor %r has no implementation" % name)


def _decompress_string_block(block, text_compressor, registry, expected_count):
    name = registry.name_of("text_compressors", text_compressor)
    if name == "None":
        table = block
    elif name == "zlib":
        try:
            obj = zlib.decompressobj()
            table = obj.decompress(block, MAX_STRING_TABLE_BYTES)
            if obj.unconsumed_tail:
                raise DecodeError("string table exceeds decompression cap",
                                  field="string_block")
            if not obj.eof or obj.unused_data:
                raise DecodeError("string block is not a single complete zlib stream",
                                  field="string_block")
        except zlib.error as exc:
            raise DecodeError("string block decompression failed: %s" % exc,
                              field="string_block") from None
    else:
        raise DecodeError("text compressor %r has no implementation" % name,
                          field="string_block")

    r = BitReader(table)
    count = r.read_uint(2, "string_count")
    if count != expected_count:
        raise DecodeError("string table holds %d strings, layout expects %d"
                          % (count, expected_count), field="string_count")
    strings = []
    for i in range(count):
        n = r.read_uint(4, "string_length[%d]" % i)
        raw = r.read_bytes(n, "string[%d]" % i)
        try:
            strings.append(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise DecodeError("string %d is not valid UTF-8: %s" % (i, exc),
                              field="string[%d]" % i) from None
    if r.remaining_bits:
        raise DecodeError("trailing bytes inside the string table",
                          field="string_block")
    return strings


def _f32_bytes(value):
    try:
        return struct.pack(">f", value)
    except (OverflowError, struct.error) as exc:
        raise ValidationError("value %r not representable as f32: %s" % (value, exc))


def encode(manifest, registry):
    """Serialize a manifest to AIGIF bytes (canonical encoding)."""
    schema = validate_manifest(manifest, registry)
    o, p, m, d = manifest.options, manifest.platform, manifest.model, manifest.data
    w = BitWriter()
    w.write_bytes(MAGIC)
    w.write_uint(VERSION, 1)

    w.write_bits(int(o.saving_pixels), 1)
    w.write_bits(o.pixel_compressor, 4)
    w.write_bits(o.text_compressor, 4)
    w.write_bits(int(o.saving_model), 1)
    w.write_bits(o.model_compressor, 4)
    w.align()

    w.write_bits(p.device, 4)
    w.write_bits(0, 4)
    w.write_uint(p.gpu, 1)
    w.write_uint(p.cuda, 1)
    w.write_uint(len(p.extras), 1)
    for rec in p.extras:
        w.write_uint(rec.tag, 1)
        w.write_uint(len(rec.value), 2)
        w.write_bytes(rec.value)

    w.write_bytes(encode_exp_code(m.model_id))
    w.write_bits(m.data_type, 4)
    for f in schema.model_fields:
        w.write_bits(m.model_fields[f.name], 4)
    w.align()

    w.write_uint(d.height, 4)
    w.write_uint(d.width, 4)
    w.write_uint(d.seed, 4)
    strings = [d.prompt, d.negative_prompt]
    for f in schema.data_fields:
        value = d.model_data_fields[f.name]
        if f.wire_type == "u16":
            w.write_uint(value, 2)
        elif f.wire_type == "u32":
            w.write_uint(value, 4)
        elif f.wire_type == "f32":
            w.write_bytes(_f32_bytes(value))
        else:  # string
            strings.append(value)
    w.write_uint(len(manifest.extensions), 1)
    for rec in manifest.extensions:
        w.write_uint(rec.tag, 1)
        w.write_uint(len(rec.value), 2)
        w.write_bytes(rec.value)

    block = compress_string_block(strings, o.text_compressor, registry)
    if len(block) > U32_MAX:
        raise ValidationError("string block longer than u32 length")
    w.write_uint(len(block), 4)
    w.write_bytes(block)

    if o.saving_model:
        w.write_uint(len(manifest.model_payload), 4)
        w.write_bytes(manifest.model_payload)
    if o.saving_pixels:
        w.write_uint(len(manifest.pixel_payload), 4)
        w.write_bytes(manifest.pixel_payload)
    return w.getvalue()


class _TracingReader:
    """Wraps BitReader so each named read lands in a trace list."""

    def __init__(self, reader, trace):
        self._r = reader
        self._trace = trace
        self.section = "header"

    def __getattr__(self, name):
        return getattr(self._r, name)

    def _record(self, name, start, raw, resolved=None):
        self._trace.append(FieldTrace(self.section, name, start,
                                      self._r.bit_position - start, raw, resolved))

    def read_bits(self, width, field="bits"):
        start = self._r.bit_position
        value = self._r.read_bits(width, field)
        self._record(field, start, value)
        return value

    def read_bytes(self, n, field="bytes"):
        start = self._r.bit_position
        value = self._r.read_bytes(n, field)
        self._record(field, start, value.hex())
        return value

    def read_uint(self, nbytes, field):
        start = self._r.bit_position
        value = self._r.read_uint(nbytes, field)
        self._record(field, start, value)
        return value

    def align(self, field="padding", check_zero=True):
        self._r.align(field, check_zero)

    def read_exp_code(self, field="exp_code"):
        start = self._r.bit_position
        value = self._r.read_exp_code(field)
        self._record(field, start, value)
        return value

    def resolve_last(self, resolved):
        self._trace[-1].resolved = resolved

    def note(self, name, raw, resolved=None):
        pos = self._r.bit_position
        self._trace.append(FieldTrace(self.section, name, pos, 0, raw, resolved))


def decode(data, registry, trace=None):
    """Parse AIGIF bytes into a manifest; total over arbitrary input.

    Every failure raises a structured DecodeError (or registry error with
    the offending table and raw code); no input crashes or loops.  When
    ``trace`` is a list, a FieldTrace per decoded field is appended.
    """
    r = BitReader(data)
    if trace is not None:
        r = _TracingReader(r, trace)

    def resolve(table, code, field):
        if not registry.has_code(table, code):
            raise UnknownCodeError(table, code, offset=r.byte_position)
        name = registry.name_of(table, code)
        if trace is not None:
            r.resolve_last(name)
        return name

    magic = r.read_bytes(4, "magic")
    if magic != MAGIC:
        raise BadMagicError("not an AIGIF file (magic %r)" % magic,
                            field="magic", offset=0)
    version = r.read_uint(1, "version")
    if version != VERSION:
        raise UnsupportedVersionError("unsupported version %d" % version,
                                      field="version", offset=4)

    if trace is not None:
        r.section = "options"
    saving_pixels = bool(r.read_bits(1, "saving_pixels"))
    pixel_compressor = r.read_bits(4, "pixel_compressor")
    resolve("pixel_compressors", pixel_compressor, "pixel_compressor")
    text_compressor = r.read_bits(4, "text_compressor")
    resolve("text_compressors", text_compressor, "text_compressor")
    saving_model = bool(r.read_bits(1, "saving_model"))
    model_compressor = r.read_bits(4, "model_compressor")
    resolve("model_compressors", model_compressor, "model_compressor")
    r.align("options_padding")
    options = CompressionOptions(saving_pixels, pixel_compressor,
                                 text_compressor, saving_model, model_compressor)

    if trace is not None:
        r.section = "platform"
    device = r.read_bits(4, "device")
    device_name = resolve("devices", device, "device")
    r.align("platform_padding")
    gpu = r.read_uint(1, "gpu")
    resolve("gpus", gpu, "gpu")
    cuda = r.read_uint(1, "cuda")
    resolve("cuda_versions", cuda, "cuda")
    if device_name == "CPU" and (gpu or cuda):
        raise DecodeError("gpu/cuda codes must be 0 when the device is CPU",
                          field="gpu", offset=r.byte_position)
    extras = _read_tlvs(r, "platform_extra")
    platform = PlatformConfig(device, gpu, cuda, extras)

    if trace is not None:
        r.section = "model"
    model_id = r.read_exp_code("model_id")
    resolve("models", model_id, "model_id")
    schema = registry.schema_for(model_id)
    data_type = r.read_bits(4, "data_type")
    resolve("data_types", data_type, "data_type")
    model_fields = {}
    for f in schema.model_fields:
        value = r.read_bits(4, f.name)
        if f.name == "scheduler":
            resolve("schedulers", value, f.name)
        model_fields[f.name] = value
    r.align("model_padding")
    model = ModelConfig(model_id, data_type, model_fields)

    if trace is not None:
        r.section = "data"
    height = r.read_uint(4, "height")
    width = r.read_uint(4, "width")
    if height < 1 or width < 1:
        raise DecodeError("height and width must be >= 1",
                          field="height" if height < 1 else "width",
                          offset=r.byte_position)
    seed = r.read_uint(4, "seed")
    data_fields = {}
    string_fields = []
    for f in schema.data_fields:
        if f.wire_type == "u16":
            data_fields[f.name] = r.read_uint(2, f.name)
            if f.name == "diffusion_steps" and data_fields[f.name] < 1:
                raise DecodeError("diffusion_steps must be >= 1",
                                  field=f.name, offset=r.byte_position)
        elif f.wire_type == "u32":
            data_fields[f.name] = r.read_uint(4, f.name)
        elif f.wire_type == "f32":
            data_fields[f.name] = struct.unpack(">f", r.read_bytes(4, f.name))[0]
        else:
            data_fields[f.name] = None  # filled from the string block
            string_fields.append(f.name)
    extensions = _read_tlvs(r, "extension")

    if trace is not None:
        r.section = "string_block"
    block_len = r.read_uint(4, "string_block_length")
    block = r.read_bytes(block_len, "string_block")
    strings = _decompress_string_block(block, text_compressor, registry,
                                       2 + len(string_fields))
    prompt, negative_prompt = strings[0], strings[1]
    for name, value in zip(string_fields, strings[2:]):
        data_fields[name] = value
    if trace is not None:
        r.note("prompt", repr(prompt))
        r.note("negative_prompt", repr(negative_prompt))
        for name in string_fields:
            r.note(name, repr(data_fields[name]))
    data_cfg = DataConfig(prompt, negative_prompt, height, width, seed, data_fields)

    if trace is not None:
        r.section = "payloads"
    model_payload = None
    if saving_model:
        n = r.read_uint(4, "model_payload_length")
        model_payload = r.read_bytes(n, "model_payload")
    pixel_payload = None
    if saving_pixels:
        n = r.read_uint(4, "pixel_payload_length")
        pixel_payload = r.read_bytes(n, "pixel_payload")

    if r.remaining_bits:
        raise TrailingGarbageError(
            "%d trailing bytes after the last declared payload"
            % (r.remaining_bits // 8), field="end_of_file", offset=r.byte_position)

    return GenerationManifest(options, platform, model, data_cfg,
                              extensions, pixel_payload, model_payload)


def _read_tlvs(r, label):
    count = r.read_uint(1, label + "_count")
    records = []
    for i in range(count):
        tag = r.read_uint(1, "%s[%d].tag" % (label, i))
        length = r.read_uint(2, "%s[%d].length" % (label, i))
        value = r.read_bytes(length, "%s[%d].value" % (label, i))
        records.append(TLVRecord(tag, value))
    return records


# payload magics we can recognize, keyed by compressor name
_PAYLOAD_MAGICS = {"png": b"\x89PNG\r\n\x1a\n"}


def payload_warnings(manifest, registry):
    """Non-fatal checks: does a payload's leading magic match its compressor?"""
    warnings = []
    if manifest.pixel_payload is not None:
        name = registry.name_of("pixel_compressors", manifest.options.pixel_compressor)
        magic = _PAYLOAD_MAGICS.get(name)
        if magic and not manifest.pixel_payload.startswith(magic):
            warnings.append("pixel payload does not start with the %s signature" % name)
    return warnings


def size_report(manifest, registry):
    """Encoded size vs raw RGB pixel size (height*width*3)."""
    encoded = len(encode(manifest, registry))
    raw = manifest.data.height * manifest.data.width * 3
    return SizeReport(encoded, raw, raw / encoded)
