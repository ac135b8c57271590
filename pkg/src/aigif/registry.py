"""Immutable code<->name tables and per-model field schemas.

Tables are either 4-bit (codes 0..15), byte-wide (codes 0..254, with 0xFF
held back for a future escape extension), or unbounded (the models table,
whose codes travel as exp codes).  A RegistrySet is never mutated after
construction; extension returns a new set.

Two line-oriented text formats let users add entries without touching code:

  registry file:  table:code:name          (e.g. ``models:255:my-model``)
  schema file:    model_code:field_name:wire_type

Blank lines and ``#`` comments are ignored in both.  Wire types are
``code4`` (4-bit code), ``u16``, ``u32``, ``f32`` and ``string``.  code4
fields belong to the model section of the container; all other types are
data-section fields.  A registered model without an explicit schema uses
the default schema (scheduler, diffusion_steps, guidance_scale).
"""

from dataclasses import dataclass

from .errors import RegistryError, UnknownCodeError, UnknownModelError, UnknownNameError

WIRE_TYPES = ("code4", "u16", "u32", "f32", "string")

# table name -> code width in bits; None means unbounded (exp code)
TABLE_WIDTHS = {
    "pixel_compressors": 4,
    "text_compressors": 4,
    "model_compressors": 4,
    "devices": 4,
    "data_types": 4,
    "schedulers": 4,
    "gpus": 8,
    "cuda_versions": 8,
    "models": None,
}

# 0xFF is reserved in the byte-wide tables so they can later grow an
# escape continuation like the models table.
BYTE_TABLE_MAX = 0xFE


@dataclass(frozen=True)
class SchemaField:
    name: str
    wire_type: str

    def __post_init__(self):
        if self.wire_type not in WIRE_TYPES:
            raise RegistryError("unknown wire type %r" % self.wire_type)


@dataclass(frozen=True)
class ModelSchema:
    model_id: int
    fields: tuple

    @property
    def model_fields(self):
        """Fields carried in the model section (4-bit codes)."""
        return tuple(f for f in self.fields if f.wire_type == "code4")

    @property
    def data_fields(self):
        """Fields carried in the data section (everything else)."""
        return tuple(f for f in self.fields if f.wire_type != "code4")


DEFAULT_SCHEMA_FIELDS = (
    SchemaField("scheduler", "code4"),
    SchemaField("diffusion_steps", "u16"),
    SchemaField("guidance_scale", "f32"),
)


def _max_code(table):
    width = TABLE_WIDTHS[table]
    if width is None:
        return None
    if width == 8:
        return BYTE_TABLE_MAX
    return (1 << width) - 1


class RegistrySet:
    """Immutable lookup tables plus model schemas."""

    def __init__(self, tables, schemas=()):
        self._tables = {}
        self._reverse = {}
        for name in TABLE_WIDTHS:
            entries = dict(tables.get(name, {}))
            limit = _max_code(name)
            for code, entry_name in entries.items():
                if code < 0 or (limit is not None and code > limit):
                    raise RegistryError(
                        "code %d out of range for table %r (max %s)"
                        % (code, name, limit))
            rev = {v: k for k, v in entries.items()}
            if len(rev) != len(entries):
                raise RegistryError("duplicate names in table %r" % name)
            self._tables[name] = entries
            self._reverse[name] = rev
        self._schemas = {s.model_id: s for s in schemas}

    def name_of(self, table, code):
        try:
            return self._tables[table][code]
        except KeyError:
            raise UnknownCodeError(table, code) from None

    def code_of(self, table, name):
        try:
            return self._reverse[table][name]
        except KeyError:
            raise UnknownNameError(table, name) from None

    def has_code(self, table, code):
        return code in self._tables[table]

    def codes(self, table):
        return sorted(self._tables[table])

    def entries(self, table):
        return sorted(self._tables[table].items())

    def schema_for(self, model_id):
        if not self.has_code("models", model_id):
            raise UnknownModelError(model_id)
        schema = self._schemas.get(model_id)
        if schema is None:
            return ModelSchema(model_id, DEFAULT_SCHEMA_FIELDS)
        return schema

    def extended(self, additions, schemas=()):
        """Return a new RegistrySet with extra entries; self is unchanged."""
        tables = {name: dict(entries) for name, entries in self._tables.items()}
        for table, code, name in additions:
            if table not in tables:
                raise RegistryError("unknown table %r" % table)
            if code in tables[table]:
                raise RegistryError(
                    "code %d already bound in table %r" % (code, table))
            tables[table][code] = name
        merged = dict(self._schemas)
        for schema in schemas:
            merged[schema.model_id] = schema
        return RegistrySet(tables, merged.values())


_BUILTIN_TABLES = {
    "pixel_compressors": {0: "None", 1: "png"},
    "text_compressors": {0: "None", 1: "zlib"},
    "model_compressors": {0: "None", 1: "int8"},
    "devices": {0: "CPU", 1: "GPU"},
    "gpus": {0: "None", 1: "NVIDIAGeForceGTX1080Ti"},
    "cuda_versions": {0: "None", 1: "cu121"},
    "data_types": {0: "float32", 1: "float16"},
    "schedulers": {0: "DDIM", 1: "DPM++ 2M"},
    "models": {
        0: "stable-diffusion-v1-5",
        1: "stable-diffusion-v2-1",
        2: "sdxl",
    },
}

_BUILTIN_SCHEMAS = tuple(
    ModelSchema(model_id, DEFAULT_SCHEMA_FIELDS) for model_id in (0, 1, 2)
)

_BUILTIN = RegistrySet(_BUILTIN_TABLES, _BUILTIN_SCHEMAS)


def builtin_registry():
    """The registry shipped with the codec (immutable; shared instance)."""
    return _BUILTIN


def extend_registry(base, additions, schemas=()):
    return base.extended(additions, schemas)


def schema_for(registry, model_id):
    return registry.schema_for(model_id)


def _records(text, expected_parts, what):
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(":", expected_parts - 1)
        if len(parts) != expected_parts:
            raise RegistryError("%s line %d: expected %d colon-separated fields: %r"
                                % (what, lineno, expected_parts, line))
        yield lineno, parts


def parse_registry_text(text):
    """Parse ``table:code:name`` records into an additions list."""
    additions = []
    for lineno, (table, code, name) in _records(text, 3, "registry file"):
        if table not in TABLE_WIDTHS:
            raise RegistryError("registry file line %d: unknown table %r" % (lineno, table))
        try:
            code = int(code)
        except ValueError:
            raise RegistryError("registry file line %d: bad code %r" % (lineno, code)) from None
        additions.append((table, code, name))
    return additions


def parse_schema_text(text):
    """Parse ``model_code:field_name:wire_type`` records into ModelSchemas."""
    fields_by_model = {}
    for lineno, (code, field_name, wire_type) in _records(text, 3, "schema file"):
        try:
            model_id = int(code)
        except ValueError:
            raise RegistryError("schema file line %d: bad model code %r" % (lineno, code)) from None
        if wire_type not in WIRE_TYPES:
            raise RegistryError("schema file line %d: unknown wire type %r" % (lineno, wire_type))
        fields_by_model.setdefault(model_id, []).append(SchemaField(field_name, wire_type))
    return [ModelSchema(model_id, tuple(fields))
            for model_id, fields in fields_by_model.items()]


def load_registry_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_registry_text(fh.read())


def load_schema_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_schema_text(fh.read())


def builtin_registry_text():
    """The built-in tables rendered in the registry file format."""
    lines = []
    for table in TABLE_WIDTHS:
        for code, name in _BUILTIN.entries(table):
            lines.append("%s:%d:%s" % (table, code, name))
    return "\n".join(lines) + "\n"


def builtin_schema_text():
    """The built-in schemas rendered in the schema file format."""
    lines = []
    for model_id in _BUILTIN.codes("models"):
        for field in _BUILTIN.schema_for(model_id).fields:
            lines.append("%d:%s:%s" % (model_id, field.name, field.wire_type))
    return "\n".join(lines) + "\n"
