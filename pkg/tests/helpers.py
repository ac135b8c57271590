"""Shared test utilities: a widened registry, a random-manifest generator,
and an independent byte-layout size oracle."""

import struct
import zlib

from aigif.container import (
    CompressionOptions,
    DataConfig,
    GenerationManifest,
    ModelConfig,
    PlatformConfig,
    TLVRecord,
)
from aigif.registry import ModelSchema, SchemaField, builtin_registry, extend_registry

# fills every 4-bit table to its top code and adds multi-byte model ids,
# so property tests can reach the boundary encodings
TEST_ADDITIONS = (
    [("pixel_compressors", c, "pixelc%d" % c) for c in range(2, 16)]
    + [("model_compressors", c, "modelc%d" % c) for c in range(2, 16)]
    + [("devices", c, "device%d" % c) for c in range(2, 16)]
    + [("data_types", c, "dtype%d" % c) for c in range(2, 16)]
    + [("schedulers", c, "sched%d" % c) for c in range(2, 16)]
    + [("gpus", c, "gpu%d" % c) for c in range(2, 8)]
    + [("cuda_versions", c, "cuda%d" % c) for c in range(2, 8)]
    + [("models", 254, "edge-model-254"),
       ("models", 255, "edge-model-255"),
       ("models", 600, "edge-model-600"),
       ("models", 50, "rich-model")]
)

RICH_SCHEMA = ModelSchema(50, (
    SchemaField("scheduler", "code4"),
    SchemaField("style_code", "code4"),
    SchemaField("diffusion_steps", "u16"),
    SchemaField("guidance_scale", "f32"),
    SchemaField("refiner_steps", "u32"),
    SchemaField("style_prompt", "string"),
))


def wide_registry():
    return extend_registry(builtin_registry(), TEST_ADDITIONS, [RICH_SCHEMA])


def f32(value):
    """Nearest binary32 value, so round trips compare equal."""
    return struct.unpack(">f", struct.pack(">f", value))[0]


def _random_text(rng, max_len=40):
    n = rng.randrange(max_len + 1)
    return "".join(rng.choice("abc XYZ09,.é中\U0001f600") for _ in range(n))


def _random_tlvs(rng, max_records=8):
    return [TLVRecord(rng.randrange(256), rng.randbytes(rng.randrange(21)))
            for _ in range(rng.randrange(max_records + 1))]


def random_manifest(rng, registry):
    """A uniformly messy but valid manifest over the widened registry."""
    saving_pixels = rng.random() < 0.3
    saving_model = rng.random() < 0.2
    options = CompressionOptions(
        saving_pixels=saving_pixels,
        pixel_compressor=rng.choice(registry.codes("pixel_compressors")),
        text_compressor=rng.choice((0, 1)),
        saving_model=saving_model,
        model_compressor=rng.choice(registry.codes("model_compressors")),
    )
    device = rng.choice(registry.codes("devices"))
    if registry.name_of("devices", device) == "CPU":
        gpu = cuda = 0
    else:
        gpu = rng.choice(registry.codes("gpus"))
        cuda = rng.choice(registry.codes("cuda_versions"))
    platform = PlatformConfig(device, gpu, cuda, _random_tlvs(rng))

    model_id = rng.choice(registry.codes("models"))
    schema = registry.schema_for(model_id)
    model_fields = {}
    for f in schema.model_fields:
        if f.name == "scheduler":
            model_fields[f.name] = rng.choice(registry.codes("schedulers"))
        else:
            model_fields[f.name] = rng.randrange(16)
    model = ModelConfig(model_id, rng.choice(registry.codes("data_types")),
                        model_fields)

    data_fields = {}
    for f in schema.data_fields:
        if f.wire_type == "u16":
            value = rng.randrange(1, 1 << 16) if f.name == "diffusion_steps" \
                else rng.randrange(1 << 16)
        elif f.wire_type == "u32":
            value = rng.randrange(1 << 32)
        elif f.wire_type == "f32":
            value = f32(rng.uniform(-100.0, 100.0))
        else:
            value = _random_text(rng)
        data_fields[f.name] = value
    data = DataConfig(
        prompt=_random_text(rng, 80),
        negative_prompt=_random_text(rng),
        height=rng.randrange(1, 4097),
        width=rng.randrange(1, 4097),
        seed=rng.randrange(1 << 32),
        model_data_fields=data_fields,
    )

    return GenerationManifest(
        options, platform, model, data,
        extensions=_random_tlvs(rng),
        pixel_payload=rng.randbytes(rng.randrange(65)) if saving_pixels else None,
        model_payload=rng.randbytes(rng.randrange(65)) if saving_model else None,
    )


def expected_size(manifest, registry):
    """Byte count recomputed from the layout arithmetic, independent of encode()."""
    schema = registry.schema_for(manifest.model.model_id)
    n = 5  # magic + version
    n += 2  # options
    n += 3 + 1 + sum(3 + len(r.value) for r in manifest.platform.extras)
    n += manifest.model.model_id // 255 + 1  # exp-code id
    nibbles = 1 + len(schema.model_fields)  # data type + 4-bit model fields
    n += (nibbles + 1) // 2
    n += 12  # height, width, seed
    sizes = {"u16": 2, "u32": 4, "f32": 4, "string": 0}
    n += sum(sizes[f.wire_type] for f in schema.data_fields)
    n += 1 + sum(3 + len(r.value) for r in manifest.extensions)

    strings = [manifest.data.prompt, manifest.data.negative_prompt]
    strings += [manifest.data.model_data_fields[f.name]
                for f in schema.data_fields if f.wire_type == "string"]
    table = struct.pack(">H", len(strings))
    for s in strings:
        raw = s.encode("utf-8")
        table += struct.pack(">I", len(raw)) + raw
    if manifest.options.text_compressor == 1:
        table = zlib.compress(table, 6)
    n += 4 + len(table)

    if manifest.options.saving_model:
        n += 4 + len(manifest.model_payload)
    if manifest.options.saving_pixels:
        n += 4 + len(manifest.pixel_payload)
    return n


def reference_manifest():
    """The worked example used across the docs and tests."""
    return GenerationManifest(
        CompressionOptions(False, 0, 1, False, 0),
        PlatformConfig(1, 1, 1),
        ModelConfig(0, 0, {"scheduler": 0}),
        DataConfig("A cute cat", "worst quality", 1024, 1024, 829557441,
                   {"diffusion_steps": 25, "guidance_scale": 7.5}),
    )
