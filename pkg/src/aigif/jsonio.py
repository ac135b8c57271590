"""JSON rendering of a manifest, used by the CLI and external tooling.

Codes appear as registry names, TLV values as hex strings, payloads as
external file references (never inline).  Shape:

    {
      "format": "aigif-manifest",
      "version": 1,
      "options": {"saving_pixels": false, "pixel_compressor": "None",
                  "text_compressor": "zlib", "saving_model": false,
                  "model_compressor": "None"},
      "platform": {"device": "GPU", "gpu": "NVIDIAGeForceGTX1080Ti",
                   "cuda": "cu121", "extras": [{"tag": 7, "value_hex": ".."}]},
      "model": {"id": "stable-diffusion-v1-5", "data_type": "float32",
                "fields": {"scheduler": "DDIM"}},
      "data": {"prompt": "..", "negative_prompt": "..", "height": 1024,
               "width": 1024, "seed": 829557441,
               "fields": {"diffusion_steps": 25, "guidance_scale": 7.5}},
      "extensions": [{"tag": 9, "value_hex": ".."}],
      "payloads": {"pixel_file": null, "model_file": null}
    }
"""

from .container import (
    CompressionOptions,
    DataConfig,
    GenerationManifest,
    ModelConfig,
    PlatformConfig,
    TLVRecord,
    U32_MAX,
)
from .errors import ValidationError

FORMAT_NAME = "aigif-manifest"
FORMAT_VERSION = 1


def _tlv_to_json(rec):
    return {"tag": rec.tag, "value_hex": rec.value.hex()}


def _tlv_from_json(doc, where):
    try:
        return TLVRecord(int(doc["tag"]), bytes.fromhex(doc["value_hex"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("%s: bad TLV record: %s" % (where, exc)) from None


def manifest_to_json(manifest, registry, pixel_file=None, model_file=None):
    """Render a manifest as a JSON-compatible dict (payloads by reference)."""
    o, p, m, d = manifest.options, manifest.platform, manifest.model, manifest.data
    schema = registry.schema_for(m.model_id)
    model_fields = {}
    for f in schema.model_fields:
        value = m.model_fields[f.name]
        if f.name == "scheduler":
            value = registry.name_of("schedulers", value)
        model_fields[f.name] = value
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "options": {
            "saving_pixels": o.saving_pixels,
            "pixel_compressor": registry.name_of("pixel_compressors", o.pixel_compressor),
            "text_compressor": registry.name_of("text_compressors", o.text_compressor),
            "saving_model": o.saving_model,
            "model_compressor": registry.name_of("model_compressors", o.model_compressor),
        },
        "platform": {
            "device": registry.name_of("devices", p.device),
            "gpu": registry.name_of("gpus", p.gpu),
            "cuda": registry.name_of("cuda_versions", p.cuda),
            "extras": [_tlv_to_json(rec) for rec in p.extras],
        },
        "model": {
            "id": registry.name_of("models", m.model_id),
            "data_type": registry.name_of("data_types", m.data_type),
            "fields": model_fields,
        },
        "data": {
            "prompt": d.prompt,
            "negative_prompt": d.negative_prompt,
            "height": d.height,
            "width": d.width,
            "seed": d.seed,
            "fields": dict(d.model_data_fields),
        },
        "extensions": [_tlv_to_json(rec) for rec in manifest.extensions],
        "payloads": {"pixel_file": pixel_file, "model_file": model_file},
    }


def _require(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError("manifest JSON: missing %r in %s" % (key, where))
    return doc[key]


def manifest_from_json(doc, registry, pixel_payload=None, model_payload=None):
    """Parse the interchange dict back into a GenerationManifest.

    Payload bytes are supplied by the caller (the JSON only references
    files); returns (manifest, payload_references) where the references
    are the raw "payloads" entries for callers that resolve them.
    """
    if _require(doc, "format", "document") != FORMAT_NAME:
        raise ValidationError("manifest JSON: unexpected format %r" % doc.get("format"))
    if _require(doc, "version", "document") != FORMAT_VERSION:
        raise ValidationError("manifest JSON: unsupported version %r" % doc.get("version"))

    odoc = _require(doc, "options", "document")
    options = CompressionOptions(
        saving_pixels=bool(_require(odoc, "saving_pixels", "options")),
        pixel_compressor=registry.code_of("pixel_compressors",
                                          _require(odoc, "pixel_compressor", "options")),
        text_compressor=registry.code_of("text_compressors",
                                         _require(odoc, "text_compressor", "options")),
        saving_model=bool(_require(odoc, "saving_model", "options")),
        model_compressor=registry.code_of("model_compressors",
                                          _require(odoc, "model_compressor", "options")),
    )

    pdoc = _require(doc, "platform", "document")
    platform = PlatformConfig(
        device=registry.code_of("devices", _require(pdoc, "device", "platform")),
        gpu=registry.code_of("gpus", _require(pdoc, "gpu", "platform")),
        cuda=registry.code_of("cuda_versions", _require(pdoc, "cuda", "platform")),
        extras=[_tlv_from_json(rec, "platform extras")
                for rec in pdoc.get("extras", [])],
    )

    mdoc = _require(doc, "model", "document")
    model_id = registry.code_of("models", _require(mdoc, "id", "model"))
    schema = registry.schema_for(model_id)
    raw_fields = _require(mdoc, "fields", "model")
    model_fields = {}
    for f in schema.model_fields:
        value = _require(raw_fields, f.name, "model fields")
        if f.name == "scheduler":
            value = registry.code_of("schedulers", value)
        model_fields[f.name] = int(value)
    model = ModelConfig(model_id, registry.code_of(
        "data_types", _require(mdoc, "data_type", "model")), model_fields)

    ddoc = _require(doc, "data", "document")
    seed = int(_require(ddoc, "seed", "data"))
    if not 0 <= seed <= U32_MAX:
        raise ValidationError("manifest JSON: seed must fit in 32 bits")
    raw_fields = _require(ddoc, "fields", "data")
    data_fields = {}
    for f in schema.data_fields:
        value = _require(raw_fields, f.name, "data fields")
        if f.wire_type in ("u16", "u32"):
            value = int(value)
        elif f.wire_type == "f32":
            value = float(value)
        data_fields[f.name] = value
    data = DataConfig(
        prompt=str(_require(ddoc, "prompt", "data")),
        negative_prompt=str(_require(ddoc, "negative_prompt", "data")),
        height=int(_require(ddoc, "height", "data")),
        width=int(_require(ddoc, "width", "data")),
        seed=seed,
        model_data_fields=data_fields,
    )

    extensions = [_tlv_from_json(rec, "extensions")
                  for rec in doc.get("extensions", [])]
    payload_refs = doc.get("payloads", {}) or {}
    manifest = GenerationManifest(options, platform, model, data, extensions,
                                  pixel_payload, model_payload)
    return manifest, payload_refs
