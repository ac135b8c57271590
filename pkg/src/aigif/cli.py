"""Command-line front end: pack, unpack, inspect, size, compat."""

import argparse
import json
import os
import sys
import tempfile

from . import compat, container, jsonio, mockgen, registry as reg
from .errors import AigifError

HOST_PLATFORM_ENV = "AIGIF_HOST_PLATFORM"


def _atomic_write(path, data):
    """Write to a temp file in the target directory, rename on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".aigif-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _load_registry(args):
    registry = reg.builtin_registry()
    additions = []
    schemas = []
    if getattr(args, "registry", None):
        additions = reg.load_registry_file(args.registry)
    if getattr(args, "schema", None):
        schemas = reg.load_schema_file(args.schema)
    if additions or schemas:
        registry = reg.extend_registry(registry, additions, schemas)
    return registry


def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise AigifError("invalid manifest JSON in %s: %s" % (path, exc)) from None


def _resolve_payload(flag_path, ref, json_path):
    """Payload bytes from an explicit flag, else the JSON's file reference."""
    path = flag_path
    if path is None and ref:
        path = os.path.join(os.path.dirname(os.path.abspath(json_path)), ref)
    if path is None:
        return None
    with open(path, "rb") as fh:
        return fh.read()


def cmd_pack(args):
    registry = _load_registry(args)
    doc = _read_json(args.manifest)
    manifest, refs = jsonio.manifest_from_json(doc, registry)
    manifest.pixel_payload = _resolve_payload(
        args.pixels, refs.get("pixel_file"), args.manifest)
    manifest.model_payload = _resolve_payload(
        args.model_payload, refs.get("model_file"), args.manifest)
    encoded = container.encode(manifest, registry)
    _atomic_write(args.out, encoded)
    report = container.size_report(manifest, registry)
    print("wrote %s: %d bytes (raw pixels %d bytes, ratio %.1f)"
          % (args.out, report.encoded_bytes, report.raw_pixel_bytes, report.ratio))
    return 0


def _host_platform(args, registry):
    spec = None
    if getattr(args, "device", None) is not None:
        spec = (args.device, args.gpu or 0, args.cuda or 0)
    elif os.environ.get(HOST_PLATFORM_ENV):
        parts = os.environ[HOST_PLATFORM_ENV].split(",")
        if len(parts) != 3:
            raise AigifError("%s must be 'device,gpu,cuda' codes" % HOST_PLATFORM_ENV)
        spec = tuple(int(p) for p in parts)
    if spec is None:
        return None
    return container.PlatformConfig(spec[0], spec[1], spec[2])


def cmd_unpack(args):
    registry = _load_registry(args)
    with open(args.input, "rb") as fh:
        data = fh.read()
    manifest = container.decode(data, registry)
    for warning in container.payload_warnings(manifest, registry):
        print("warning: %s" % warning, file=sys.stderr)

    host = _host_platform(args, registry)
    if host is not None:
        report = compat.check_compat(manifest.platform, host, registry)
        if report.level is not compat.CompatLevel.EXACT:
            print("warning: platform mismatch (%s); %s" %
                  (report.level.value, "; ".join(report.notes)), file=sys.stderr)
            if manifest.pixel_payload is not None:
                print("warning: embedded pixel payload present; prefer it over "
                      "recreation", file=sys.stderr)

    pixel_ref = model_ref = None
    if manifest.pixel_payload is not None and args.pixels_out:
        _atomic_write(args.pixels_out, manifest.pixel_payload)
        pixel_ref = args.pixels_out
    if manifest.model_payload is not None and args.model_out:
        _atomic_write(args.model_out, manifest.model_payload)
        model_ref = args.model_out

    doc = jsonio.manifest_to_json(manifest, registry, pixel_ref, model_ref)
    text = json.dumps(doc, indent=2) + "\n"
    if args.manifest:
        _atomic_write(args.manifest, text.encode("utf-8"))
    else:
        sys.stdout.write(text)

    if args.mock_recreate:
        image = mockgen.generate(manifest)
        tmp = args.mock_recreate + ".tmp"
        mockgen.write_ppm(image, tmp)
        os.replace(tmp, args.mock_recreate)
    return 0


def _format_trace(trace):
    lines = []
    section = None
    for entry in trace:
        if entry.section != section:
            section = entry.section
            lines.append("[%s]" % section)
        offset = "byte %5d bit %d" % (entry.bit_offset // 8, entry.bit_offset % 8)
        width = "%3d bits" % entry.bit_width if entry.bit_width else "  (block)"
        raw = entry.raw
        if isinstance(raw, str) and entry.bit_width and entry.bit_width % 8 == 0 \
                and len(raw) > 32:
            raw = raw[:32] + "..."
        line = "  %-28s %s  %s  raw=%s" % (entry.name, offset, width, raw)
        if entry.resolved is not None:
            line += "  (%s)" % entry.resolved
        lines.append(line)
    return "\n".join(lines)


def cmd_inspect(args):
    registry = _load_registry(args)
    with open(args.input, "rb") as fh:
        data = fh.read()
    trace = []
    manifest = container.decode(data, registry, trace=trace)
    print("AIGIF file: %s (%d bytes)" % (args.input, len(data)))
    print(_format_trace(trace))
    for warning in container.payload_warnings(manifest, registry):
        print("warning: %s" % warning, file=sys.stderr)
    return 0


def cmd_size(args):
    registry = _load_registry(args)
    with open(args.input, "rb") as fh:
        data = fh.read()
    manifest = container.decode(data, registry)
    raw = manifest.data.height * manifest.data.width * 3
    print("encoded: %d bytes" % len(data))
    print("raw pixels: %d bytes" % raw)
    print("ratio: %.1f" % (raw / len(data)))
    return 0


def cmd_compat(args):
    registry = _load_registry(args)
    with open(args.input, "rb") as fh:
        data = fh.read()
    manifest = container.decode(data, registry)
    host = _host_platform(args, registry)
    if host is None:
        raise AigifError("host platform unknown: pass --device/--gpu/--cuda or set %s"
                         % HOST_PLATFORM_ENV)
    report = compat.check_compat(manifest.platform, host, registry)
    print("level: %s" % report.level.value)
    print("fidelity expectation: %s" % report.fidelity_expectation.value)
    for note in report.notes:
        print("note: %s" % note)
    return 0


def _add_registry_flags(p):
    p.add_argument("--registry", help="extra registry entries (table:code:name lines)")
    p.add_argument("--schema", help="extra model schemas (model:field:type lines)")


def _add_host_flags(p):
    p.add_argument("--device", type=int, help="host device code")
    p.add_argument("--gpu", type=int, help="host gpu code")
    p.add_argument("--cuda", type=int, help="host cuda code")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aigif",
        description="Pack, unpack and inspect AIGIF files (AI image generation "
                    "syntax containers).")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("pack", help="encode a manifest JSON into an AIGIF file")
    p.add_argument("manifest")
    p.add_argument("out")
    p.add_argument("--pixels", help="pixel payload file to embed")
    p.add_argument("--model-payload", dest="model_payload",
                   help="model payload file to embed")
    _add_registry_flags(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("unpack", help="decode an AIGIF file")
    p.add_argument("input")
    p.add_argument("--manifest", help="write manifest JSON here (default stdout)")
    p.add_argument("--pixels-out", dest="pixels_out",
                   help="extract the pixel payload here")
    p.add_argument("--model-out", dest="model_out",
                   help="extract the model payload here")
    p.add_argument("--mock-recreate", dest="mock_recreate",
                   help="write a deterministic mock recreation as PPM")
    _add_registry_flags(p)
    _add_host_flags(p)
    p.set_defaults(func=cmd_unpack)

    p = sub.add_parser("inspect", help="dump every field with offsets")
    p.add_argument("input")
    _add_registry_flags(p)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("size", help="report encoded vs raw pixel size")
    p.add_argument("input")
    _add_registry_flags(p)
    p.set_defaults(func=cmd_size)

    p = sub.add_parser("compat", help="check file platform against the host")
    p.add_argument("input")
    _add_registry_flags(p)
    _add_host_flags(p)
    p.set_defaults(func=cmd_compat)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AigifError as exc:
        print("aigif: error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("aigif: error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
