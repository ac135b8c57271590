"""Deterministic stand-in image generator plus PSNR measurement.

The mock generator maps a manifest to pixels through two small,
language-neutral primitives so an independent implementation can
reproduce it byte for byte:

  * FNV-1a (64-bit) hashes prompt bytes, 0x00, negative-prompt bytes.
  * splitmix64 provides both the seed mixer and the pixel stream.

Seed derivation: start from the stored 32-bit seed, then for each of
(height, width, model_id, diffusion_steps, big-endian bit pattern of
guidance_scale as f32, prompt hash) in that order, XOR the value in and
apply the splitmix64 step.  Pixels are the resulting stream's output
words taken big-endian, 8 bytes per word, truncated to height*width*3.
"""

import math
import struct
from dataclasses import dataclass

from .errors import AigifError, ValidationError

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# stream-domain separator for the drift offsets
_DRIFT_SALT = 0xD21F7


@dataclass
class MockImage:
    height: int
    width: int
    pixels: bytes

    def __post_init__(self):
        if len(self.pixels) != self.height * self.width * 3:
            raise ValidationError("pixel buffer length must be height*width*3")


def _splitmix64(state):
    state = (state + _GOLDEN) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return state, z ^ (z >> 31)


def _mix(state, value):
    _, z = _splitmix64(state ^ (value & _M64))
    return z


def _fnv1a64(data):
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _M64
    return h


def _stream_bytes(state, nbytes):
    words = []
    for _ in range((nbytes + 7) // 8):
        state, z = _splitmix64(state)
        words.append(z.to_bytes(8, "big"))
    return b"".join(words)[:nbytes]


def derive_seed(manifest):
    """64-bit generator seed mixed from every content-determining field."""
    d = manifest.data
    text = _fnv1a64(d.prompt.encode("utf-8") + b"\x00"
                    + d.negative_prompt.encode("utf-8"))
    guidance = d.model_data_fields.get("guidance_scale", 0.0)
    guidance_bits = struct.unpack(">I", struct.pack(">f", guidance))[0]
    steps = d.model_data_fields.get("diffusion_steps", 0)
    state = d.seed & _M64
    for value in (d.height, d.width, manifest.model.model_id, steps,
                  guidance_bits, text):
        state = _mix(state, value)
    return state


def generate(manifest):
    """Deterministic pseudo-image for a manifest; pure function."""
    h, w = manifest.data.height, manifest.data.width
    if h < 1 or w < 1:
        raise ValidationError("height and width must be >= 1")
    return MockImage(h, w, _stream_bytes(derive_seed(manifest), h * w * 3))


def generate_with_drift(manifest, drift_amplitude):
    """generate() with each channel offset by a deterministic value in
    [-drift_amplitude, +drift_amplitude], clamped to 0..255."""
    if drift_amplitude < 0:
        raise ValidationError("drift amplitude must be non-negative")
    base = generate(manifest)
    if drift_amplitude == 0:
        return base
    span = 2 * drift_amplitude + 1
    # 16-bit samples so amplitudes up to 255 stay unbiased enough for tests
    noise = _stream_bytes(_mix(derive_seed(manifest), _DRIFT_SALT), 2 * len(base.pixels))
    out = bytearray(len(base.pixels))
    for i, px in enumerate(base.pixels):
        sample = (noise[2 * i] << 8) | noise[2 * i + 1]
        offset = sample % span - drift_amplitude
        out[i] = min(255, max(0, px + offset))
    return MockImage(base.height, base.width, bytes(out))


LOSSLESS = "lossless"


def psnr(a, b):
    """PSNR in dB over all channels; identical images report "lossless"."""
    if (a.height, a.width) != (b.height, b.width):
        raise AigifError("image dimensions differ: %dx%d vs %dx%d"
                         % (a.width, a.height, b.width, b.height))
    sq = 0
    for x, y in zip(a.pixels, b.pixels):
        d = x - y
        sq += d * d
    if sq == 0:
        return LOSSLESS
    mse = sq / len(a.pixels)
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def write_ppm(image, path):
    """Binary PPM (P6), maxval 255, row-major RGB."""
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (image.width, image.height))
        fh.write(image.pixels)


def read_ppm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise AigifError("not a binary PPM (P6) file")
    parts = data.split(b"\n", 3)
    if len(parts) != 4:
        raise AigifError("malformed PPM header")
    width, height = (int(v) for v in parts[1].split())
    if parts[2] != b"255":
        raise AigifError("unsupported PPM maxval %r" % parts[2])
    return MockImage(height, width, parts[3])
