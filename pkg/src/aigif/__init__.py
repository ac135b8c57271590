"""aigif: a bit-exact codec for AI image generation syntax containers.

An AIGIF file stores the inputs that produced an AI-generated image
(compression options, platform, model, data configuration) instead of
pixels, with optional embedded payloads as fallback.
"""

from .bitstream import BitReader, BitWriter, decode_exp_code, encode_exp_code
from .compat import CompatLevel, CompatReport, Fidelity, check_compat
from .container import (
    CompressionOptions,
    DataConfig,
    GenerationManifest,
    ModelConfig,
    PlatformConfig,
    SizeReport,
    TLVRecord,
    decode,
    encode,
    size_report,
)
from .errors import AigifError, DecodeError, EncodeError, ValidationError
from .mockgen import MockImage, generate, generate_with_drift, psnr
from .registry import (
    ModelSchema,
    RegistrySet,
    SchemaField,
    builtin_registry,
    extend_registry,
    schema_for,
)

__version__ = "0.1.0"
