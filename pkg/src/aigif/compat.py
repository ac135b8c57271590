"""Platform compatibility between a file's recorded platform and the host.

Classification is by the three platform codes alone.  Fidelity
expectations come from a static decision table built on measured
cross-device recreation behavior: identical GPU models recreate
losslessly even across driver stacks, different hardware of the same
class lands well above the 50 dB PSNR imperceptibility threshold, and
crossing the CPU/GPU boundary was measured around 51.31 dB with a
multi-step sampler, so it is never treated as bit-exact.
"""

import enum
from dataclasses import dataclass, field

from .errors import UnknownCodeError

CROSS_CLASS_PSNR_DB = 51.31
IMPERCEPTIBLE_PSNR_DB = 50.0


class CompatLevel(enum.Enum):
    EXACT = "Exact"
    SAME_DEVICE_CLASS = "SameDeviceClass"
    CROSS_CLASS = "CrossClass"


class Fidelity(enum.Enum):
    BIT_EXACT = "BitExact"
    IMPERCEPTIBLE_LOSS = "ImperceptibleLoss"
    PERCEPTIBLE_RISK = "PerceptibleRisk"


@dataclass
class CompatReport:
    level: CompatLevel
    fidelity_expectation: Fidelity
    notes: list = field(default_factory=list)


_SCHEDULER_NOTE = ("multi-step samplers (e.g. DPM++ 2M) amplify floating-point "
                   "drift across platforms; prefer DDIM for cross-platform recreation")


def check_compat(file_platform, host_platform, registry=None):
    """Compare two platform configs; symmetric in the level it assigns."""
    if registry is not None:
        for cfg in (file_platform, host_platform):
            for table, code in (("devices", cfg.device), ("gpus", cfg.gpu),
                                ("cuda_versions", cfg.cuda)):
                if not registry.has_code(table, code):
                    raise UnknownCodeError(table, code)

    a, b = file_platform, host_platform
    if a.device == b.device:
        if a.gpu == b.gpu and a.cuda == b.cuda:
            return CompatReport(CompatLevel.EXACT, Fidelity.BIT_EXACT,
                                ["platforms match exactly"])
        if a.gpu == b.gpu and _is_gpu(a, registry):
            return CompatReport(
                CompatLevel.SAME_DEVICE_CLASS, Fidelity.BIT_EXACT,
                ["identical GPU model; recreation measured lossless despite "
                 "differing CUDA builds"])
        return CompatReport(
            CompatLevel.SAME_DEVICE_CLASS, Fidelity.IMPERCEPTIBLE_LOSS,
            ["same device class, different hardware; expect PSNR above %.0f dB"
             % IMPERCEPTIBLE_PSNR_DB, _SCHEDULER_NOTE])
    return CompatReport(
        CompatLevel.CROSS_CLASS, Fidelity.IMPERCEPTIBLE_LOSS,
        ["CPU/GPU boundary crossed; never bit-exact",
         "reference cross-device measurement: %.2f dB PSNR, above the %.0f dB "
         "imperceptibility threshold" % (CROSS_CLASS_PSNR_DB, IMPERCEPTIBLE_PSNR_DB),
         _SCHEDULER_NOTE])


def _is_gpu(cfg, registry):
    if registry is not None:
        return registry.name_of("devices", cfg.device) == "GPU"
    return cfg.device != 0  # builtin convention: 0=CPU
