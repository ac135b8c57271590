import itertools

import pytest

from aigif.compat import CompatLevel, Fidelity, check_compat
from aigif.container import PlatformConfig
from aigif.errors import UnknownCodeError
from aigif.registry import builtin_registry, extend_registry

REG = builtin_registry()
RTX = extend_registry(REG, [("gpus", 2, "NVIDIARTX3090")])


def all_platforms(registry):
    for device in registry.codes("devices"):
        if registry.name_of("devices", device) == "CPU":
            yield PlatformConfig(device, 0, 0)
        else:
            for gpu in registry.codes("gpus"):
                for cuda in registry.codes("cuda_versions"):
                    yield PlatformConfig(device, gpu, cuda)


class TestLevels:
    def test_identical_is_exact_bitexact(self):
        cfg = PlatformConfig(1, 1, 1)
        report = check_compat(cfg, cfg, REG)
        assert report.level is CompatLevel.EXACT
        assert report.fidelity_expectation is Fidelity.BIT_EXACT

    def test_same_gpu_model_differing_cuda(self):
        a = PlatformConfig(1, 2, 0)
        b = PlatformConfig(1, 2, 1)
        report = check_compat(a, b, RTX)
        assert report.level is CompatLevel.SAME_DEVICE_CLASS
        assert report.fidelity_expectation is Fidelity.BIT_EXACT

    def test_same_class_different_gpu(self):
        report = check_compat(PlatformConfig(1, 1, 1), PlatformConfig(1, 2, 1), RTX)
        assert report.level is CompatLevel.SAME_DEVICE_CLASS
        assert report.fidelity_expectation is Fidelity.IMPERCEPTIBLE_LOSS

    def test_cpu_vs_gpu_reports_cross_class_with_measurement(self):
        report = check_compat(PlatformConfig(0, 0, 0), PlatformConfig(1, 1, 1), REG)
        assert report.level is CompatLevel.CROSS_CLASS
        assert report.fidelity_expectation is Fidelity.IMPERCEPTIBLE_LOSS
        assert any("51.31" in note for note in report.notes)
        assert any("DPM++" in note for note in report.notes)

    def test_same_cpu_class(self):
        report = check_compat(PlatformConfig(0, 0, 0), PlatformConfig(0, 0, 0), REG)
        assert report.level is CompatLevel.EXACT

    def test_unregistered_code(self):
        with pytest.raises(UnknownCodeError):
            check_compat(PlatformConfig(9, 0, 0), PlatformConfig(0, 0, 0), REG)


class TestExhaustiveProperties:
    def test_level_symmetry(self):
        platforms = list(all_platforms(REG))
        for a, b in itertools.product(platforms, repeat=2):
            assert check_compat(a, b, REG).level is check_compat(b, a, REG).level

    def test_never_bitexact_across_device_classes(self):
        platforms = list(all_platforms(REG))
        for a, b in itertools.product(platforms, repeat=2):
            report = check_compat(a, b, REG)
            if a.device != b.device:
                assert report.level is CompatLevel.CROSS_CLASS
                assert report.fidelity_expectation is not Fidelity.BIT_EXACT
