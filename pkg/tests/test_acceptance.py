"""Acceptance suite: one test per release criterion, each printing a
PASS line with its measured numbers when it holds."""

import concurrent.futures
import json
import math
import random
import time

import pytest

from aigif import cli
from aigif.bitstream import BitReader, decode_exp_code, encode_exp_code
from aigif.compat import CompatLevel, Fidelity, check_compat
from aigif.container import decode, encode, size_report
from aigif.errors import AigifError, DecodeError
from aigif.jsonio import manifest_to_json
from aigif.mockgen import LOSSLESS, generate, generate_with_drift, psnr
from aigif.registry import builtin_registry

from helpers import random_manifest, reference_manifest, wide_registry
from test_compat import all_platforms

REG = builtin_registry()
WIDE = wide_registry()


def report(name, detail):
    print("ACCEPTANCE %-28s PASS  (%s)" % (name, detail))


def test_size_claim():
    start = time.perf_counter()
    r = size_report(reference_manifest(), REG)
    elapsed = time.perf_counter() - start
    assert r.encoded_bytes <= 314
    assert r.raw_pixel_bytes == 3_145_728
    assert r.ratio >= 10_000
    assert elapsed < 1.0
    report("size-claim", "%d bytes, ratio %.0f, %.3fs"
           % (r.encoded_bytes, r.ratio, elapsed))


def test_roundtrip_property_suite():
    start = time.perf_counter()
    rng = random.Random(0xA161F)
    for i in range(1000):
        m = random_manifest(rng, WIDE)
        data = encode(m, WIDE)
        out = decode(data, WIDE)
        assert out == m, "round trip mismatch at case %d" % i
        assert encode(out, WIDE) == data, "re-encode not idempotent at case %d" % i
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report("round-trip-1000", "1000 manifests, %.2fs" % elapsed)


def test_exp_code_suite():
    start = time.perf_counter()
    for value in range(100_001):
        data = encode_exp_code(value)
        assert len(data) == value // 255 + 1
        assert decode_exp_code(BitReader(data)) == value
    vectors = [(0, b"\x00"), (254, b"\xfe"), (255, b"\xff\x00"),
               (509, b"\xff\xfe"), (510, b"\xff\xff\x00")]
    for value, encoded in vectors:
        assert encode_exp_code(value) == encoded
        assert decode_exp_code(BitReader(encoded)) == value
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report("exp-code", "0..100000 exhaustive + 5 vectors, %.2fs" % elapsed)


def test_decoder_robustness_truncation():
    rng = random.Random(13)
    m = random_manifest(rng, WIDE)
    m.options.saving_pixels = True
    m.pixel_payload = b"\x89PNG\r\n\x1a\n123"
    m.options.saving_model = True
    m.model_payload = bytes(16)
    data = encode(m, WIDE)
    for cut in range(len(data)):
        with pytest.raises(DecodeError) as exc:
            decode(data[:cut], WIDE)
        assert exc.value.field, "truncation at %d lost its field name" % cut
    report("truncation", "%d byte-boundary prefixes all structured" % len(data))


def test_decoder_robustness_fuzz():
    start = time.perf_counter()
    rng = random.Random(0xF0220)
    seeds = [encode(reference_manifest(), REG),
             encode(random_manifest(rng, WIDE), WIDE)]
    outcomes = {"ok": 0, "error": 0}
    n = 1_000_000
    for i in range(n):
        if i % 10 == 0:
            # mutate a valid file: flip bytes, truncate, or extend
            base = bytearray(rng.choice(seeds))
            for _ in range(rng.randrange(1, 4)):
                base[rng.randrange(len(base))] = rng.randrange(256)
            if rng.random() < 0.3:
                base = base[:rng.randrange(len(base) + 1)]
            data = bytes(base)
        else:
            data = (b"AIGF" if rng.random() < 0.2 else b"") \
                + rng.randbytes(rng.randrange(48))
        try:
            decode(data, WIDE)
            outcomes["ok"] += 1
        except AigifError:
            outcomes["error"] += 1
    elapsed = time.perf_counter() - start
    assert outcomes["ok"] + outcomes["error"] == n
    assert elapsed < 600.0
    report("fuzz", "%d inputs, %d decoded, %d structured errors, %.1fs"
           % (n, outcomes["ok"], outcomes["error"], elapsed))


def test_mock_recreation_determinism():
    start = time.perf_counter()
    m = reference_manifest()
    m.data.height = m.data.width = 512
    decoded = decode(encode(m, REG), REG)

    a = generate(decoded)
    b = generate(decode(encode(m, REG), REG))
    assert a == b
    with concurrent.futures.ThreadPoolExecutor(max_workers=2) as pool:
        c, d = pool.map(generate, [decoded, decoded])
    assert a == c == d

    assert psnr(a, a) == LOSSLESS

    drifted = generate_with_drift(decoded, 1)
    bound = 20 * math.log10(255.0)  # max per-channel error 1 => >= 48.13 dB
    value = psnr(a, drifted)
    assert value == LOSSLESS or value >= bound
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report("mock-determinism", "512x512, drift-1 PSNR %.2f dB >= %.2f, %.2fs"
           % (value if value != LOSSLESS else float("inf"), bound, elapsed))


def test_compat_decision_table():
    start = time.perf_counter()
    platforms = list(all_platforms(REG))
    checked = 0
    for a in platforms:
        for b in platforms:
            rep = check_compat(a, b, REG)
            if a.device != b.device:
                assert rep.fidelity_expectation is not Fidelity.BIT_EXACT
            checked += 1
    cpu_file = decode(encode(_cpu_manifest(), REG), REG)
    rep = check_compat(cpu_file.platform, platforms[-1], REG)
    assert rep.level is CompatLevel.CROSS_CLASS
    assert any("51.31" in note for note in rep.notes)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report("compat-table", "%d pairs exhaustive, %.3fs" % (checked, elapsed))


def _cpu_manifest():
    m = reference_manifest()
    m.platform.device = 0
    m.platform.gpu = 0
    m.platform.cuda = 0
    return m


def test_registry_expandability(tmp_path, capsys):
    reg_file = tmp_path / "user.reg"
    reg_file.write_text("models:255:field-registered-model\n")
    doc = manifest_to_json(reference_manifest(), REG)
    doc["model"]["id"] = "field-registered-model"
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps(doc))
    out = tmp_path / "m.aigif"
    assert cli.main(["pack", str(mpath), str(out), "--registry", str(reg_file)]) == 0
    back = tmp_path / "back.json"
    assert cli.main(["unpack", str(out), "--manifest", str(back),
                     "--registry", str(reg_file)]) == 0
    assert json.loads(back.read_text())["model"]["id"] == "field-registered-model"
    capsys.readouterr()

    # the wire id must occupy two exp-code bytes
    from aigif.registry import extend_registry
    trace = []
    decode(out.read_bytes(),
           extend_registry(REG, [("models", 255, "field-registered-model")]),
           trace=trace)
    id_bits = sum(t.bit_width for t in trace if t.name == "model_id")
    assert id_bits == 16
    report("registry-expand", "model 255 via user file, 2-byte wire id")
