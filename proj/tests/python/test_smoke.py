# Copyright 2026 The bpbn Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Smoke tests for the Python bindings."""

import hashlib
import json
import struct

import numpy as np
import pytest

import bpbn


def bpt_packed(dims, bits):
    """BPT1 packed-bit tensor; bits is a flat sequence of 0/1 with 1 meaning -1."""
    words = [0] * ((len(bits) + 63) // 64)
    for i, b in enumerate(bits):
        if b:
            words[i // 64] |= 1 << (i % 64)
    header = b"BPT1" + struct.pack("<BIII", 0, *dims)
    return header + b"".join(struct.pack("<Q", w) for w in words)


def bpbn_file(meta, blobs, version=1):
    payload = b""
    table = []
    for name, data in blobs:
        table.append({"name": name, "offset": len(payload), "length": len(data),
                      "sha256": hashlib.sha256(data).hexdigest()})
        payload += data
    meta = dict(meta, format="bpbn-model", blobs=table,
                payload_sha256=hashlib.sha256(payload).hexdigest())
    doc = json.dumps(meta).encode()
    return b"BPBN" + struct.pack("<HI", version, len(doc)) + doc + payload


def identity_model_bytes(version=1):
    # One channel, eight planes, 1x1 kernels of -1, identity affine, one +1 head weight.
    meta = {
        "name": "handmade",
        "input": [1, 1, 1],
        "first_layer_mode": "skip-F1",
        "layers": [
            {"kind": "bpie-input", "name": "bpie", "planes": 8, "multiplier": 1, "kernel": 1,
             "padding": "same", "fused_output": "accum", "weights": "bpie.w",
             "affine": [[1.0, 0.0, 1.0, 0.0]] * 8},
            {"kind": "softmax-head", "name": "head", "maps": 1, "weights": "head.w"},
        ],
    }
    blobs = [("bpie.w", bpt_packed((8, 1, 1), [1] * 8)), ("head.w", bpt_packed((1, 1, 1), [0]))]
    return bpbn_file(meta, blobs, version)


def test_pack_round_trip():
    rng = np.random.default_rng(7)
    for shape in [(1, 1, 1), (3, 5, 7), (2, 2, 64), (4, 3, 65)]:
        x = rng.choice(np.array([-1, 1], dtype=np.int8), size=shape)
        t = bpbn.pack_bipolar(x)
        assert t.dims == shape
        assert len(t) == x.size
        assert np.array_equal(bpbn.unpack_bipolar(t), x)
        assert bpbn.from_words(shape, t.words) == t


def test_pack_bit_convention():
    t = bpbn.pack_bipolar(np.array([[[1, -1, -1]]], dtype=np.int8))
    assert list(t.words) == [0b110]


def test_popcount_dot_matches_numpy():
    rng = np.random.default_rng(3)
    for n in [1, 63, 64, 65, 200]:
        a = rng.choice(np.array([-1, 1], dtype=np.int8), size=(1, 1, n))
        b = rng.choice(np.array([-1, 1], dtype=np.int8), size=(1, 1, n))
        expected = int(np.dot(a.ravel().astype(np.int64), b.ravel().astype(np.int64)))
        assert bpbn.popcount_xor_dot(bpbn.pack_bipolar(a), bpbn.pack_bipolar(b)) == expected


def test_bit_rearrange_reconstructs_pixels():
    img = np.arange(256, dtype=np.uint8).reshape(16, 16, 1)
    bits, positions = bpbn.bit_rearrange(img)
    assert bits.shape == (1, 8, 16, 16)
    assert list(positions) == list(range(8))
    weights = np.array([1 << p for p in positions], dtype=np.int64).reshape(1, 8, 1, 1)
    assert np.array_equal((bits * weights).sum(axis=1)[0], img[:, :, 0])


def test_bit_rearrange_keeps_top_planes():
    bits, positions = bpbn.bit_rearrange(np.array([[[0b10110000]]], dtype=np.uint8), planes=3)
    assert list(positions) == [5, 6, 7]
    assert bits.ravel().tolist() == [1, 0, 1]


def test_encode_dbid_example():
    out = bpbn.encode_dbid(np.array([[[5]]], dtype=np.uint8))
    # Plane 0 is the least significant bit; a set bit maps to -1.
    assert out.ravel().tolist() == [-1, 1, -1, 1, 1, 1, 1, 1]


def test_encode_thermometer_monotone():
    levels = np.arange(256, dtype=np.uint8).reshape(1, 256, 1)
    out = bpbn.encode_thermometer(levels, expansion=8)
    assert out.shape == (1, 256, 8)
    negatives = (out[0] == -1).sum(axis=1)
    assert negatives[0] == 0
    assert negatives[-1] == 8
    assert np.all(np.diff(negatives) >= 0)


def test_bpie_forward_identity_reconstructs_pixels():
    img = np.arange(256, dtype=np.uint8).reshape(16, 16, 1)
    kernels = -np.ones((8, 1, 1), dtype=np.int8)
    ones = [1.0] * 8
    zeros = [0.0] * 8
    out = bpbn.bpie_forward(img, kernels, 8, 1, ones, zeros, ones, zeros)
    assert out.shape == (16, 16, 1)
    assert np.array_equal(out[:, :, 0], 2.0 * img[:, :, 0] - 255.0)


def test_bpie_forward_rejects_bad_kernels():
    img = np.zeros((2, 2, 1), dtype=np.uint8)
    with pytest.raises(bpbn.Error):
        bpbn.bpie_forward(img, np.ones((3, 1, 1), dtype=np.int8), 8, 1, [1.0], [0.0], [1.0], [0.0])


def test_cost_report_defaults():
    rows = {r["name"]: r for r in bpbn.cost_report()}
    assert len(rows) >= 5
    baseline = min(rows.values(), key=lambda r: abs(r["ratio"] - 1.0))
    assert baseline["macs"] == 3538944
    assert any(r["macs"] == 9289728 for r in rows.values())


def test_cost_report_rejects_unknown_input():
    with pytest.raises(KeyError):
        bpbn.cost_report(colour=3)


def test_handmade_file_loads_and_runs(tmp_path):
    data = identity_model_bytes()
    model = bpbn.parse_model(data)
    assert model.name == "handmade"
    assert model.input == (1, 1, 1)
    assert model.first_layer_mode == "skip-F1"
    assert [k for _, k in model.layers] == ["bpie-input", "softmax-head"]
    for p in [0, 1, 128, 254, 255]:
        img = np.array([[[p]]], dtype=np.uint8)
        for path in ["production", "reference"]:
            logits = bpbn.run_inference(model, img, path=path)["logits"]
            assert logits == [2 * p - 255]
    target = tmp_path / "handmade.bpbn"
    target.write_bytes(data)
    again = bpbn.load_model(str(target))
    assert bpbn.parse_model(again.to_bytes()).to_bytes() == again.to_bytes()


def test_handmade_file_errors():
    data = bytearray(identity_model_bytes())
    tampered = bytes(data[:-1]) + bytes([data[-1] ^ 1])
    with pytest.raises(bpbn.ModelError, match="digest"):
        bpbn.parse_model(tampered)
    with pytest.raises(bpbn.ModelError, match="version"):
        bpbn.parse_model(identity_model_bytes(version=2))
    with pytest.raises(bpbn.ModelError):
        bpbn.parse_model(b"NOPE" + bytes(data[4:]))
    assert issubclass(bpbn.ModelError, bpbn.Error)


def test_stub_model_and_trace():
    model = bpbn.stub_model((2, 2, 1))
    img = np.array([[[0], [1]], [[200], [255]]], dtype=np.uint8)
    out = bpbn.run_inference(model, img, trace=True)
    assert out["logits"] == [float(sum(2 * int(v) - 255 for v in img.ravel()))]
    assert out["probabilities"] == [1.0]
    assert [name for name, _ in out["trace"]][0] == "bpie"


def test_random_models_agree_across_paths(tmp_path):
    for seed in range(5):
        model = bpbn.random_model(seed)
        img = np.random.default_rng(seed).integers(0, 256, size=model.input, dtype=np.uint8)
        prod = np.array(bpbn.run_inference(model, img)["logits"])
        ref = np.array(bpbn.run_inference(model, img, path="reference")["logits"])
        top = np.sort(ref)[::-1]
        if len(top) > 1 and top[0] - top[1] > 2.0 ** -6:
            assert prod.argmax() == ref.argmax()
        path = tmp_path / f"m{seed}.bpbn"
        bpbn.save_model(model, str(path))
        assert bpbn.load_model(str(path)).to_bytes() == model.to_bytes()
        assert sum(m for _, m in model.layer_macs()) > 0


def test_shape_mismatch_raises():
    model = bpbn.stub_model((2, 2, 1))
    with pytest.raises(bpbn.Error):
        bpbn.run_inference(model, np.zeros((3, 3, 1), dtype=np.uint8))
    with pytest.raises(ValueError):
        bpbn.run_inference(model, np.zeros((2, 2, 1), dtype=np.uint8), path="fast")
