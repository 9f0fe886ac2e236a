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

"""Bit-plane input binarization engine for binary neural networks."""

from ._bpbn import (
    Error,
    Model,
    ModelError,
    PackedBitTensor,
    bit_rearrange,
    bpie_forward,
    cost_report,
    encode_dbid,
    encode_thermometer,
    from_words,
    load_model,
    pack_bipolar,
    parse_model,
    popcount_xor_dot,
    random_model,
    run_inference,
    save_model,
    stub_model,
    unpack_bipolar,
)

__all__ = [
    "Error",
    "Model",
    "ModelError",
    "PackedBitTensor",
    "bit_rearrange",
    "bpie_forward",
    "cost_report",
    "encode_dbid",
    "encode_thermometer",
    "from_words",
    "load_model",
    "pack_bipolar",
    "parse_model",
    "popcount_xor_dot",
    "random_model",
    "run_inference",
    "save_model",
    "stub_model",
    "unpack_bipolar",
]
