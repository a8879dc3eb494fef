# Copyright 2026 The Ambix Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Microphone array to Ambisonics encoding."""

from ambix._ambix import (
    AmbixError,
    build_dataset,
    encode,
    encode_static,
    fibonacci_grid,
    istft,
    load_atf,
    metrics,
    parameter_count,
    read_wav,
    sh_vector,
    si_sdr,
    stft,
    write_wav,
)

__all__ = [
    "AmbixError",
    "build_dataset",
    "encode",
    "encode_static",
    "fibonacci_grid",
    "istft",
    "load_atf",
    "metrics",
    "parameter_count",
    "read_wav",
    "sh_vector",
    "si_sdr",
    "stft",
    "write_wav",
]
