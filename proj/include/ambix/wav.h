// Copyright 2026 The Ambix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMBIX_WAV_H_
#define AMBIX_WAV_H_

#include <string>

#include "ambix/dsp.h"

namespace ambix {

struct WavInfo {
  int format_tag = 0;  // 1 PCM, 3 IEEE float (extensible resolved)
  int bits = 0;
  std::string comment;  // LIST/INFO ICMT, if present
};

// Reads 16/24/32-bit PCM and 32/64-bit float RIFF/WAVE, including
// WAVE_FORMAT_EXTENSIBLE. Samples are scaled to [-1, 1).
AudioBuffer ReadWav(const std::string& path, WavInfo* info = nullptr);

// Writes 32-bit float little-endian with an optional ICMT comment.
void WriteWav(const std::string& path, const AudioBuffer& audio,
              const std::string& comment = "");

}  // namespace ambix

#endif  // AMBIX_WAV_H_
