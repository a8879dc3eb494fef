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

#ifndef AMBIX_CONTAINER_H_
#define AMBIX_CONTAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlohmann/json.hpp"

namespace ambix {

// Binary container shared by ATF, encoder and checkpoint files:
//   4-byte magic | uint64 LE header length | JSON header | float32 LE payload
struct Container {
  nlohmann::json header;
  std::vector<float> payload;
};

void WriteContainer(const std::string& path, std::string_view magic,
                    const nlohmann::json& header, std::span<const float> payload);
// Throws kFormatError on magic mismatch, truncation or unparsable header, and
// kIoError when the file cannot be opened.
Container ReadContainer(const std::string& path, std::string_view magic);

std::vector<std::uint8_t> SerializeContainer(std::string_view magic,
                                             const nlohmann::json& header,
                                             std::span<const float> payload);

// 64-bit FNV-1a, hex encoded.
std::string HashBytes(std::span<const std::uint8_t> bytes);
std::string HashFloats(std::span<const float> values);

}  // namespace ambix

#endif  // AMBIX_CONTAINER_H_
