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

#include "ambix/container.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ambix/error.h"

namespace ambix {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container IO assumes a little-endian host");

void AppendU64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::vector<std::uint8_t> SerializeContainer(std::string_view magic,
                                             const nlohmann::json& header,
                                             std::span<const float> payload) {
  Require(magic.size() == 4, ErrorCode::kInvalidArgument, "magic must be 4 bytes");
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(12 + text.size() + payload.size_bytes());
  out.insert(out.end(), magic.begin(), magic.end());
  AppendU64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(payload.data());
  out.insert(out.end(), bytes, bytes + payload.size_bytes());
  return out;
}

void WriteContainer(const std::string& path, std::string_view magic,
                    const nlohmann::json& header, std::span<const float> payload) {
  const auto bytes = SerializeContainer(magic, header, payload);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(out), ErrorCode::kIoError, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  Require(static_cast<bool>(out), ErrorCode::kIoError, "write failed for " + path);
}

Container ReadContainer(const std::string& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIoError, "cannot open " + path);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  Require(bytes.size() >= 12, ErrorCode::kFormatError, path + ": truncated header");
  Require(std::string_view(bytes.data(), 4) == magic, ErrorCode::kFormatError,
          path + ": bad magic, expected " + std::string(magic));
  std::uint64_t header_len = 0;
  for (int i = 0; i < 8; ++i) {
    header_len |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[4 + i])) << (8 * i);
  }
  Require(header_len <= bytes.size() - 12, ErrorCode::kFormatError,
          path + ": header length exceeds file size");
  Container c;
  try {
    c.header = nlohmann::json::parse(bytes.begin() + 12,
                                     bytes.begin() + 12 + static_cast<long>(header_len));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, path + ": unparsable header: " + e.what());
  }
  const std::size_t payload_bytes = bytes.size() - 12 - header_len;
  Require(payload_bytes % sizeof(float) == 0, ErrorCode::kFormatError,
          path + ": payload is not a whole number of float32 values");
  c.payload.resize(payload_bytes / sizeof(float));
  std::memcpy(c.payload.data(), bytes.data() + 12 + header_len, payload_bytes);
  return c;
}

std::string HashBytes(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string HashFloats(std::span<const float> values) {
  return HashBytes({reinterpret_cast<const std::uint8_t*>(values.data()),
                    values.size_bytes()});
}

}  // namespace ambix
