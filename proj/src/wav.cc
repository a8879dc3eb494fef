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

#include "ambix/wav.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "ambix/error.h"

namespace ambix {
namespace {

constexpr int kPcm = 1;
constexpr int kFloat = 3;
constexpr int kExtensible = 0xFFFE;

std::uint32_t U32(const std::uint8_t* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t U16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void Put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void Put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void PutTag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

double Sample(const std::uint8_t* p, int format, int bits) {
  if (format == kFloat) {
    if (bits == 32) {
      float f;
      std::uint32_t u = U32(p);
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = U32(p) | (static_cast<std::uint64_t>(U32(p + 4)) << 32);
    double d;
    std::memcpy(&d, &u, 8);
    return d;
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(U16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(U32(p)) / 2147483648.0;
  }
}

}  // namespace

AudioBuffer ReadWav(const std::string& path, WavInfo* info) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIoError, "cannot open " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  Require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          ErrorCode::kFormatError, path + ": not a RIFF/WAVE file");
  int format = 0, channels = 0, rate = 0, bits = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  WavInfo local;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = U32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      Require(avail >= 16, ErrorCode::kFormatError, path + ": short fmt chunk");
      format = U16(chunk + 8);
      channels = U16(chunk + 10);
      rate = static_cast<int>(U32(chunk + 12));
      bits = U16(chunk + 22);
      if (format == kExtensible) {
        Require(avail >= 26, ErrorCode::kFormatError, path + ": short extensible fmt");
        format = U16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = avail;
    } else if (std::memcmp(chunk, "LIST", 4) == 0 && avail >= 4 &&
               std::memcmp(chunk + 8, "INFO", 4) == 0) {
      std::size_t sub = body + 4;
      while (sub + 8 <= body + avail) {
        const std::size_t len = U32(bytes.data() + sub + 4);
        if (std::memcmp(bytes.data() + sub, "ICMT", 4) == 0 && sub + 8 + len <= bytes.size()) {
          local.comment.assign(reinterpret_cast<const char*>(bytes.data() + sub + 8), len);
          while (!local.comment.empty() && local.comment.back() == '\0') local.comment.pop_back();
        }
        sub += 8 + len + (len & 1);
      }
    }
    pos = body + size + (size & 1);
  }
  Require(format != 0 && data != nullptr, ErrorCode::kFormatError,
          path + ": missing fmt or data chunk");
  const bool pcm_ok = format == kPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFloat && (bits == 32 || bits == 64);
  Require(pcm_ok || float_ok, ErrorCode::kFormatError,
          path + ": unsupported sample format " + std::to_string(format) + "/" +
              std::to_string(bits));
  Require(channels > 0 && rate > 0, ErrorCode::kFormatError, path + ": invalid fmt fields");
  const std::size_t frame = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = data_size / frame;
  AudioBuffer out(channels, frames, rate);
  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      out.channels[c][i] = Sample(data + i * frame + c * (bits / 8), format, bits);
    }
  }
  local.format_tag = format;
  local.bits = bits;
  if (info != nullptr) *info = local;
  return out;
}

void WriteWav(const std::string& path, const AudioBuffer& audio, const std::string& comment) {
  const std::size_t channels = audio.num_channels();
  const std::size_t frames = audio.num_samples();
  Require(channels > 0 && channels < 65536, ErrorCode::kInvalidArgument,
          "WAV needs between 1 and 65535 channels");
  for (const auto& ch : audio.channels) {
    Require(ch.size() == frames, ErrorCode::kShapeError, "ragged audio buffer");
  }
  std::vector<std::uint8_t> out;
  const std::size_t data_bytes = channels * frames * 4;
  std::vector<std::uint8_t> list;
  if (!comment.empty()) {
    const std::size_t len = comment.size() + 1;
    PutTag(list, "INFO");
    PutTag(list, "ICMT");
    Put32(list, static_cast<std::uint32_t>(len));
    list.insert(list.end(), comment.begin(), comment.end());
    list.push_back(0);
    if (len & 1) list.push_back(0);
  }
  PutTag(out, "RIFF");
  Put32(out, static_cast<std::uint32_t>(4 + 24 + (list.empty() ? 0 : 8 + list.size()) + 8 +
                                        data_bytes));
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  Put32(out, 16);
  Put16(out, kFloat);
  Put16(out, static_cast<std::uint16_t>(channels));
  Put32(out, static_cast<std::uint32_t>(audio.sample_rate));
  Put32(out, static_cast<std::uint32_t>(audio.sample_rate * channels * 4));
  Put16(out, static_cast<std::uint16_t>(channels * 4));
  Put16(out, 32);
  if (!list.empty()) {
    PutTag(out, "LIST");
    Put32(out, static_cast<std::uint32_t>(list.size()));
    out.insert(out.end(), list.begin(), list.end());
  }
  PutTag(out, "data");
  Put32(out, static_cast<std::uint32_t>(data_bytes));
  out.reserve(out.size() + data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const float f = static_cast<float>(audio.channels[c][i]);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      Put32(out, u);
    }
  }
  std::ofstream file(path, std::ios::binary);
  Require(file.good(), ErrorCode::kIoError, "cannot write " + path);
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  Require(file.good(), ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace ambix
