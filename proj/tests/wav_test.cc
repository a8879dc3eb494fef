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

#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ambix/error.h"

namespace ambix {
namespace {

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ambix_wav_" + name)).string();
}

void WriteBytes(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

// Hand-assembled 16-bit PCM stereo file.
std::vector<std::uint8_t> Pcm16Stereo(const std::vector<std::int16_t>& samples) {
  std::vector<std::uint8_t> b;
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto put16 = [&](std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  tag("RIFF");
  put32(static_cast<std::uint32_t>(36 + samples.size() * 2));
  tag("WAVE");
  tag("fmt ");
  put32(16);
  put16(1);
  put16(2);
  put32(16000);
  put32(16000 * 4);
  put16(4);
  put16(16);
  tag("data");
  put32(static_cast<std::uint32_t>(samples.size() * 2));
  for (auto s : samples) put16(static_cast<std::uint16_t>(s));
  return b;
}

TEST(WavTest, ReadsPcm16) {
  const auto path = TempPath("pcm16.wav");
  WriteBytes(path, Pcm16Stereo({0, 16384, -32768, 32767, 100, -100}));
  WavInfo info;
  const auto a = ReadWav(path, &info);
  EXPECT_EQ(info.format_tag, 1);
  EXPECT_EQ(info.bits, 16);
  EXPECT_EQ(a.sample_rate, 16000);
  ASSERT_EQ(a.num_channels(), 2u);
  ASSERT_EQ(a.num_samples(), 3u);
  EXPECT_EQ(a.channels[0][0], 0.0);
  EXPECT_EQ(a.channels[1][0], 0.5);
  EXPECT_EQ(a.channels[0][1], -1.0);
  EXPECT_EQ(a.channels[1][1], 32767 / 32768.0);
  EXPECT_EQ(a.channels[1][2], -100 / 32768.0);
  std::filesystem::remove(path);
}

TEST(WavTest, FloatRoundTripWithComment) {
  AudioBuffer a(4, 257, 24000);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < 257; ++i) a.channels[c][i] = 0.001 * (c + 1) * (i % 17) - 0.005;
  }
  const auto path = TempPath("float.wav");
  WriteWav(path, a, "ambisonics ACN N3D order 1");
  WavInfo info;
  const auto b = ReadWav(path, &info);
  EXPECT_EQ(info.format_tag, 3);
  EXPECT_EQ(info.bits, 32);
  EXPECT_EQ(info.comment, "ambisonics ACN N3D order 1");
  EXPECT_EQ(b.sample_rate, 24000);
  ASSERT_EQ(b.num_channels(), 4u);
  ASSERT_EQ(b.num_samples(), 257u);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < 257; ++i) {
      EXPECT_EQ(b.channels[c][i], static_cast<double>(static_cast<float>(a.channels[c][i])));
    }
  }
  std::filesystem::remove(path);
}

TEST(WavTest, RejectsGarbageAndMissingFiles) {
  const auto path = TempPath("garbage.wav");
  WriteBytes(path, {'R', 'I', 'F', 'F', 0, 0});
  try {
    ReadWav(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
  }
  std::filesystem::remove(path);
  try {
    ReadWav(TempPath("missing.wav"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

}  // namespace
}  // namespace ambix
