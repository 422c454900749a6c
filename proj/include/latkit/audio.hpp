// Copyright 2026 The latkit Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "latkit/temporal.hpp"

namespace latkit {

/// Mono signed 16-bit PCM.
struct AudioBuffer {
  std::vector<std::int16_t> samples;
  std::uint32_t sample_rate = 16000;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
  /// Rounded to the nearest millisecond.
  TimePoint duration() const;

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;
};

/// Tool-call windows may overshoot the end of the audio by this much.
inline constexpr double kCropEndSlackSeconds = 0.050;

/// Sample index for a time in seconds: floor(seconds * rate), tolerant of
/// binary rounding just below an exact sample boundary.
std::size_t sample_index(double seconds, std::uint32_t sample_rate);

/// RIFF/WAVE PCM (8/16/24/32-bit integer, WAVE_FORMAT_EXTENSIBLE accepted).
/// Multichannel input is averaged to mono.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);
AudioBuffer load_wav(const std::filesystem::path& path);

/// Canonical 44-byte-header mono PCM-16 file.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio);
void save_wav(const std::filesystem::path& path, const AudioBuffer& audio);

/// Samples [floor(start*sr), min(floor(end*sr), n)). Throws AudioError
/// kArgument when start >= end or start < 0, kOutOfRange when the window starts
/// at or past the end or overshoots by more than kCropEndSlackSeconds.
AudioBuffer crop_audio(const AudioBuffer& audio, double start_sec, double end_sec);

/// Keeps every factor-th sample; factor in {1, 2, 4, 8} and must divide the rate.
AudioBuffer decimate(const AudioBuffer& audio, int factor);

}  // namespace latkit
