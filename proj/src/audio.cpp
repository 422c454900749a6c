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

#include "latkit/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "latkit/errors.hpp"
#include "latkit/kernels.hpp"

namespace latkit {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

[[noreturn]] void corrupt(const std::string& what) {
  throw AudioError(AudioError::Kind::kCorruptFile, "corrupt WAV: " + what);
}

std::int16_t to_int16(const std::uint8_t* p, int bytes) {
  switch (bytes) {
    case 1:
      return static_cast<std::int16_t>((static_cast<int>(p[0]) - 128) << 8);
    case 2:
      return static_cast<std::int16_t>(read_u16(p));
    case 3:
      return static_cast<std::int16_t>(read_u16(p + 1));
    case 4:
      return static_cast<std::int16_t>(read_u16(p + 2));
  }
  return 0;
}

}  // namespace

TimePoint AudioBuffer::duration() const {
  const std::uint64_t n = samples.size();
  return TimePoint::from_millis(static_cast<std::int64_t>((n * 1000 + sample_rate / 2) / sample_rate));
}

std::size_t sample_index(double seconds, std::uint32_t sample_rate) {
  const double pos = seconds * static_cast<double>(sample_rate);
  return static_cast<std::size_t>(std::floor(pos + 1e-6));
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw AudioError(AudioError::Kind::kUnsupportedFormat, "not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    const bool is_fmt = std::memcmp(hdr, "fmt ", 4) == 0;
    const bool is_data = std::memcmp(hdr, "data", 4) == 0;
    if (static_cast<std::uint64_t>(body) + size > bytes.size()) {
      corrupt(std::string(is_data ? "data" : "chunk") + " chunk shorter than its declared size");
    }
    if (is_fmt) {
      if (size < 16) corrupt("fmt chunk too small");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) corrupt("extensible fmt chunk too small");
        format = read_u16(bytes.data() + body + 24);  // sub-format GUID leads with the tag
      }
      have_fmt = true;
    } else if (is_data) {
      if (!have_fmt) corrupt("data chunk before fmt chunk");
      if (format != kFormatPcm) {
        throw AudioError(AudioError::Kind::kUnsupportedFormat,
                         "unsupported WAV encoding (format tag " + std::to_string(format) + "), PCM required");
      }
      if (channels == 0 || rate == 0) corrupt("zero channels or sample rate");
      if (bits != 8 && bits != 16 && bits != 24 && bits != 32) {
        throw AudioError(AudioError::Kind::kUnsupportedFormat, "unsupported PCM width " + std::to_string(bits));
      }
      const int width = bits / 8;
      const std::size_t frame_bytes = static_cast<std::size_t>(width) * channels;
      const std::size_t frames = size / frame_bytes;
      std::vector<std::int16_t> interleaved(frames * channels);
      const std::uint8_t* src = bytes.data() + body;
      for (std::size_t i = 0; i < interleaved.size(); ++i) interleaved[i] = to_int16(src + i * width, width);
      AudioBuffer out;
      out.sample_rate = rate;
      out.samples.resize(frames);
      kernels::downmix(interleaved, channels, out.samples);
      return out;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) corrupt("missing fmt chunk");
  corrupt("missing data chunk");
}

AudioBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AudioError(AudioError::Kind::kIo, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const AudioError& e) {
    throw AudioError(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, audio.sample_rate);
  put_u32(out, audio.sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (std::int16_t s : audio.samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

void save_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  const auto bytes = encode_wav(audio);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AudioError(AudioError::Kind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw AudioError(AudioError::Kind::kIo, "write failed for " + path.string());
}

AudioBuffer crop_audio(const AudioBuffer& audio, double start_sec, double end_sec) {
  if (!std::isfinite(start_sec) || !std::isfinite(end_sec) || start_sec < 0.0) {
    throw AudioError(AudioError::Kind::kArgument, "crop_audio: start_sec must be finite and >= 0");
  }
  if (start_sec >= end_sec) {
    throw AudioError(AudioError::Kind::kArgument, "crop_audio: start_sec must be less than end_sec");
  }
  const double total = audio.duration_seconds();
  const std::size_t n = audio.samples.size();
  const std::size_t first = sample_index(start_sec, audio.sample_rate);
  if (first >= n) {
    throw AudioError(AudioError::Kind::kOutOfRange, "crop_audio: window starts at " + std::to_string(start_sec) +
                                                        " s, past the audio end at " + std::to_string(total) + " s");
  }
  if (end_sec > total + kCropEndSlackSeconds) {
    throw AudioError(AudioError::Kind::kOutOfRange, "crop_audio: window ends at " + std::to_string(end_sec) +
                                                        " s, past the audio end at " + std::to_string(total) + " s");
  }
  const std::size_t last = std::min(sample_index(end_sec, audio.sample_rate), n);
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(first),
                     audio.samples.begin() + static_cast<std::ptrdiff_t>(std::max(first, last)));
  return out;
}

AudioBuffer decimate(const AudioBuffer& audio, int factor) {
  if (factor != 1 && factor != 2 && factor != 4 && factor != 8) {
    throw AudioError(AudioError::Kind::kArgument, "decimate: factor must be 1, 2, 4 or 8");
  }
  if (audio.sample_rate % static_cast<std::uint32_t>(factor) != 0) {
    throw AudioError(AudioError::Kind::kArgument, "decimate: factor " + std::to_string(factor) +
                                                      " does not divide sample rate " +
                                                      std::to_string(audio.sample_rate));
  }
  if (factor == 1) return audio;
  AudioBuffer out;
  out.sample_rate = audio.sample_rate / static_cast<std::uint32_t>(factor);
  out.samples.reserve((audio.samples.size() + factor - 1) / factor);
  for (std::size_t i = 0; i < audio.samples.size(); i += static_cast<std::size_t>(factor)) {
    out.samples.push_back(audio.samples[i]);
  }
  return out;
}

}  // namespace latkit
