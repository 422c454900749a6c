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

#include <doctest.h>

#include <random>

#include "latkit/audio.hpp"
#include "latkit/errors.hpp"
#include "support.hpp"

using namespace latkit;
using testsupport::make_wav;

namespace {

AudioError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const AudioError& e) {
    return e.kind();
  }
  FAIL("expected an AudioError");
  return AudioError::Kind::kIo;
}

AudioBuffer ramp(std::size_t n, std::uint32_t rate) {
  AudioBuffer a;
  a.sample_rate = rate;
  for (std::size_t i = 0; i < n; ++i) a.samples.push_back(static_cast<std::int16_t>(i % 65536 - 32768));
  return a;
}

}  // namespace

TEST_CASE("decode 16-bit mono") {
  std::vector<std::int32_t> pcm(960'000);
  for (std::size_t i = 0; i < pcm.size(); ++i) pcm[i] = static_cast<std::int16_t>(i * 7);
  const auto a = decode_wav(make_wav(pcm, 1, 16000, 16));
  CHECK(a.size() == 960'000);
  CHECK(a.sample_rate == 16000);
  CHECK(a.duration().millis() == 60'000);
  CHECK(a.samples[5] == static_cast<std::int16_t>(35));
}

TEST_CASE("decode other widths and downmix") {
  std::mt19937_64 rng(2);
  for (int bits : {8, 24, 32}) {
    const std::int64_t lo = -(std::int64_t{1} << (bits - 1)), hi = (std::int64_t{1} << (bits - 1)) - 1;
    std::uniform_int_distribution<std::int64_t> d(lo, hi);
    std::vector<std::int32_t> pcm(999);
    for (auto& v : pcm) v = static_cast<std::int32_t>(d(rng));
    pcm[0] = static_cast<std::int32_t>(lo);
    pcm[1] = static_cast<std::int32_t>(hi);
    const auto a = decode_wav(make_wav(pcm, 1, 8000, bits));
    REQUIRE(a.size() == pcm.size());
    for (std::size_t i = 0; i < pcm.size(); ++i) {
      const std::int64_t want = bits == 8 ? std::int64_t{pcm[i]} * 256 : std::int64_t{pcm[i]} >> (bits - 16);
      CHECK(a.samples[i] == want);
    }
  }
  // stereo: per-frame average, floor
  const auto st = decode_wav(make_wav({100, 201, -5, -6, 32767, 32767}, 2, 16000, 16));
  CHECK(st.samples == std::vector<std::int16_t>{150, -6, 32767});
}

TEST_CASE("decode errors") {
  CHECK(kind_of([] { decode_wav(make_wav({1, 2, 3}, 1, 16000, 16, 3)); }) == AudioError::Kind::kUnsupportedFormat);
  CHECK(kind_of([] { decode_wav(make_wav({1, 2, 3}, 1, 16000, 16, 1, 600)); }) == AudioError::Kind::kCorruptFile);
  CHECK(kind_of([] {
          const std::vector<std::uint8_t> junk = {'n', 'o', 'p', 'e'};
          decode_wav(junk);
        }) == AudioError::Kind::kUnsupportedFormat);
  CHECK(kind_of([] { load_wav("/nonexistent/latkit.wav"); }) == AudioError::Kind::kIo);
}

TEST_CASE("encode, save and load round trip") {
  std::mt19937_64 rng(4);
  const auto a = testsupport::random_audio(rng, 12345, 22050);
  CHECK(decode_wav(encode_wav(a)) == a);
  CHECK(encode_wav(a).size() == 44 + 2 * 12345);
  testsupport::TempDir dir;
  save_wav(dir / "x.wav", a);
  CHECK(load_wav(dir / "x.wav") == a);
}

TEST_CASE("crop examples") {
  const auto a = ramp(16000 * 240, 16000);
  CHECK(crop_audio(a, 0, a.duration_seconds()) == a);
  CHECK(crop_audio(a, 109.0, 130.0).size() == 336'000);

  const auto tag = ramp(16000 * 531, 16000);
  const auto c = crop_audio(tag, 471.0, 491.0);
  CHECK(c.size() == 320'000);
  CHECK(c.duration().millis() == 20'000);
  CHECK(c.samples.front() == tag.samples[471 * 16000]);

  // slack past the end is tolerated and clipped
  CHECK(crop_audio(a, 230.0, 240.04).size() == 160'000);
  CHECK(kind_of([&] { crop_audio(a, 230.0, 240.2); }) == AudioError::Kind::kOutOfRange);
  CHECK(kind_of([&] { crop_audio(a, 240.0, 250.0); }) == AudioError::Kind::kOutOfRange);
  CHECK(kind_of([&] { crop_audio(a, 20.0, 10.0); }) == AudioError::Kind::kArgument);
  CHECK(kind_of([&] { crop_audio(a, -1.0, 10.0); }) == AudioError::Kind::kArgument);
}

TEST_CASE("crop sample counts are floor differences") {
  std::mt19937_64 rng(6);
  const auto a = ramp(44100 * 30, 44100);
  std::uniform_real_distribution<double> d(0.0, 30.0);
  for (int i = 0; i < 2000; ++i) {
    double s = d(rng), e = d(rng);
    if (s > e) std::swap(s, e);
    if (s == e) continue;
    const auto c = crop_audio(a, s, e);
    CHECK(c.size() == sample_index(e, 44100) - sample_index(s, 44100));
  }
  CHECK(sample_index(0.1, 16000) == 1600);
  CHECK(sample_index(109.0, 16000) == 1'744'000);
}

TEST_CASE("decimate") {
  const auto a = ramp(960'000, 16000);
  CHECK(decimate(a, 1) == a);
  const auto h = decimate(a, 2);
  CHECK(h.size() == 480'000);
  CHECK(h.sample_rate == 8000);
  CHECK(h.samples[3] == a.samples[6]);
  CHECK(decimate(a, 8).size() == 120'000);
  CHECK(kind_of([&] { decimate(a, 3); }) == AudioError::Kind::kArgument);
  CHECK(kind_of([&] { decimate(ramp(10, 44101), 2); }) == AudioError::Kind::kArgument);

  std::mt19937_64 rng(8);
  for (int f : {2, 4, 8}) {
    for (int i = 0; i < 50; ++i) {
      const auto x = testsupport::random_audio(rng, 1 + rng() % 5000, 16000);
      const auto y = decimate(x, f);
      CHECK(std::abs(y.duration_seconds() - x.duration_seconds()) <= static_cast<double>(f) / 16000.0);
    }
  }
}
