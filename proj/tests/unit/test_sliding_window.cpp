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

#include <atomic>
#include <functional>
#include <random>

#include "latkit/backends.hpp"
#include "latkit/errors.hpp"
#include "latkit/sliding_window.hpp"
#include "support.hpp"

using namespace latkit;

namespace {

/// Replies with fn(chunk index, request).
class ChunkBackend final : public ModelBackend {
 public:
  ChunkBackend(std::function<std::string(std::size_t, const BackendRequest&)> fn, bool concurrent = false)
      : fn_(std::move(fn)), concurrent_(concurrent) {}
  Turn generate(const BackendRequest& r) override {
    ++calls;
    return Turn{Answer{fn_(static_cast<std::size_t>(r.clip_offset.millis() / kChunkMillis), r)}};
  }
  bool supports_concurrent_sessions() const override { return concurrent_; }
  std::string id() const override { return "chunk"; }

  std::atomic<int> calls{0};

 private:
  std::function<std::string(std::size_t, const BackendRequest&)> fn_;
  bool concurrent_;
};

AudioBuffer silence_ms(std::int64_t ms, std::uint32_t rate = 1000) {
  AudioBuffer a;
  a.sample_rate = rate;
  a.samples.assign(static_cast<std::size_t>(ms * rate / 1000), 0);
  return a;
}

}  // namespace

TEST_CASE("chunk_audio") {
  CHECK(chunk_audio(silence_ms(30'000)).size() == 1);
  const auto long_one = chunk_audio(silence_ms(1'407'000));
  REQUIRE(long_one.size() == 24);
  CHECK(long_one.back().audio.duration().millis() == 27'000);
  CHECK(long_one.back().offset.millis() == 23 * 60'000);
  const auto two = chunk_audio(silence_ms(120'000, 16000));
  REQUIRE(two.size() == 2);
  CHECK(two[0].audio.size() == 960'000);
  CHECK(two[1].audio.size() == 960'000);
  CHECK_THROWS_AS(chunk_audio(AudioBuffer{}), ContractError);

  std::mt19937_64 rng(13);
  const auto a = testsupport::random_audio(rng, 8000 * 200 + 17, 8000);
  std::vector<std::int16_t> joined;
  for (const auto& c : chunk_audio(a)) joined.insert(joined.end(), c.audio.samples.begin(), c.audio.samples.end());
  CHECK(joined == a.samples);
}

TEST_CASE("sw_dac remaps, clips and flags") {
  ChunkBackend b([](std::size_t k, const BackendRequest&) -> std::string {
    if (k == 3) return "[00:10 - 00:20]: bell";
    if (k == 1) return "[00:50 - 01:10]: long hum";   // overruns the chunk
    if (k == 2) return "no idea";                     // unparseable
    if (k == 4) return "[01:05 - 01:09]: ghost";      // starts past the chunk end
    return "[]";
  });
  const auto r = sw_dac(silence_ms(300'000), b);
  REQUIRE(r.captions.size() == 2);
  CHECK(format_interval(r.captions[0].interval) == "[01:50 - 02:00]");
  CHECK(format_interval(r.captions[1].interval) == "[03:10 - 03:20]");
  CHECK(r.captions[1].caption == "bell");
  CHECK(r.flags.size() == 3);
  CHECK(b.calls.load() == 5);
}

TEST_CASE("sw_dac single chunk keeps offsets") {
  ChunkBackend b([](std::size_t, const BackendRequest&) { return std::string("[00:05 - 00:07]: x"); });
  const auto r = sw_dac(silence_ms(40'000), b);
  REQUIRE(r.captions.size() == 1);
  CHECK(r.captions[0].interval == make_interval(5'000, 7'000));
}

TEST_CASE("sw_dac concurrent order matches sequential") {
  auto fn = [](std::size_t k, const BackendRequest&) {
    return "[00:0" + std::to_string(k % 10) + " - 00:30]: chunk " + std::to_string(k);
  };
  ChunkBackend seq(fn), par(fn, true);
  const auto a = sw_dac(silence_ms(900'000), seq, "", 1);
  const auto b = sw_dac(silence_ms(900'000), par, "", 4);
  CHECK(a.captions == b.captions);
  CHECK(a.captions.size() == 15);
}

TEST_CASE("chunk-local remap is exact") {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t total = 60'000 * (1 + static_cast<std::int64_t>(rng() % 10)) + static_cast<std::int64_t>(rng() % 59) * 1000 + 1000;
    const std::size_t n_chunks = static_cast<std::size_t>((total + 59'999) / 60'000);
    const std::size_t target = rng() % n_chunks;
    const std::int64_t chunk_len = std::min<std::int64_t>(60'000, total - static_cast<std::int64_t>(target) * 60'000);
    const auto local = testsupport::random_interval(rng, chunk_len - 1000, 1000);
    ChunkBackend b([&](std::size_t k, const BackendRequest&) {
      return k == target ? "[" + format_timestamp(local.start) + " - " + format_timestamp(local.end) + "]: e"
                         : std::string("[]");
    });
    const auto r = sw_dac(silence_ms(total), b);
    REQUIRE(r.captions.size() == 1);
    const std::int64_t off = static_cast<std::int64_t>(target) * 60'000;
    CHECK(std::llabs(r.captions[0].interval.start.millis() - (local.start.millis() + off)) <= 1);
    CHECK(std::llabs(r.captions[0].interval.end.millis() - (local.end.millis() + off)) <= 1);
    CHECK(r.captions[0].interval.end.millis() <= total);
  }
}

TEST_CASE("sw_tag") {
  SUBCASE("yes in chunk 0") {
    ChunkBackend b([](std::size_t k, const BackendRequest&) {
      return k == 0 ? std::string("yes [00:05 - 00:15]") : std::string("no");
    });
    const auto r = sw_tag(silence_ms(180'000), "a bell", b);
    REQUIRE(r.interval.has_value());
    CHECK(*r.interval == make_interval(5'000, 15'000));
    CHECK(b.calls.load() == 1);
  }
  SUBCASE("first yes in chunk 7") {
    ChunkBackend b([](std::size_t k, const BackendRequest&) {
      return k >= 7 ? std::string("Yes [00:30 - 00:45].") : std::string("No.");
    });
    const auto r = sw_tag(silence_ms(600'000), "a bell", b);
    REQUIRE(r.interval.has_value());
    CHECK(format_interval(*r.interval) == "[07:30 - 07:45]");
    CHECK(r.chunk == 7u);
    CHECK(b.calls.load() == 8);
  }
  SUBCASE("all no") {
    ChunkBackend b([](std::size_t, const BackendRequest&) { return std::string("no"); });
    const auto r = sw_tag(silence_ms(180'000), "a bell", b);
    CHECK_FALSE(r.interval.has_value());
    CHECK(r.flags.empty());
  }
  SUBCASE("invalid replies count as no and are flagged") {
    ChunkBackend b([](std::size_t k, const BackendRequest&) {
      return k == 0 ? std::string("maybe") : std::string("yes [00:01 - 00:02]");
    });
    const auto r = sw_tag(silence_ms(180'000), "a bell", b);
    CHECK(r.flags.size() == 1);
    CHECK(r.chunk == 1u);
  }
  SUBCASE("prompt carries the query") {
    std::string seen;
    ChunkBackend b([&](std::size_t, const BackendRequest& r) {
      seen = r.prompt;
      return std::string("no");
    });
    sw_tag(silence_ms(10'000), "a distant siren", b);
    CHECK(seen.find("a distant siren") != std::string::npos);
  }
}

TEST_CASE("sw_tag prepend changes the answer to the new chunk") {
  // baseline: only chunk 2 is positive
  const auto positive = [](std::size_t k, std::size_t first) {
    return k == first ? std::string("yes [00:10 - 00:20]") : std::string("no");
  };
  ChunkBackend before([&](std::size_t k, const BackendRequest&) { return positive(k, 2); });
  const auto r0 = sw_tag(silence_ms(300'000), "q", before);
  REQUIRE(r0.interval.has_value());
  CHECK(format_interval(*r0.interval) == "[02:10 - 02:20]");
  // prepend a positive chunk: every old chunk shifts by one, the new first one answers yes
  ChunkBackend after([&](std::size_t k, const BackendRequest&) {
    return k == 0 ? std::string("yes [00:40 - 00:50]") : positive(k, 3);
  });
  const auto r1 = sw_tag(silence_ms(360'000), "q", after);
  REQUIRE(r1.interval.has_value());
  CHECK(format_interval(*r1.interval) == "[00:40 - 00:50]");
  CHECK(r1.chunk == 0u);
}

TEST_CASE("sw_tac") {
  const auto inst = testsupport::appendix_instance(TaskKind::kTac);
  OracleBackend oracle(inst);
  AudioBuffer audio = silence_ms(inst.duration.millis());
  const auto r = sw_tac(audio, *inst.target_interval, "prompt", oracle);
  CHECK(r.caption == inst.tac());
  CHECK(r.flags.empty());

  std::size_t crop_size = 0;
  ChunkBackend empty([&](std::size_t, const BackendRequest& req) {
    crop_size = req.audio.size();
    return std::string("");
  });
  // spans the 01:00 and 02:00 chunk boundaries, still one crop
  const auto e = sw_tac(audio, make_interval(50'000, 130'000), "prompt", empty);
  CHECK(empty.calls.load() == 1);
  CHECK(crop_size == 80'000);
  CHECK(e.caption.empty());
  CHECK(e.flags.size() == 1);
  CHECK_THROWS_AS(sw_tac(audio, make_interval(200'000, 400'000), "p", empty), ContractError);
}

TEST_CASE("binary reply grammar") {
  CHECK(parse_binary_reply("no")->yes == false);
  CHECK(parse_binary_reply("NO.")->yes == false);
  const auto y = parse_binary_reply("Yes [01:02 - 01:05]");
  REQUIRE(y.has_value());
  CHECK(y->yes);
  CHECK(y->interval == make_interval(62'000, 65'000));
  CHECK_FALSE(parse_binary_reply("yes").has_value());
  CHECK_FALSE(parse_binary_reply("nope").has_value());
  // grammar only: an inverted window parses and is rejected by sw_tag
  const auto inv = parse_binary_reply("yes [01:05 - 01:02]");
  REQUIRE(inv.has_value());
  CHECK_FALSE(inv->interval.valid());
}

TEST_CASE("sw_tag treats an inverted yes as no") {
  ChunkBackend b([](std::size_t k, const BackendRequest&) {
    return k == 0 ? std::string("yes [00:20 - 00:10]") : std::string("yes [00:01 - 00:02]");
  });
  const auto r = sw_tag(silence_ms(180'000), "q", b);
  CHECK(r.chunk == 1u);
  CHECK(r.flags.size() == 1);
}
