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

#include "latkit/sliding_window.hpp"

#include <algorithm>
#include <cctype>
#include <future>

#include "latkit/errors.hpp"
#include "latkit/prompts.hpp"

namespace latkit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string answer_text(const Turn& t) {
  if (const auto* a = t.get<Answer>()) return a->text;
  return {};
}

Turn ask_chunk(ModelBackend& backend, TaskKind kind, const std::string& prompt, const Chunk& c,
               const std::string& audio_ref, TimePoint source_duration) {
  Trajectory history;
  history.prompt = prompt;
  BackendRequest req{kind, Phase::kBaseline, prompt, history, c.audio, audio_ref, 1, c.offset, source_duration};
  return backend.generate(req);
}

// Clips a chunk-local interval to the chunk. nullopt when it starts past the end.
std::optional<Interval> clip_local(Interval iv, std::int64_t len, std::size_t chunk, std::vector<ChunkFlag>& flags) {
  if (iv.start.millis() >= len && len > 0) {
    flags.push_back({chunk, "interval " + format_interval(iv) + " starts beyond the chunk; dropped"});
    return std::nullopt;
  }
  if (iv.end.millis() > len) {
    flags.push_back({chunk, "interval " + format_interval(iv) + " clipped to the chunk"});
    iv.end = TimePoint::from_millis(len);
  }
  return iv;
}

Interval shift(Interval iv, TimePoint by) {
  return make_interval(iv.start.millis() + by.millis(), iv.end.millis() + by.millis());
}

std::string replace_all(std::string s, std::string_view key, std::string_view value) {
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
  return s;
}

}  // namespace

std::vector<Chunk> chunk_audio(const AudioBuffer& audio) {
  if (audio.samples.empty()) throw ContractError("chunk_audio: audio is empty");
  const std::size_t per_chunk = static_cast<std::size_t>(audio.sample_rate) * (kChunkMillis / 1000);
  std::vector<Chunk> out;
  for (std::size_t begin = 0, k = 0; begin < audio.samples.size(); begin += per_chunk, ++k) {
    const std::size_t end = std::min(audio.samples.size(), begin + per_chunk);
    Chunk c;
    c.index = k;
    c.offset = TimePoint::from_millis(static_cast<std::int64_t>(k) * kChunkMillis);
    c.audio.sample_rate = audio.sample_rate;
    c.audio.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                           audio.samples.begin() + static_cast<std::ptrdiff_t>(end));
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<BinaryReply> parse_binary_reply(std::string_view text) {
  std::string_view t = trim(text);
  if (!t.empty() && t.back() == '.') t = trim(t.substr(0, t.size() - 1));
  auto starts_with_ci = [&](std::string_view word) {
    if (t.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(t[i])) != word[i]) return false;
    }
    return true;
  };
  if (starts_with_ci("no") && t.size() == 2) return BinaryReply{false, {}};
  if (starts_with_ci("yes")) {
    if (auto iv = try_parse_interval(trim(t.substr(3)))) return BinaryReply{true, *iv};
  }
  return std::nullopt;
}

SwDacResult sw_dac(const AudioBuffer& audio, ModelBackend& backend, const std::string& audio_ref, int workers) {
  const auto chunks = chunk_audio(audio);
  const std::string prompt(prompts::dac_baseline());
  const TimePoint total = audio.duration();
  std::vector<std::string> replies(chunks.size());

  auto run = [&](std::size_t i) {
    replies[i] = answer_text(ask_chunk(backend, TaskKind::kDac, prompt, chunks[i], audio_ref, total));
  };
  if (workers > 1 && backend.supports_concurrent_sessions()) {
    // Fixed-size waves keep at most `workers` calls in flight.
    for (std::size_t base = 0; base < chunks.size(); base += static_cast<std::size_t>(workers)) {
      std::vector<std::future<void>> wave;
      const std::size_t stop = std::min(chunks.size(), base + static_cast<std::size_t>(workers));
      for (std::size_t i = base; i < stop; ++i) wave.push_back(std::async(std::launch::async, run, i));
      for (auto& f : wave) f.get();
    }
  } else {
    for (std::size_t i = 0; i < chunks.size(); ++i) run(i);
  }

  SwDacResult out;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (trim(replies[i]) == "[]") continue;
    const auto parsed = parse_dac_answer(replies[i]);
    if (!parsed) {
      out.flags.push_back({i, "unparseable chunk output; contributes nothing"});
      continue;
    }
    const std::int64_t len = chunks[i].audio.duration().millis();
    for (const auto& c : *parsed) {
      if (auto iv = clip_local(c.interval, len, i, out.flags)) {
        out.captions.push_back({shift(*iv, chunks[i].offset), c.caption});
      }
    }
  }
  return out;
}

SwTagResult sw_tag(const AudioBuffer& audio, const std::string& query, ModelBackend& backend,
                   const std::string& audio_ref) {
  const auto chunks = chunk_audio(audio);
  const std::string prompt = replace_all(std::string(prompts::tag_binary()), "{query}", query);
  const TimePoint total = audio.duration();
  SwTagResult out;
  for (const auto& c : chunks) {
    const std::string reply = answer_text(ask_chunk(backend, TaskKind::kTag, prompt, c, audio_ref, total));
    const auto parsed = parse_binary_reply(reply);
    if (!parsed) {
      out.flags.push_back({c.index, "reply matches neither 'yes [MM:SS - MM:SS]' nor 'no'; treated as no"});
      continue;
    }
    if (!parsed->yes) continue;
    if (!parsed->interval.valid()) {
      out.flags.push_back({c.index, "inverted interval in yes reply; treated as no"});
      continue;
    }
    const auto local = clip_local(parsed->interval, c.audio.duration().millis(), c.index, out.flags);
    if (!local) continue;
    out.interval = shift(*local, c.offset);
    out.chunk = c.index;
    return out;
  }
  return out;
}

SwTacResult sw_tac(const AudioBuffer& audio, const Interval& target, const std::string& prompt,
                   ModelBackend& backend, const std::string& audio_ref) {
  if (!target.valid() || target.end.millis() > audio.duration().millis()) {
    throw ContractError("sw_tac: target interval must lie within the audio");
  }
  Chunk clip;
  clip.offset = target.start;
  clip.audio = crop_audio(audio, target.start.seconds(), target.end.seconds());
  SwTacResult out;
  out.caption = answer_text(ask_chunk(backend, TaskKind::kTac, prompt, clip, audio_ref, audio.duration()));
  if (trim(out.caption).empty()) out.flags.push_back({0, "empty caption"});
  return out;
}

}  // namespace latkit
