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

#include <optional>
#include <string>
#include <vector>

#include "latkit/orchestrator.hpp"

namespace latkit {

inline constexpr std::int64_t kChunkMillis = 60'000;

struct Chunk {
  std::size_t index = 0;
  TimePoint offset;
  AudioBuffer audio;
};

/// Non-overlapping 60 s chunks; the last one may be shorter. Throws
/// ContractError for empty audio or a rate that does not give whole-sample chunks.
std::vector<Chunk> chunk_audio(const AudioBuffer& audio);

struct ChunkFlag {
  std::size_t chunk = 0;
  std::string detail;
};

struct SwDacResult {
  std::vector<CaptionSegment> captions;
  std::vector<ChunkFlag> flags;
};

/// Per-chunk dense captioning with the baseline instruction prompt. Chunks go
/// through the backend concurrently when it allows that and `workers` > 1;
/// results are always ordered by chunk.
SwDacResult sw_dac(const AudioBuffer& audio, ModelBackend& backend, const std::string& audio_ref = {},
                   int workers = 1);

struct SwTagResult {
  std::optional<Interval> interval;
  std::optional<std::size_t> chunk;  // chunk that answered yes
  std::vector<ChunkFlag> flags;
};

/// Binary detection per chunk, in order; the first "yes" wins.
SwTagResult sw_tag(const AudioBuffer& audio, const std::string& query, ModelBackend& backend,
                   const std::string& audio_ref = {});

struct SwTacResult {
  std::string caption;
  std::vector<ChunkFlag> flags;
};

/// One backend call on the cropped target. Backend exceptions propagate.
SwTacResult sw_tac(const AudioBuffer& audio, const Interval& target, const std::string& prompt,
                   ModelBackend& backend, const std::string& audio_ref = {});

/// Reply grammar of the binary TAG prompt: "yes [MM:SS - MM:SS]" or "no"
/// (case-insensitive, optional trailing period). nullopt when neither matches.
struct BinaryReply {
  bool yes = false;
  Interval interval;
};
std::optional<BinaryReply> parse_binary_reply(std::string_view text);

}  // namespace latkit
