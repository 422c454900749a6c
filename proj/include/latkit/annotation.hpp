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
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "latkit/temporal.hpp"

namespace latkit {

struct SpeechSegment {
  Interval interval;
  std::string speaker_attr;
  std::string content;  // optional in documents; empty when absent
  std::string transcription;

  friend bool operator==(const SpeechSegment&, const SpeechSegment&) = default;
};

struct TrackEvent {
  Interval interval;
  std::string description;

  friend bool operator==(const TrackEvent&, const TrackEvent&) = default;
};

enum class Track { kSpeech, kEvents, kMusic, kBackground };

const char* to_string(Track t) noexcept;

/// Four-track atomic annotation of one audio file.
struct AnnotationSet {
  std::string summary;
  TimePoint duration;
  std::vector<SpeechSegment> speech;
  std::vector<TrackEvent> events;
  std::vector<TrackEvent> music;
  std::vector<TrackEvent> background;
  std::string language;  // optional; not part of the four-track schema

  const std::vector<TrackEvent>& non_speech(Track t) const;
  std::vector<TrackEvent>& non_speech(Track t);

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

struct ValidationViolation {
  enum class Kind { kOutOfRange, kInvertedInterval, kEmptyField, kUnsortedTrack };

  Kind kind;
  Track track;
  std::size_t index;
  std::string detail;
};

const char* to_string(ValidationViolation::Kind k) noexcept;
/// "events[0]"-style locator.
std::string location(const ValidationViolation& v);

AnnotationSet parse_annotation(std::string_view document);
std::string serialize_annotation(const AnnotationSet& a);

/// Every violated invariant; empty iff the set is valid.
std::vector<ValidationViolation> validate_annotation(const AnnotationSet& a);

/// Shifts each chunk by its offset and concatenates tracks. Same-text entries
/// from neighbouring chunks that meet within `coalesce_tolerance_ms` of each
/// other are fused into one entry.
AnnotationSet merge_chunks(const std::vector<std::pair<TimePoint, AnnotationSet>>& chunks,
                           std::int64_t coalesce_tolerance_ms = 500);

enum class TaskKind { kDac, kTag, kTac };

const char* to_string(TaskKind k) noexcept;
TaskKind parse_task_kind(std::string_view s);

struct CaptionSegment {
  Interval interval;
  std::string caption;

  friend bool operator==(const CaptionSegment&, const CaptionSegment&) = default;
};

using DacGroundTruth = std::vector<CaptionSegment>;
using TagGroundTruth = Interval;
using TacGroundTruth = std::string;

struct TaskInstance {
  std::string id;
  TaskKind task_kind = TaskKind::kTag;
  std::string audio_ref;
  TimePoint duration;
  std::string language;
  std::string query;                      // TAG only
  std::optional<Interval> target_interval;  // TAC only
  std::variant<DacGroundTruth, TagGroundTruth, TacGroundTruth> ground_truth;

  const DacGroundTruth& dac() const { return std::get<DacGroundTruth>(ground_truth); }
  const TagGroundTruth& tag() const { return std::get<TagGroundTruth>(ground_truth); }
  const TacGroundTruth& tac() const { return std::get<TacGroundTruth>(ground_truth); }
};

/// Loads a benchmark split: `{"instances": [...]}` or a bare array.
std::vector<TaskInstance> parse_task_instances(std::string_view document);
std::string serialize_task_instances(const std::vector<TaskInstance>& instances);

}  // namespace latkit
