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

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "latkit/annotation.hpp"
#include "latkit/temporal.hpp"

namespace latkit {

inline constexpr std::string_view kCropAudioTool = "crop_audio";
inline constexpr int kDefaultMaxSteps = 4;

struct TimelineSegment {
  Interval interval;
  std::string description;

  friend bool operator==(const TimelineSegment&, const TimelineSegment&) = default;
};

/// Coarse ordered segmentation of the whole audio with one description per span.
struct GlobalTimeline {
  std::vector<TimelineSegment> segments;

  friend bool operator==(const GlobalTimeline&, const GlobalTimeline&) = default;
};

struct Think {
  std::string text;
  friend bool operator==(const Think&, const Think&) = default;
};

struct ToolCall {
  std::string name{kCropAudioTool};
  double start_sec = 0.0;
  double end_sec = 0.0;
  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct ToolResponse {
  std::string content;
  friend bool operator==(const ToolResponse&, const ToolResponse&) = default;
};

struct Answer {
  std::string text;
  friend bool operator==(const Answer&, const Answer&) = default;
};

enum class TurnKind { kThink, kToolCall, kToolResponse, kAnswer, kTimelineDecl };

const char* to_string(TurnKind k) noexcept;

struct Turn {
  std::variant<Think, ToolCall, ToolResponse, Answer, GlobalTimeline> payload;
  /// Shares the assistant message of the previous turn when serialized.
  bool continues_message = false;

  TurnKind kind() const noexcept { return static_cast<TurnKind>(payload.index()); }
  template <typename T>
  const T* get() const noexcept {
    return std::get_if<T>(&payload);
  }

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Trajectory {
  std::string id;                      // optional; instance id for rollouts
  std::optional<TaskKind> task_kind;   // optional; inferred from the prompt when absent
  std::string prompt;                  // user message
  std::vector<Turn> turns;

  /// Number of ToolCall turns.
  std::size_t step_count() const noexcept;
  const GlobalTimeline* timeline() const noexcept;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Parses a `{"messages": [...]}` document (roles user / assistant /
/// tool_response). Assistant content is split into <global_timeline> and
/// <think> blocks; remaining text becomes Answer turns.
Trajectory parse_trajectory(std::string_view document);
Trajectory trajectory_from_json(const nlohmann::ordered_json& document);

nlohmann::ordered_json trajectory_to_json(const Trajectory& t);
/// Pretty-printed document; parse_trajectory(serialize_trajectory(t)) == t.
std::string serialize_trajectory(const Trajectory& t);

/// Splits one assistant content string into turns.
std::vector<Turn> parse_assistant_content(std::string_view content);

/// Lines of the form "[MM:SS - MM:SS] description".
GlobalTimeline parse_timeline_block(std::string_view body);

/// Best-effort task inference from the user prompt wording.
std::optional<TaskKind> infer_task_kind(std::string_view prompt);

struct FormatViolation {
  enum class Kind {
    kNoTurns,
    kToolCallWithoutThink,
    kToolCallWithoutResponse,
    kOrphanToolResponse,
    kTrailingToolResponse,
    kStepBudgetExceeded,
    kInvalidCropWindow,
    kCropOutOfRange,
    kMissingAnswer,
    kMultipleAnswers,
    kAnswerNotTerminal,
    kAnswerGrammar,
    kMultipleTimelines,
    kTimelineOverlap,
  };
  Kind kind;
  std::size_t turn_index = 0;
  std::string detail;
};

const char* to_string(FormatViolation::Kind k) noexcept;

struct FormatCheck {
  bool ok = false;
  std::vector<FormatViolation> violations;
  std::vector<std::string> warnings;  // soft lints such as timeline size

  bool has(FormatViolation::Kind k) const noexcept;
};

struct FormatOptions {
  int max_steps = kDefaultMaxSteps;
  std::optional<TimePoint> duration;  // enables crop range checks
  int min_timeline_segments = 2;
  int max_timeline_segments = 5;
};

/// Total: every trajectory yields a verdict, never an exception.
FormatCheck validate_format(const Trajectory& t, TaskKind task_kind, const FormatOptions& opts = {});

/// DAC crops that reproduce a timeline segment (within one second at each end)
/// are segment visits and do not consume the refinement budget.
std::size_t refinement_steps(const Trajectory& t, TaskKind task_kind);

using TaskAnswer = std::variant<std::vector<CaptionSegment>, Interval, std::string>;

/// Answer grammars. Each returns nullopt for text that does not conform.
std::optional<Interval> parse_tag_answer(std::string_view text);
/// "[MM:SS - MM:SS]: caption" lines, or the JSON list
/// [{"start": "MM:SS", "end": "MM:SS", "caption": "..."}].
std::optional<std::vector<CaptionSegment>> parse_dac_answer(std::string_view text);
std::optional<std::string> parse_tac_answer(std::string_view text);

std::string format_dac_answer(const std::vector<CaptionSegment>& segments);

/// Requires validate_format(t, kind).ok; throws ContractError otherwise.
TaskAnswer extract_answer(const Trajectory& t, TaskKind task_kind);
/// Answer extraction that ignores non-answer violations (used for scoring).
std::optional<TaskAnswer> try_extract_answer(const Trajectory& t, TaskKind task_kind);

}  // namespace latkit
