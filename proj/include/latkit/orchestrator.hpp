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

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "latkit/annotation.hpp"
#include "latkit/audio.hpp"
#include "latkit/trajectory.hpp"

namespace latkit {

/// What the backend is being asked for.
enum class Phase { kTimeline, kReasoning, kBaseline };

const char* to_string(Phase p) noexcept;

/// One generation request. References are valid for the duration of the call.
struct BackendRequest {
  TaskKind task_kind;
  Phase phase;
  const std::string& prompt;
  const Trajectory& history;
  /// Audio the model hears now: the decimated full recording for the timeline,
  /// the most recent crop while reasoning, the chunk or target for baselines.
  const AudioBuffer& audio;
  std::string audio_ref;
  int downsample_factor = 1;
  /// Where `audio` starts within the source recording.
  TimePoint clip_offset;
  TimePoint source_duration;
};

/// Produces exactly one assistant turn per call.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual Turn generate(const BackendRequest& request) = 0;
  virtual bool supports_concurrent_sessions() const { return false; }
  virtual std::string id() const = 0;
};

/// Wraps a backend that cannot take concurrent sessions behind a mutex.
class SerializedBackend final : public ModelBackend {
 public:
  explicit SerializedBackend(ModelBackend& inner) : inner_(inner) {}
  Turn generate(const BackendRequest& request) override;
  bool supports_concurrent_sessions() const override { return true; }
  std::string id() const override { return inner_.id(); }

 private:
  ModelBackend& inner_;
  std::mutex mu_;
};

struct SessionConfig {
  int max_steps = kDefaultMaxSteps;
  int timeline_downsample_factor = 2;
  int local_crop_downsample = 1;
  /// Upper bound on backend calls per session, guarding against endless Think turns.
  int max_backend_calls = 64;

  void check() const;
};

enum class Termination { kAnswerProduced, kStepBudgetExhausted, kBackendError, kToolError };

const char* to_string(Termination t) noexcept;

struct SessionResult {
  Trajectory trajectory;
  std::optional<TaskAnswer> answer;
  Termination termination = Termination::kBackendError;
  std::size_t tool_calls = 0;
  std::vector<std::string> warnings;
  std::string error;
};

/// Text of a successful crop_audio tool response.
inline constexpr std::string_view kCropSuccessResponse = "Segment extracted: <audio>";

/// Task prompt shown to the model as the user turn.
std::string task_prompt(const TaskInstance& instance);

/// Dispatches on the instance's task kind. TAG runs the free refinement loop:
/// each backend ToolCall is executed against `audio` and answered with a tool
/// response; the loop ends on an answer or when a call would exceed the budget.
/// Throws ContractError when the instance and audio durations differ by more
/// than one second.
SessionResult run_session(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend,
                          const SessionConfig& cfg = {});

/// Visits timeline segments in order, issuing one budget-exempt crop per
/// segment after the backend's think turn, and concatenates the caption blocks.
SessionResult run_dac_session(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend,
                              const SessionConfig& cfg = {});

/// Issues crop_audio over the target interval after the backend's first think
/// turn, then lets the backend refine and answer.
SessionResult run_tac_session(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend,
                              const SessionConfig& cfg = {});

/// Normalizes whitespace the way a serialize/parse round trip would.
Turn canonical_turn(Turn turn);

}  // namespace latkit
