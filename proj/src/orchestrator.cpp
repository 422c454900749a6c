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

#include "latkit/orchestrator.hpp"

#include <cstdlib>

#include "latkit/errors.hpp"
#include "latkit/prompts.hpp"

namespace latkit {

namespace {

std::string replace_all(std::string s, std::string_view key, std::string_view value) {
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
  return s;
}

bool is_content(const Turn& t) {
  const auto k = t.kind();
  return k == TurnKind::kThink || k == TurnKind::kAnswer || k == TurnKind::kTimelineDecl;
}

bool answer_conforms(const std::string& text, TaskKind kind) {
  switch (kind) {
    case TaskKind::kTag:
      return parse_tag_answer(text).has_value();
    case TaskKind::kDac:
      return parse_dac_answer(text).has_value();
    case TaskKind::kTac:
      return parse_tac_answer(text).has_value();
  }
  return false;
}

// Shared state of one causal session.
class Session {
 public:
  Session(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend, const SessionConfig& cfg)
      : instance_(instance), audio_(audio), backend_(backend), cfg_(cfg), prompt_(task_prompt(instance)) {
    cfg.check();
    const auto diff = std::llabs(audio.duration().millis() - instance.duration.millis());
    if (diff > 1000) {
      throw ContractError("session '" + instance.id + "': audio lasts " + format_timestamp(audio.duration()) +
                          " but the instance declares " + format_timestamp(instance.duration));
    }
    result_.trajectory.id = instance.id;
    result_.trajectory.task_kind = instance.task_kind;
    result_.trajectory.prompt = prompt_;
    current_clip_ = decimate(audio, cfg.timeline_downsample_factor);
    clip_factor_ = cfg.timeline_downsample_factor;
  }

  // Phase 1. Returns false (with the result terminated) when no timeline arrives.
  bool request_timeline() {
    auto turn = ask(Phase::kTimeline);
    if (!turn) return false;
    const auto* tl = turn->get<GlobalTimeline>();
    if (tl == nullptr) {
      append(std::move(*turn));
      return finish(Termination::kBackendError, "expected a global timeline as the first turn");
    }
    const auto k = tl->segments.size();
    if (k < 2 || k > 5) {
      result_.warnings.push_back("timeline has " + std::to_string(k) + " segments (expected 2-5)");
    }
    for (std::size_t s = 1; s < k; ++s) {
      if (tl->segments[s].interval.start < tl->segments[s - 1].interval.end) {
        result_.warnings.push_back("timeline segment " + std::to_string(s) + " overlaps its predecessor");
      }
    }
    timeline_ = *tl;
    append(std::move(*turn));
    current_clip_ = AudioBuffer{{}, audio_.sample_rate};
    clip_offset_ = TimePoint{};
    return true;
  }

  std::optional<Turn> ask(Phase phase) {
    if (backend_calls_ >= cfg_.max_backend_calls) {
      finish(Termination::kStepBudgetExhausted,
             "backend call limit of " + std::to_string(cfg_.max_backend_calls) + " reached");
      return std::nullopt;
    }
    ++backend_calls_;
    BackendRequest req{instance_.task_kind, phase,        prompt_,     result_.trajectory, current_clip_,
                       instance_.audio_ref, clip_factor_, clip_offset_, instance_.duration};
    try {
      Turn t = canonical_turn(backend_.generate(req));
      if (t.kind() == TurnKind::kToolResponse) {
        finish(Termination::kBackendError, "backend produced a tool response");
        return std::nullopt;
      }
      return t;
    } catch (const std::exception& e) {
      finish(Termination::kBackendError, std::string("backend failure: ") + e.what());
      return std::nullopt;
    }
  }

  void append(Turn t) {
    const auto& turns = result_.trajectory.turns;
    if (turns.empty() || !is_content(turns.back())) t.continues_message = false;
    result_.trajectory.turns.push_back(std::move(t));
  }

  // Appends the call and its response. Model-caused failures become the
  // response text; anything else ends the session with kToolError.
  bool execute_crop(const ToolCall& call) {
    ++result_.tool_calls;
    append(Turn{call});
    try {
      AudioBuffer clip = crop_audio(audio_, call.start_sec, call.end_sec);
      current_clip_ = decimate(clip, cfg_.local_crop_downsample);
      clip_factor_ = cfg_.local_crop_downsample;
      clip_offset_ = TimePoint::from_seconds(call.start_sec);
      append(Turn{ToolResponse{std::string(kCropSuccessResponse)}});
    } catch (const AudioError& e) {
      if (e.kind() != AudioError::Kind::kArgument && e.kind() != AudioError::Kind::kOutOfRange) {
        append(Turn{ToolResponse{std::string("Error: ") + e.what()}});
        return finish(Termination::kToolError, e.what());
      }
      result_.warnings.push_back(std::string("tool error: ") + e.what());
      append(Turn{ToolResponse{std::string("Error: ") + e.what()}});
    }
    return true;
  }

  // Appends an answer turn; false when it breaks the task grammar.
  bool accept_answer(Turn t) {
    const std::string text = t.get<Answer>()->text;
    append(std::move(t));
    if (!answer_conforms(text, instance_.task_kind)) {
      return finish(Termination::kBackendError,
                    std::string("answer does not match the ") + to_string(instance_.task_kind) + " grammar");
    }
    return true;
  }

  bool finish(Termination t, std::string error = {}) {
    result_.termination = t;
    result_.error = std::move(error);
    done_ = true;
    return false;
  }

  SessionResult complete() {
    result_.answer = try_extract_answer(result_.trajectory, instance_.task_kind);
    result_.termination = Termination::kAnswerProduced;
    done_ = true;
    return std::move(result_);
  }

  SessionResult take() {
    result_.answer.reset();
    return std::move(result_);
  }

  bool done() const { return done_; }
  const GlobalTimeline& timeline() const { return timeline_; }
  const Trajectory& trajectory() const { return result_.trajectory; }
  const SessionConfig& config() const { return cfg_; }
  const TaskInstance& instance() const { return instance_; }

 private:
  const TaskInstance& instance_;
  const AudioBuffer& audio_;
  ModelBackend& backend_;
  const SessionConfig& cfg_;
  std::string prompt_;
  SessionResult result_;
  GlobalTimeline timeline_;
  AudioBuffer current_clip_;
  int clip_factor_ = 1;
  TimePoint clip_offset_;
  int backend_calls_ = 0;
  bool done_ = false;
};

// TAG and TAC share the refinement loop; TAC pre-issues the target crop.
SessionResult run_refinement(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend,
                             const SessionConfig& cfg) {
  Session s(instance, audio, backend, cfg);
  if (!s.request_timeline()) return s.take();
  std::size_t calls = 0;
  for (;;) {
    if (instance.task_kind == TaskKind::kTac && calls == 0 && !s.trajectory().turns.empty() &&
        s.trajectory().turns.back().kind() == TurnKind::kThink) {
      const Interval target = *instance.target_interval;
      ++calls;
      if (!s.execute_crop(ToolCall{std::string(kCropAudioTool), target.start.seconds(), target.end.seconds()})) {
        return s.take();
      }
      continue;
    }
    auto turn = s.ask(Phase::kReasoning);
    if (!turn) return s.take();
    switch (turn->kind()) {
      case TurnKind::kThink:
        s.append(std::move(*turn));
        break;
      case TurnKind::kToolCall:
        if (calls >= static_cast<std::size_t>(cfg.max_steps)) {
          s.finish(Termination::kStepBudgetExhausted,
                   "step budget of " + std::to_string(cfg.max_steps) + " tool calls exhausted");
          return s.take();
        }
        ++calls;
        if (!s.execute_crop(*turn->get<ToolCall>())) return s.take();
        break;
      case TurnKind::kAnswer:
        if (!s.accept_answer(std::move(*turn))) return s.take();
        return s.complete();
      case TurnKind::kTimelineDecl:
        s.append(std::move(*turn));
        s.finish(Termination::kBackendError, "global timeline declared twice");
        return s.take();
      case TurnKind::kToolResponse:
        break;  // rejected in ask()
    }
  }
}

}  // namespace

const char* to_string(Phase p) noexcept {
  switch (p) {
    case Phase::kTimeline:
      return "timeline";
    case Phase::kReasoning:
      return "reasoning";
    case Phase::kBaseline:
      return "baseline";
  }
  return "?";
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::kAnswerProduced:
      return "AnswerProduced";
    case Termination::kStepBudgetExhausted:
      return "StepBudgetExhausted";
    case Termination::kBackendError:
      return "BackendError";
    case Termination::kToolError:
      return "ToolError";
  }
  return "?";
}

Turn SerializedBackend::generate(const BackendRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  return inner_.generate(request);
}

void SessionConfig::check() const {
  auto factor_ok = [](int f) { return f == 1 || f == 2 || f == 4 || f == 8; };
  if (max_steps < 1) throw ContractError("SessionConfig: max_steps must be at least 1");
  if (!factor_ok(timeline_downsample_factor) || !factor_ok(local_crop_downsample)) {
    throw ContractError("SessionConfig: downsample factors must be 1, 2, 4 or 8");
  }
  if (max_backend_calls < 1) throw ContractError("SessionConfig: max_backend_calls must be at least 1");
}

std::string task_prompt(const TaskInstance& instance) {
  switch (instance.task_kind) {
    case TaskKind::kDac:
      return std::string(prompts::twa_dac());
    case TaskKind::kTag: {
      std::string query = instance.query;
      // Queries that already carry the output instruction are used verbatim.
      if (query.find("[MM:SS - MM:SS]") != std::string::npos) return "<audio> " + query;
      return replace_all(std::string(prompts::twa_tag()), "{query}", query);
    }
    case TaskKind::kTac:
      return replace_all(std::string(prompts::twa_tac()), "{interval}", format_interval(*instance.target_interval));
  }
  return {};
}

Turn canonical_turn(Turn turn) {
  // Round-trip through the content grammar so whitespace matches what a
  // serialized document would parse back to.
  if (turn.kind() == TurnKind::kThink || turn.kind() == TurnKind::kAnswer) {
    std::string rendered;
    if (const auto* th = turn.get<Think>()) rendered = "<think>" + th->text + "</think>";
    if (const auto* an = turn.get<Answer>()) rendered = an->text;
    std::vector<Turn> parsed;
    try {
      parsed = parse_assistant_content(rendered);
    } catch (const ParseError&) {
      parsed.clear();
    }
    if (parsed.size() == 1 && parsed.front().kind() == turn.kind()) {
      parsed.front().continues_message = turn.continues_message;
      return parsed.front();
    }
    if (parsed.empty() && turn.kind() == TurnKind::kAnswer) {
      turn.payload = Answer{};
    }
  }
  return turn;
}

SessionResult run_session(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend,
                          const SessionConfig& cfg) {
  switch (instance.task_kind) {
    case TaskKind::kDac:
      return run_dac_session(instance, audio, backend, cfg);
    case TaskKind::kTac:
      return run_tac_session(instance, audio, backend, cfg);
    case TaskKind::kTag:
      break;
  }
  return run_refinement(instance, audio, backend, cfg);
}

SessionResult run_tac_session(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend,
                              const SessionConfig& cfg) {
  if (instance.task_kind != TaskKind::kTac) throw ContractError("run_tac_session: instance is not a TAC task");
  if (!instance.target_interval || !instance.target_interval->valid() ||
      instance.target_interval->end.millis() > audio.duration().millis()) {
    throw ContractError("run_tac_session: target interval must lie within the audio");
  }
  return run_refinement(instance, audio, backend, cfg);
}

SessionResult run_dac_session(const TaskInstance& instance, const AudioBuffer& audio, ModelBackend& backend,
                              const SessionConfig& cfg) {
  if (instance.task_kind != TaskKind::kDac) throw ContractError("run_dac_session: instance is not a DAC task");
  Session s(instance, audio, backend, cfg);
  if (!s.request_timeline()) return s.take();
  const auto& segments = s.timeline().segments;
  if (segments.empty()) {
    s.finish(Termination::kBackendError, "global timeline has no segments");
    return s.take();
  }
  std::size_t next_segment = 0;
  bool awaiting_caption = false;
  std::size_t refinement_calls = 0;
  for (;;) {
    auto turn = s.ask(Phase::kReasoning);
    if (!turn) return s.take();
    switch (turn->kind()) {
      case TurnKind::kThink:
        s.append(std::move(*turn));
        if (!awaiting_caption && next_segment < segments.size()) {
          const Interval seg = segments[next_segment++].interval;
          awaiting_caption = true;
          if (!s.execute_crop(ToolCall{std::string(kCropAudioTool), seg.start.seconds(), seg.end.seconds()})) {
            return s.take();
          }
        }
        break;
      case TurnKind::kToolCall:
        if (refinement_calls >= static_cast<std::size_t>(cfg.max_steps)) {
          s.finish(Termination::kStepBudgetExhausted,
                   "step budget of " + std::to_string(cfg.max_steps) + " re-crops exhausted");
          return s.take();
        }
        ++refinement_calls;
        if (!s.execute_crop(*turn->get<ToolCall>())) return s.take();
        break;
      case TurnKind::kAnswer:
        if (!s.accept_answer(std::move(*turn))) return s.take();
        awaiting_caption = false;
        if (next_segment == segments.size()) return s.complete();
        break;
      case TurnKind::kTimelineDecl:
        s.append(std::move(*turn));
        s.finish(Termination::kBackendError, "global timeline declared twice");
        return s.take();
      case TurnKind::kToolResponse:
        break;
    }
  }
}

}  // namespace latkit
