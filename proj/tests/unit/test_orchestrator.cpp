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

#include <deque>
#include <nlohmann/json.hpp>

#include "latkit/backends.hpp"
#include "latkit/errors.hpp"
#include "latkit/metrics.hpp"
#include "latkit/orchestrator.hpp"
#include "support.hpp"

using namespace latkit;
using namespace testsupport;

namespace {

/// Hands out a fixed list of turns and records each request's phase and audio size.
class ScriptedBackend final : public ModelBackend {
 public:
  explicit ScriptedBackend(std::vector<Turn> turns) : turns_(turns.begin(), turns.end()) {}
  Turn generate(const BackendRequest& r) override {
    phases.push_back(r.phase);
    audio_sizes.push_back(r.audio.size());
    factors.push_back(r.downsample_factor);
    if (turns_.empty()) throw std::runtime_error("script exhausted");
    Turn t = turns_.front();
    turns_.pop_front();
    return t;
  }
  std::string id() const override { return "scripted"; }

  std::vector<Phase> phases;
  std::vector<std::size_t> audio_sizes;
  std::vector<int> factors;

 private:
  std::deque<Turn> turns_;
};

AudioBuffer silence(TimePoint d, std::uint32_t rate = 1000) {
  AudioBuffer a;
  a.sample_rate = rate;
  a.samples.assign(static_cast<std::size_t>(d.millis() * rate / 1000), 0);
  return a;
}

TaskInstance tag_instance(std::int64_t dur_ms, Interval gt) {
  TaskInstance t;
  t.id = "tag";
  t.task_kind = TaskKind::kTag;
  t.audio_ref = "x.wav";
  t.duration = TimePoint::from_millis(dur_ms);
  t.query = "find the bell";
  t.ground_truth = gt;
  return t;
}

Turn two_part_timeline(std::int64_t dur_ms) {
  return timeline({{make_interval(0, dur_ms / 2), "first"}, {make_interval(dur_ms / 2, dur_ms), "second"}});
}

Trajectory normalized(Trajectory t) {
  for (auto& turn : t.turns) turn = canonical_turn(turn);
  return t;
}

}  // namespace

TEST_CASE("replay reproduces each appendix fixture") {
  for (TaskKind k : {TaskKind::kTag, TaskKind::kDac, TaskKind::kTac}) {
    const auto inst = appendix_instance(k);
    const std::string name = k == TaskKind::kTag ? "tag" : k == TaskKind::kDac ? "dac" : "tac";
    const auto fixture = load_fixture_trajectory(name);
    ReplayBackend backend(fixture);
    const auto r = run_session(inst, silence(inst.duration), backend);
    CHECK(r.termination == Termination::kAnswerProduced);
    CHECK(backend.warnings().empty());
    CHECK(normalized(r.trajectory).turns == normalized(fixture).turns);
    CHECK(r.trajectory.prompt == fixture.prompt);
    REQUIRE(r.answer.has_value());
    switch (k) {
      case TaskKind::kTag:
        CHECK(format_interval(std::get<Interval>(*r.answer)) == "[08:42 - 08:51]");
        CHECK(r.tool_calls == 1);
        break;
      case TaskKind::kDac:
        CHECK(std::get<std::vector<CaptionSegment>>(*r.answer).size() == 5);
        CHECK(r.tool_calls == 3);
        break;
      case TaskKind::kTac:
        CHECK(std::get<std::string>(*r.answer) == inst.tac());
        CHECK(r.tool_calls == 1);
        break;
    }
  }
}

TEST_CASE("oracle backend reaches the ground truth") {
  TokenF1Scorer f1;
  for (const auto& inst : appendix_instances()) {
    OracleBackend backend(inst);
    const auto r = run_session(inst, silence(inst.duration), backend);
    REQUIRE(r.termination == Termination::kAnswerProduced);
    CHECK(validate_format(r.trajectory, inst.task_kind).ok);
    switch (inst.task_kind) {
      case TaskKind::kTag:
        CHECK(iou(std::get<Interval>(*r.answer), inst.tag()) == 1.0);
        break;
      case TaskKind::kDac:
        CHECK(dac_score(inst.dac(), std::get<std::vector<CaptionSegment>>(*r.answer), f1).average == 1.0);
        break;
      case TaskKind::kTac:
        CHECK(std::get<std::string>(*r.answer) == inst.tac());
        break;
    }
  }
  SUBCASE("TAG gt [10s, 20s]") {
    const auto inst = tag_instance(60'000, make_interval(10'000, 20'000));
    OracleBackend backend(inst);
    const auto r = run_session(inst, silence(inst.duration), backend);
    const ToolCall* c = nullptr;
    for (const auto& t : r.trajectory.turns) {
      if (t.get<ToolCall>()) c = t.get<ToolCall>();
    }
    REQUIRE(c != nullptr);
    CHECK(c->start_sec == 10.0);
    CHECK(c->end_sec == 20.0);
    CHECK(r.trajectory.turns.back().get<Answer>()->text == "[00:10 - 00:20]");
  }
}

TEST_CASE("always-crop backend is cut off at the budget") {
  const auto inst = tag_instance(120'000, make_interval(10'000, 20'000));
  AlwaysCropBackend backend;
  const auto r = run_session(inst, silence(inst.duration), backend);
  CHECK(r.termination == Termination::kStepBudgetExhausted);
  CHECK(r.tool_calls == 4);
  CHECK(r.trajectory.step_count() == 4);
  CHECK_FALSE(r.answer.has_value());
  // the trajectory still parses
  CHECK(parse_trajectory(serialize_trajectory(r.trajectory)) == r.trajectory);
}

TEST_CASE("session failure modes") {
  const std::int64_t dur = 60'000;
  const auto inst = tag_instance(dur, make_interval(10'000, 20'000));
  const auto audio = silence(inst.duration);

  SUBCASE("missing timeline") {
    ScriptedBackend b({think("no timeline")});
    CHECK(run_session(inst, audio, b).termination == Termination::kBackendError);
  }
  SUBCASE("backend exception") {
    ScriptedBackend b({two_part_timeline(dur), think("x")});
    const auto r = run_session(inst, audio, b);
    CHECK(r.termination == Termination::kBackendError);
    CHECK(r.trajectory.turns.size() == 2);
  }
  SUBCASE("hallucinated crop is answered with an error and the session continues") {
    ScriptedBackend b({two_part_timeline(dur), think("x"), call(90, 100), think("retry"), call(10, 20),
                       think("got it"), answer("[00:10 - 00:20]")});
    const auto r = run_session(inst, audio, b);
    CHECK(r.termination == Termination::kAnswerProduced);
    CHECK(r.tool_calls == 2);
    const auto* first = r.trajectory.turns[3].get<ToolResponse>();
    REQUIRE(first != nullptr);
    CHECK(first->content.rfind("Error:", 0) == 0);
    CHECK(r.trajectory.turns[6].get<ToolResponse>()->content == kCropSuccessResponse);
  }
  SUBCASE("malformed answer") {
    ScriptedBackend b({two_part_timeline(dur), think("x"), answer("around ten seconds")});
    const auto r = run_session(inst, audio, b);
    CHECK(r.termination == Termination::kBackendError);
    CHECK_FALSE(r.answer.has_value());
    CHECK(r.trajectory.turns.back().kind() == TurnKind::kAnswer);
  }
  SUBCASE("one-segment timeline is a warning") {
    ScriptedBackend b({timeline({{make_interval(0, dur), "all"}}), think("x"), answer("[00:10 - 00:20]")});
    const auto r = run_session(inst, audio, b);
    CHECK(r.termination == Termination::kAnswerProduced);
    CHECK(r.warnings.size() == 1);
  }
  SUBCASE("duration mismatch") {
    ScriptedBackend b({});
    CHECK_THROWS_AS(run_session(inst, silence(TimePoint::from_millis(dur + 1500)), b), ContractError);
  }
  SUBCASE("endless thinking is bounded") {
    std::vector<Turn> turns = {two_part_timeline(dur)};
    for (int i = 0; i < 200; ++i) turns.push_back(think("hmm"));
    ScriptedBackend b(turns);
    SessionConfig cfg;
    cfg.max_backend_calls = 10;
    const auto r = run_session(inst, audio, b, cfg);
    CHECK(r.termination == Termination::kStepBudgetExhausted);
    CHECK(b.phases.size() == 10);
  }
}

TEST_CASE("timeline and crop audio resolutions") {
  const std::int64_t dur = 60'000;
  const auto inst = tag_instance(dur, make_interval(10'000, 20'000));
  const auto audio = silence(inst.duration, 16000);
  ScriptedBackend b({two_part_timeline(dur), think("x"), call(10, 20), think("y"), answer("[00:10 - 00:20]")});
  SessionConfig cfg;
  cfg.timeline_downsample_factor = 4;
  cfg.local_crop_downsample = 2;
  run_session(inst, audio, b, cfg);
  // timeline, think, call, then think and answer over the crop
  REQUIRE(b.phases.size() == 5);
  CHECK(b.phases[0] == Phase::kTimeline);
  CHECK(b.audio_sizes[0] == 960'000 / 4);
  CHECK(b.factors[0] == 4);
  CHECK(b.phases[3] == Phase::kReasoning);
  CHECK(b.audio_sizes[3] == 160'000 / 2);
  CHECK(b.factors[3] == 2);
}

TEST_CASE("TAC target crop is issued by the orchestrator") {
  auto inst = appendix_instance(TaskKind::kTac);
  ScriptedBackend b({two_part_timeline(inst.duration.millis()), think("x"), think("y"), answer("a caption")});
  const auto r = run_tac_session(inst, silence(inst.duration), b);
  CHECK(r.termination == Termination::kAnswerProduced);
  REQUIRE(r.trajectory.turns.size() == 6);
  const auto* c = r.trajectory.turns[2].get<ToolCall>();
  REQUIRE(c != nullptr);
  CHECK(c->start_sec == 109.0);
  CHECK(c->end_sec == 130.0);

  inst.target_interval = make_interval(200'000, 300'000);
  ScriptedBackend none({});
  CHECK_THROWS_AS(run_tac_session(inst, silence(inst.duration), none), ContractError);
}

TEST_CASE("DAC segment crops do not use the refinement budget") {
  TaskInstance inst;
  inst.id = "d";
  inst.task_kind = TaskKind::kDac;
  inst.audio_ref = "d.wav";
  inst.duration = TimePoint::from_millis(300'000);
  std::vector<CaptionSegment> caps;
  std::vector<std::pair<Interval, std::string>> parts;
  for (int i = 0; i < 5; ++i) {
    caps.push_back({make_interval(i * 60'000, (i + 1) * 60'000), "part " + std::to_string(i)});
    parts.emplace_back(caps.back().interval, "p");
  }
  inst.ground_truth = caps;
  std::vector<Turn> script = {timeline(parts)};
  for (const auto& c : caps) {
    script.push_back(think("segment"));
    script.push_back(answer(format_dac_answer({c})));
  }
  ScriptedBackend b(script);
  SessionConfig cfg;
  cfg.max_steps = 1;
  const auto r = run_dac_session(inst, silence(inst.duration), b, cfg);
  CHECK(r.termination == Termination::kAnswerProduced);
  CHECK(r.tool_calls == 5);
  CHECK(refinement_steps(r.trajectory, TaskKind::kDac) == 0);
  FormatOptions opts;
  opts.max_steps = 1;
  CHECK(validate_format(r.trajectory, TaskKind::kDac, opts).ok);
  CHECK(std::get<std::vector<CaptionSegment>>(*r.answer) == caps);
}

TEST_CASE("replay edge cases") {
  const auto inst = appendix_instance(TaskKind::kTag);
  SUBCASE("fixture exhausted before an answer") {
    auto fx = load_fixture_trajectory("tag");
    fx.turns.resize(1);  // timeline only
    ReplayBackend b(fx);
    const auto r = run_session(inst, silence(inst.duration), b);
    CHECK(r.termination == Termination::kBackendError);
  }
  SUBCASE("wrong-task replay surfaces an answer-grammar violation") {
    ReplayBackend b(load_fixture_trajectory("tac"));
    const auto r = run_session(inst, silence(inst.duration), b);
    CHECK(validate_format(r.trajectory, TaskKind::kTag).has(FormatViolation::Kind::kAnswerGrammar));
  }
}

TEST_CASE("external backend over loopback") {
  const auto inst = appendix_instance(TaskKind::kTag);
  std::vector<nlohmann::json> seen;
  LineServer server([&](const std::string& line) {
    const auto req = nlohmann::json::parse(line);
    seen.push_back(req);
    const std::string phase = req.at("phase");
    nlohmann::json msg;
    if (phase == "timeline") {
      msg = {{"role", "assistant"},
             {"content", "<global_timeline>\n[00:00 - 04:00] a\n[04:00 - 08:51] b\n</global_timeline>"}};
    } else if (req.at("messages").back().at("role") == "tool_response") {
      msg = {{"role", "assistant"}, {"content", "<think>found</think>\n[08:42 - 08:51]"}};
    } else {
      msg = {{"role", "assistant"},
             {"content", "<think>probe the end</think>"},
             {"tool_call", {{"name", "crop_audio"}, {"arguments", {{"start_sec", 522.0}, {"end_sec", 531.0}}}}}};
    }
    return msg.dump();
  });
  auto backend = external_backend(server.endpoint(), true);
  const auto r = run_session(inst, silence(inst.duration, 1000), *backend);
  CHECK(r.termination == Termination::kAnswerProduced);
  REQUIRE(r.answer.has_value());
  CHECK(format_interval(std::get<Interval>(*r.answer)) == "[08:42 - 08:51]");
  CHECK(validate_format(r.trajectory, TaskKind::kTag).ok);
  REQUIRE_FALSE(seen.empty());
  CHECK(seen.front().at("task") == "TAG");
  CHECK(seen.front().at("audio").contains("pcm_s16le_base64"));
  CHECK_THROWS_AS(external_backend("tcp://127.0.0.1:1"), BackendError);
}
