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

#include <ostream>

#include "commands.hpp"
#include "latkit/audio.hpp"
#include "latkit/backends.hpp"
#include "latkit/errors.hpp"
#include "latkit/orchestrator.hpp"
#include "latkit/sliding_window.hpp"

namespace latkit::cli {

namespace {

// Rate of the synthetic silent buffers: every decimation factor divides it.
constexpr std::uint32_t kSilentRate = 1000;

std::vector<TaskInstance> load_instances(const std::string& path) {
  try {
    return parse_task_instances(read_file(path));
  } catch (const Error& e) {
    throw CheckFailure(path + ": " + e.what());
  }
}

AudioBuffer load_audio(const Settings& s, const TaskInstance& inst) {
  if (s.silent_audio) {
    AudioBuffer a;
    a.sample_rate = kSilentRate;
    a.samples.assign(static_cast<std::size_t>(inst.duration.millis() * kSilentRate / 1000), 0);
    return a;
  }
  const fs::path p = fs::path(s.audio_dir) / inst.audio_ref;
  try {
    return load_wav(p);
  } catch (const AudioError& e) {
    if (e.kind() == AudioError::Kind::kIo) throw IoFailure(p.string() + ": " + e.what());
    throw CheckFailure(p.string() + ": " + e.what());
  }
}

// Shared backends are built once; per-instance ones (oracle, replay) per session.
class BackendPool {
 public:
  BackendPool(const Settings& s, bool allow_replay) : spec_(s.backend) {
    if (spec_ == "always-crop") {
      shared_ = std::make_unique<AlwaysCropBackend>();
    } else if (spec_.rfind("tcp://", 0) == 0) {
      try {
        shared_ = external_backend(spec_, s.send_pcm);
      } catch (const BackendError& e) {
        throw IoFailure(e.what());
      }
    } else if (spec_.rfind("replay:", 0) == 0) {
      if (!allow_replay) throw CheckFailure("replay backends drive TWA sessions only");
      replay_dir_ = spec_.substr(7);
    } else if (spec_ != "oracle") {
      throw CheckFailure("unknown backend '" + spec_ + "' (oracle, replay:DIR, always-crop, tcp://host:port)");
    }
  }

  bool parallel_ok() const { return shared_ == nullptr || shared_->supports_concurrent_sessions(); }

  std::string id() const { return spec_; }

  std::unique_ptr<ModelBackend> make(const TaskInstance& inst) const {
    if (spec_ == "oracle") return std::make_unique<OracleBackend>(inst);
    if (!replay_dir_.empty()) {
      const fs::path p = fs::path(replay_dir_) / (inst.id + ".json");
      try {
        return std::make_unique<ReplayBackend>(parse_trajectory(read_file(p)));
      } catch (const Error& e) {
        throw CheckFailure(p.string() + ": " + e.what());
      }
    }
    return nullptr;
  }

  ModelBackend& shared() const { return *shared_; }

  void add_inputs(Manifest& m, const std::vector<TaskInstance>& instances) const {
    if (replay_dir_.empty()) return;
    for (const auto& t : instances) m.add_input(fs::path(replay_dir_) / (t.id + ".json"));
  }

 private:
  std::string spec_;
  std::string replay_dir_;
  std::unique_ptr<ModelBackend> shared_;
};

json predictions_json(const std::vector<TaskInstance>& instances, const std::vector<std::optional<TaskAnswer>>& answers) {
  json list = json::array();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    list.push_back({{"id", instances[i].id}, {"answer", answers[i] ? answer_to_json(*answers[i]) : json(nullptr)}});
  }
  return json{{"predictions", std::move(list)}};
}

json reports_json(const std::vector<TaskInstance>& instances, const std::vector<std::optional<TaskAnswer>>& answers,
                  const SemanticScorer& scorer, const Settings& s) {
  std::vector<SampleScore> samples(instances.size());
  parallel_for(instances.size(), s.workers,
               [&](std::size_t i) { samples[i] = score_sample(instances[i], answers[i], scorer, s.thresholds); });
  json rj = json::array();
  for (const auto& r : corpus_reports(instances, samples, s.thresholds)) rj.push_back(corpus_json(r));
  return rj;
}

void require_audio_source(const Settings& s) {
  if (!s.silent_audio && s.audio_dir.empty()) throw CheckFailure("--audio-dir or --silent-audio is required");
}

void add_audio_inputs(const Settings& s, Manifest& m, const std::vector<TaskInstance>& instances) {
  if (s.silent_audio) return;
  for (const auto& t : instances) m.add_input(fs::path(s.audio_dir) / t.audio_ref);
}

}  // namespace

int cmd_run(const Settings& s, std::ostream& out, std::ostream&) {
  require_audio_source(s);
  const auto instances = load_instances(s.instances_path);
  SessionConfig cfg;
  cfg.max_steps = s.max_steps;
  cfg.timeline_downsample_factor = s.timeline_downsample;
  cfg.local_crop_downsample = s.crop_downsample;
  try {
    cfg.check();
  } catch (const ContractError& e) {
    throw CheckFailure(e.what());
  }
  const BackendPool pool(s, true);
  const auto scorer = open_scorer(s);

  Manifest manifest{"run"};
  manifest.add_input(s.instances_path);
  add_audio_inputs(s, manifest, instances);
  pool.add_inputs(manifest, instances);
  manifest.config["scorer"] = scorer->id();
  manifest.config["backend"] = pool.id();
  manifest.config["silent_audio"] = s.silent_audio;

  std::vector<SessionResult> results(instances.size());
  std::vector<RewardBreakdown> rewards(instances.size());
  std::vector<std::vector<std::string>> replay_warnings(instances.size());
  parallel_for(instances.size(), pool.parallel_ok() ? s.workers : 1, [&](std::size_t i) {
    const auto& inst = instances[i];
    const AudioBuffer audio = load_audio(s, inst);
    auto own = pool.make(inst);
    ModelBackend& backend = own ? *own : pool.shared();
    try {
      results[i] = run_session(inst, audio, backend, cfg);
    } catch (const ContractError& e) {
      throw CheckFailure(inst.id + ": " + e.what());
    }
    if (auto* replay = dynamic_cast<ReplayBackend*>(own.get())) replay_warnings[i] = replay->warnings();
    FormatOptions opts;
    opts.max_steps = s.max_steps;
    opts.duration = inst.duration;
    rewards[i] = score_rollout(results[i].trajectory, inst, *scorer, opts);
  });

  std::vector<std::optional<TaskAnswer>> answers(instances.size());
  json sessions = json::array();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& r = results[i];
    answers[i] = r.answer;
    json j{{"id", instances[i].id},
           {"task", to_string(instances[i].task_kind)},
           {"termination", to_string(r.termination)},
           {"tool_calls", r.tool_calls},
           {"format_reward", rewards[i].format_reward},
           {"task_reward", rewards[i].task_reward}};
    if (!r.error.empty()) j["error"] = r.error;
    std::vector<std::string> warnings = r.warnings;
    warnings.insert(warnings.end(), replay_warnings[i].begin(), replay_warnings[i].end());
    if (!warnings.empty()) j["warnings"] = warnings;
    sessions.push_back(std::move(j));
  }
  json report{{"kind", "run"},
              {"manifest", manifest.to_json(s)},
              {"sessions", std::move(sessions)},
              {"reports", reports_json(instances, answers, *scorer, s)}};

  if (!s.out_dir.empty()) {
    const fs::path dir(s.out_dir);
    for (std::size_t i = 0; i < instances.size(); ++i) {
      write_file(dir / "trajectories" / (instances[i].id + ".json"), serialize_trajectory(results[i].trajectory) + "\n");
    }
    write_file(dir / "predictions.json", predictions_json(instances, answers).dump(2) + "\n");
    write_file(dir / "manifest.json", report["manifest"].dump(2) + "\n");
    write_file(dir / "report.json", report.dump(2) + "\n");
    write_file(dir / "report.md", render_markdown(report));
  }
  emit(s, report, render_markdown(report), out);
  return kExitOk;
}

int cmd_chunk_eval(const Settings& s, std::ostream& out, std::ostream&) {
  require_audio_source(s);
  const auto instances = load_instances(s.instances_path);
  const BackendPool pool(s, false);
  const auto scorer = open_scorer(s);

  Manifest manifest{"chunk-eval"};
  manifest.add_input(s.instances_path);
  add_audio_inputs(s, manifest, instances);
  manifest.config["scorer"] = scorer->id();
  manifest.config["backend"] = pool.id();
  manifest.config["silent_audio"] = s.silent_audio;

  std::vector<std::optional<TaskAnswer>> answers(instances.size());
  std::vector<std::vector<ChunkFlag>> flags(instances.size());
  // Instances run one after another; DAC chunks fan out inside sw_dac.
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const AudioBuffer audio = load_audio(s, inst);
    auto own = pool.make(inst);
    ModelBackend& backend = own ? *own : pool.shared();
    try {
      switch (inst.task_kind) {
        case TaskKind::kDac: {
          auto r = sw_dac(audio, backend, inst.audio_ref, s.workers);
          flags[i] = std::move(r.flags);
          answers[i] = TaskAnswer{std::move(r.captions)};
          break;
        }
        case TaskKind::kTag: {
          auto r = sw_tag(audio, inst.query, backend, inst.audio_ref);
          flags[i] = std::move(r.flags);
          if (r.interval) answers[i] = TaskAnswer{*r.interval};
          break;
        }
        case TaskKind::kTac: {
          auto r = sw_tac(audio, *inst.target_interval, task_prompt(inst), backend, inst.audio_ref);
          flags[i] = std::move(r.flags);
          answers[i] = TaskAnswer{std::move(r.caption)};
          break;
        }
      }
    } catch (const ContractError& e) {
      throw CheckFailure(inst.id + ": " + e.what());
    } catch (const BackendError& e) {
      throw IoFailure(inst.id + ": " + e.what());
    }
  }

  json fj = json::array();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& f : flags[i]) fj.push_back({{"id", instances[i].id}, {"chunk", f.chunk}, {"detail", f.detail}});
  }
  json report{{"kind", "chunk-eval"},
              {"manifest", manifest.to_json(s)},
              {"flags", std::move(fj)},
              {"reports", reports_json(instances, answers, *scorer, s)}};
  if (!s.out_dir.empty()) {
    const fs::path dir(s.out_dir);
    write_file(dir / "predictions.json", predictions_json(instances, answers).dump(2) + "\n");
    write_file(dir / "report.json", report.dump(2) + "\n");
    write_file(dir / "report.md", render_markdown(report));
  }
  emit(s, report, render_markdown(report), out);
  return kExitOk;
}

}  // namespace latkit::cli
