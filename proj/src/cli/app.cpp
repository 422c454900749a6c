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

#include <CLI11.hpp>
#include <cstdlib>
#include <ostream>

#include "commands.hpp"
#include "latkit/errors.hpp"

namespace latkit {

using cli::Settings;

namespace {

void common_flags(CLI::App* sub, Settings& s, std::string& thresholds) {
  sub->add_option("--config", s.config_path, "JSON file whose keys override the flags")->check(CLI::ExistingFile);
  sub->add_option("--out", s.out_path, "Write the JSON report here instead of stdout");
  sub->add_option("--markdown", s.markdown_path, "Also write a markdown rendering");
  sub->add_option("--timestamp", s.timestamp, "Manifest timestamp (default: SOURCE_DATE_EPOCH or now)");
  sub->add_option("--thresholds", thresholds, "Comma-separated IoU thresholds")->default_str("0.3,0.5,0.7");
  sub->add_option("--scorer", s.scorer, "builtin, token-f1, exact or tcp://host:port")->default_str(s.scorer);
  sub->add_option("--workers", s.workers, "Worker threads for per-sample work")->check(CLI::PositiveNumber);
}

void session_flags(CLI::App* sub, Settings& s) {
  sub->add_option("--instances", s.instances_path, "Task-instance file")->required();
  sub->add_option("--audio-dir", s.audio_dir, "Directory holding each instance's WAV file");
  sub->add_flag("--silent-audio", s.silent_audio, "Use silent buffers of the declared durations");
  sub->add_option("--backend", s.backend, "oracle, replay:DIR, always-crop or tcp://host:port")
      ->default_str(s.backend);
  sub->add_flag("--send-pcm", s.send_pcm, "Include base64 PCM in external backend requests");
  sub->add_option("--out-dir", s.out_dir, "Directory for trajectories, predictions and reports");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  if (const char* env = std::getenv("LATKIT_SCORER"); env != nullptr && *env != '\0') s.scorer = env;
  std::string thresholds;

  CLI::App app{"latkit: long-audio temporal reasoning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto* validate = app.add_subcommand("validate", "Check annotation, trajectory and task-instance files");
  validate->add_option("paths", s.paths, "Files or directories")->required();

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--task", s.task, "Restrict to one task (DAC, TAG, TAC)");
  eval->add_option("--gt", s.gt_path, "Task-instance file")->required();
  eval->add_option("--pred", s.pred_path, "Prediction file")->required();
  eval->add_option("--id-tolerance", s.id_tolerance, "Unmatched prediction ids allowed before failing");

  auto* reward = app.add_subcommand("reward", "Format and task rewards for trajectories");
  reward->add_option("--gt", s.gt_path, "Task-instance file")->required();
  reward->add_option("trajectories", s.trajectory_paths, "Trajectory files or directories")->required();
  reward->add_flag("--group", s.group, "Group rollouts by instance id and compute advantages");
  reward->add_option("--group-size", s.group_size, "Rollouts expected per group");
  reward->add_option("--tag-iou-threshold", s.tag_iou_threshold, "IoU at which a TAG rollout counts as correct");
  reward->add_option("--score-threshold", s.score_threshold, "Score at which a DAC/TAC rollout counts as correct");
  reward->add_option("--max-steps", s.max_steps, "Tool-call budget");

  auto* run = app.add_subcommand("run", "Drive think-with-audio sessions through a backend");
  session_flags(run, s);
  run->add_option("--max-steps", s.max_steps, "Tool-call budget per session");
  run->add_option("--timeline-downsample", s.timeline_downsample, "Decimation for the timeline pass");
  run->add_option("--crop-downsample", s.crop_downsample, "Decimation for cropped clips");

  auto* chunk = app.add_subcommand("chunk-eval", "Sliding-window baseline over 60 s chunks");
  session_flags(chunk, s);

  auto* qc = app.add_subcommand("qc", "Annotation quality statistics");
  qc->add_option("paths", s.paths, "Annotation or task-instance files or directories")->required();
  qc->add_option("--agreement", s.agreement_path, "Multi-annotator agreement input");
  qc->add_option("--agreement-threshold", s.agreement_threshold, "Caption agreement threshold");

  auto* report = app.add_subcommand("report", "Render report JSON as markdown");
  report->add_option("paths", s.paths, "Report files")->required();
  report->add_option("--markdown", s.markdown_path, "Write here instead of stdout");

  for (auto* sub : {validate, eval, reward, run, chunk, qc}) common_flags(sub, s, thresholds);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "latkit: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
    return kExitEnvironment;
  }

  try {
    if (!thresholds.empty()) s.thresholds = cli::parse_threshold_list(thresholds);
    cli::apply_config(s);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "validate") return cli::cmd_validate(s, out, err);
    if (name == "eval") return cli::cmd_eval(s, out, err);
    if (name == "reward") return cli::cmd_reward(s, out, err);
    if (name == "run") return cli::cmd_run(s, out, err);
    if (name == "chunk-eval") return cli::cmd_chunk_eval(s, out, err);
    if (name == "qc") return cli::cmd_qc(s, out, err);
    return cli::cmd_report(s, out, err);
  } catch (const cli::IoFailure& e) {
    err << "latkit: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const cli::CheckFailure& e) {
    err << "latkit: " << e.what() << "\n";
    return kExitFailure;
  } catch (const AudioError& e) {
    err << "latkit: " << e.what() << "\n";
    return e.kind() == AudioError::Kind::kIo ? kExitEnvironment : kExitFailure;
  } catch (const Error& e) {
    err << "latkit: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace latkit
