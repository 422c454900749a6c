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

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "latkit/annotation.hpp"
#include "latkit/cli.hpp"
#include "latkit/metrics.hpp"
#include "latkit/reward.hpp"
#include "latkit/scoring.hpp"
#include "latkit/trajectory.hpp"

namespace latkit::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Missing or unreadable input: maps to exit status 2.
struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad content or a failed check: maps to exit status 1.
struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every knob a command may read. A --config document overrides these after
/// the command line is parsed.
struct Settings {
  std::string config_path;
  std::string timestamp;
  std::vector<double> thresholds = kDefaultThresholds;
  std::string scorer = "builtin";
  int workers = 1;

  // run / chunk-eval
  std::string instances_path;
  std::string audio_dir;
  bool silent_audio = false;
  std::string backend = "oracle";
  bool send_pcm = false;
  int max_steps = kDefaultMaxSteps;
  int timeline_downsample = 2;
  int crop_downsample = 1;

  // eval
  std::string task;
  std::string gt_path;
  std::string pred_path;
  std::size_t id_tolerance = 0;

  // reward
  std::vector<std::string> trajectory_paths;
  bool group = false;
  std::size_t group_size = kDefaultGroupSize;
  double tag_iou_threshold = 0.5;
  double score_threshold = 0.5;

  // qc
  std::string agreement_path;
  double agreement_threshold = 0.5;

  // validate / qc / report
  std::vector<std::string> paths;

  std::string out_path;       // JSON report; stdout when empty
  std::string markdown_path;  // optional markdown rendering
  std::string out_dir;        // run / chunk-eval artifacts
};

/// Applies --config overrides. Unknown keys are errors.
void apply_config(Settings& s);

std::string read_file(const fs::path& p);
void write_file(const fs::path& p, const std::string& content);
json read_json(const fs::path& p);

/// Regular files under each path (directories recursively, *.json only), sorted.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& paths, const std::string& extension = ".json");

std::string sha256_hex(const std::string& bytes);

struct Manifest {
  explicit Manifest(std::string cmd) : command(std::move(cmd)) {}

  std::string command;
  json config = json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256

  void add_input(const fs::path& p);
  json to_json(const Settings& s) const;
};

/// ISO-8601 UTC: --timestamp, else SOURCE_DATE_EPOCH, else the current time.
std::string resolve_timestamp(const Settings& s);

/// Emits `report` (JSON) to --out or `out`, and `markdown` to --markdown.
void emit(const Settings& s, const json& report, const std::string& markdown, std::ostream& out);

std::vector<double> parse_threshold_list(const std::string& text);

/// Runs body(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

std::unique_ptr<SemanticScorer> open_scorer(const Settings& s);

/// Scores one prediction against its instance. A missing answer scores 0.
SampleScore score_sample(const TaskInstance& instance, const std::optional<TaskAnswer>& answer,
                         const SemanticScorer& scorer, const std::vector<double>& thresholds);

/// Per-task corpus reports for instances in input order.
json corpus_json(const CorpusReport& r);

std::vector<CorpusReport> corpus_reports(const std::vector<TaskInstance>& instances,
                                         const std::vector<SampleScore>& samples,
                                         const std::vector<double>& thresholds);

/// Answer as written in prediction files.
json answer_to_json(const TaskAnswer& a);
std::optional<TaskAnswer> answer_from_json(const json& j, TaskKind kind);

std::string fixed(double v, int digits = 4);

}  // namespace latkit::cli
