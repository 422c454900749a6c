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

#include <map>
#include <ostream>
#include <set>

#include "commands.hpp"
#include "latkit/errors.hpp"

namespace latkit::cli {

namespace {

std::vector<TaskInstance> load_instances(const std::string& path, const std::string& task) {
  std::vector<TaskInstance> all;
  try {
    all = parse_task_instances(read_file(path));
  } catch (const Error& e) {
    throw CheckFailure(path + ": " + e.what());
  }
  if (task.empty()) return all;
  TaskKind kind;
  try {
    kind = parse_task_kind(task);
  } catch (const Error& e) {
    throw CheckFailure(e.what());
  }
  std::vector<TaskInstance> out;
  for (auto& t : all) {
    if (t.task_kind == kind) out.push_back(std::move(t));
  }
  if (out.empty()) throw CheckFailure(path + ": no " + task + " instances");
  return out;
}

// {"predictions": [{"id", "answer"}]} or a bare array of such entries.
std::map<std::string, json> load_predictions(const std::string& path) {
  const json doc = read_json(path);
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("predictions")) throw CheckFailure(path + ": missing required key predictions");
    list = &doc["predictions"];
  }
  if (!list->is_array()) throw CheckFailure(path + ": predictions must be an array");
  std::map<std::string, json> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& e = (*list)[i];
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string()) {
      throw CheckFailure(path + ": predictions[" + std::to_string(i) + "]: expected an object with a string id");
    }
    const std::string id = e["id"].get<std::string>();
    if (!out.emplace(id, e.contains("answer") ? e["answer"] : json(nullptr)).second) {
      throw CheckFailure(path + ": duplicate prediction id '" + id + "'");
    }
  }
  return out;
}

}  // namespace

int cmd_eval(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto instances = load_instances(s.gt_path, s.task);
  const auto preds = load_predictions(s.pred_path);
  const auto scorer = open_scorer(s);

  Manifest manifest{"eval"};
  manifest.add_input(s.gt_path);
  manifest.add_input(s.pred_path);
  manifest.config["scorer"] = scorer->id();
  if (!s.task.empty()) manifest.config["task"] = s.task;

  std::vector<SampleScore> samples(instances.size());
  parallel_for(instances.size(), s.workers, [&](std::size_t i) {
    const auto& inst = instances[i];
    std::optional<TaskAnswer> answer;
    if (auto it = preds.find(inst.id); it != preds.end()) answer = answer_from_json(it->second, inst.task_kind);
    samples[i] = score_sample(inst, answer, *scorer, s.thresholds);
  });

  std::set<std::string> known;
  for (const auto& t : instances) known.insert(t.id);
  json unmatched = json::array();
  for (const auto& [id, _] : preds) {
    if (!known.count(id)) unmatched.push_back(id);
  }

  const auto reports = corpus_reports(instances, samples, s.thresholds);
  json rj = json::array();
  for (const auto& r : reports) rj.push_back(corpus_json(r));
  json report{{"kind", "eval"},
              {"manifest", manifest.to_json(s)},
              {"reports", std::move(rj)},
              {"unmatched_predictions", unmatched}};
  emit(s, report, render_markdown(report), out);
  if (unmatched.size() > s.id_tolerance) {
    err << "eval: " << unmatched.size() << " prediction id(s) match no ground-truth instance\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace latkit::cli
