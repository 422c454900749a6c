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

#include "commands.hpp"
#include "latkit/errors.hpp"

namespace latkit::cli {

namespace {

struct Loaded {
  std::string source;
  std::string id;
  std::optional<Trajectory> trajectory;
  std::string error;
};

// A trajectory document, or {"trajectories": [...]}.
void load_trajectories(const fs::path& p, std::vector<Loaded>& out) {
  const std::string text = read_file(p);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    out.push_back({p.generic_string(), p.stem().string(), std::nullopt, std::string("malformed JSON: ") + e.what()});
    return;
  }
  std::vector<const json*> docs;
  if (doc.is_object() && doc.contains("trajectories") && doc["trajectories"].is_array()) {
    for (const auto& d : doc["trajectories"]) docs.push_back(&d);
  } else {
    docs.push_back(&doc);
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const json& d = *docs[i];
    Loaded l;
    l.source = p.generic_string() + (docs.size() > 1 ? "#" + std::to_string(i) : "");
    l.id = d.is_object() && d.contains("id") && d["id"].is_string() ? d["id"].get<std::string>() : p.stem().string();
    try {
      l.trajectory = trajectory_from_json(d);
    } catch (const Error& e) {
      l.error = e.what();
    }
    out.push_back(std::move(l));
  }
}

json breakdown_json(const RewardBreakdown& r) {
  json conv = json::array();
  for (bool b : r.convergence) conv.push_back(b);
  return json{{"format_reward", r.format_reward},
              {"task_reward", r.task_reward},
              {"total", r.total},
              {"metric", r.metric},
              {"convergence", std::move(conv)}};
}

}  // namespace

int cmd_reward(const Settings& s, std::ostream& out, std::ostream& err) {
  std::vector<TaskInstance> instances;
  try {
    instances = parse_task_instances(read_file(s.gt_path));
  } catch (const Error& e) {
    throw CheckFailure(s.gt_path + ": " + e.what());
  }
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& t : instances) by_id[t.id] = &t;

  std::vector<Loaded> loaded;
  Manifest manifest{"reward"};
  manifest.add_input(s.gt_path);
  for (const auto& p : expand_inputs(s.trajectory_paths)) {
    manifest.add_input(p);
    load_trajectories(p, loaded);
  }
  const auto scorer = open_scorer(s);
  manifest.config["scorer"] = scorer->id();
  manifest.config["group"] = s.group;
  manifest.config["tag_iou_threshold"] = s.tag_iou_threshold;
  manifest.config["score_threshold"] = s.score_threshold;

  std::vector<RewardBreakdown> rewards(loaded.size());
  std::vector<std::string> missing;
  for (const auto& l : loaded) {
    if (!by_id.count(l.id)) missing.push_back(l.id);
  }
  if (!missing.empty()) {
    for (const auto& id : missing) err << "reward: no instance with id '" << id << "'\n";
    return kExitFailure;
  }
  FormatOptions base;
  base.max_steps = s.max_steps;
  parallel_for(loaded.size(), s.workers, [&](std::size_t i) {
    if (!loaded[i].trajectory) return;  // unparseable: format 0, task 0
    const TaskInstance& inst = *by_id.at(loaded[i].id);
    FormatOptions opts = base;
    opts.duration = inst.duration;
    rewards[i] = score_rollout(*loaded[i].trajectory, inst, *scorer, opts);
  });

  json rows = json::array();
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    json j{{"source", loaded[i].source}, {"id", loaded[i].id}};
    j.update(breakdown_json(rewards[i]));
    if (!loaded[i].error.empty()) j["error"] = loaded[i].error;
    rows.push_back(std::move(j));
  }
  json report{{"kind", "reward"}, {"manifest", manifest.to_json(s)}, {"rollouts", std::move(rows)}};

  int status = kExitOk;
  if (s.group) {
    std::vector<RolloutGroup> groups;
    std::map<std::string, std::size_t> slot;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      auto [it, fresh] = slot.emplace(loaded[i].id, groups.size());
      if (fresh) {
        groups.push_back({loaded[i].id, by_id.at(loaded[i].id)->task_kind, {}});
        members.emplace_back();
      }
      groups[it->second].rollouts.push_back({loaded[i].trajectory.value_or(Trajectory{}), rewards[i]});
      members[it->second].push_back(i);
    }
    json gj = json::array();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      json entry{{"instance_id", groups[g].instance_id}, {"size", groups[g].group_size()}};
      if (groups[g].group_size() != s.group_size) {
        err << "reward: group '" << groups[g].instance_id << "' has " << groups[g].group_size()
            << " rollouts, expected " << s.group_size << "\n";
        entry["error"] = "incomplete group";
        status = kExitFailure;
      } else {
        entry["advantages"] = group_advantages(groups[g]);
      }
      gj.push_back(std::move(entry));
    }
    report["groups"] = std::move(gj);
    if (status == kExitOk) {
      const CorrectnessThresholds th{s.tag_iou_threshold, s.score_threshold};
      json sel = json::array();
      for (const auto& picked : select_rl_data(groups, th, s.group_size)) {
        sel.push_back({{"instance_id", picked.instance_id},
                       {"correct", picked.correct},
                       {"trajectory", trajectory_to_json(picked.trajectory)}});
      }
      report["selected"] = std::move(sel);
    }
  }
  emit(s, report, render_markdown(report), out);
  return status;
}

}  // namespace latkit::cli
