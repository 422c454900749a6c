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
#include "latkit/qc.hpp"

namespace latkit::cli {

namespace {

std::string num(const json& v, int digits = 4) {
  if (v.is_number()) return fixed(v.get<double>(), digits);
  return "-";
}

std::string pct(const json& v) {
  if (v.is_number()) return fixed(100.0 * v.get<double>(), 2) + "%";
  return "-";
}

std::string corpus_tables(const json& reports) {
  std::string md;
  for (const auto& r : reports) {
    std::string head = "| Task | N |", rule = "|---|---|";
    std::string row = "| " + r.value("task", std::string("?")) + " | " +
                      std::to_string(r.value("n_samples", 0) - r.value("n_unscored", 0)) + " |";
    for (auto it = r["aggregates"].begin(); it != r["aggregates"].end(); ++it) {
      head += " " + it.key() + " |";
      rule += "---|";
      row += " " + num(it.value()) + " |";
    }
    md += head + "\n" + rule + "\n" + row + "\n\n";
  }
  return md;
}

std::string manifest_block(const json& m) {
  std::string md = "Command `" + m.value("command", std::string("?")) + "`, latkit " +
                   m.value("tool_version", std::string("?")) + ", " + m.value("timestamp", std::string("?")) + ".\n";
  if (m.contains("inputs") && !m["inputs"].empty()) {
    md += "\n| Input | SHA-256 |\n|---|---|\n";
    for (const auto& in : m["inputs"]) {
      md += "| " + in.value("path", std::string()) + " | `" + in.value("sha256", std::string()).substr(0, 16) + "` |\n";
    }
  }
  return md;
}

}  // namespace

std::string render_markdown(const json& report) {
  const std::string kind = report.value("kind", std::string());
  std::string md = "# latkit " + kind + " report\n\n";
  if (kind == "eval" || kind == "run" || kind == "chunk-eval") {
    md += corpus_tables(report["reports"]);
  }
  if (kind == "eval" && !report["unmatched_predictions"].empty()) {
    md += "Unmatched prediction ids: " + std::to_string(report["unmatched_predictions"].size()) + "\n\n";
  }
  if (kind == "run") {
    md += "| Instance | Task | Termination | Tool calls | Format | Task reward |\n|---|---|---|---|---|---|\n";
    for (const auto& sj : report["sessions"]) {
      md += "| " + sj["id"].get<std::string>() + " | " + sj["task"].get<std::string>() + " | " +
            sj["termination"].get<std::string>() + " | " + std::to_string(sj["tool_calls"].get<int>()) + " | " +
            std::to_string(sj["format_reward"].get<int>()) + " | " + num(sj["task_reward"]) + " |\n";
    }
    md += "\n";
  }
  if (kind == "chunk-eval" && !report["flags"].empty()) {
    md += "| Instance | Chunk | Flag |\n|---|---|---|\n";
    for (const auto& f : report["flags"]) {
      md += "| " + f["id"].get<std::string>() + " | " + std::to_string(f["chunk"].get<int>()) + " | " +
            f["detail"].get<std::string>() + " |\n";
    }
    md += "\n";
  }
  if (kind == "reward") {
    md += "| Source | Instance | Format | Task | Total |\n|---|---|---|---|---|\n";
    for (const auto& r : report["rollouts"]) {
      md += "| " + r["source"].get<std::string>() + " | " + r["id"].get<std::string>() + " | " +
            std::to_string(r["format_reward"].get<int>()) + " | " + num(r["task_reward"]) + " | " + num(r["total"]) +
            " |\n";
    }
    md += "\n";
    if (report.contains("selected")) {
      md += "Selected for RL: " + std::to_string(report["selected"].size()) + " trajectories.\n\n";
    }
  }
  if (kind == "qc") {
    md += "| Group | Files | Hallucination | Instances | Avg. Evt. | Avg. Evt. Dur (s) | Start | Middle | End |\n";
    md += "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& g : report["groups"]) {
      md += "| " + g["group"].get<std::string>() + " | " + std::to_string(g["annotation_files"].get<int>()) + " | " +
            pct(g["hallucination_rate"]) + " | " +
            std::to_string(g["dac_instances"].get<int>() + g["grounding_instances"].get<int>()) + " | " +
            num(g["Avg. Evt."], 2) + " | " + num(g["Avg. Evt. Dur (s)"], 2) + " | " + pct(g["Start"]) + " | " +
            pct(g["Middle"]) + " | " + pct(g["End"]) + " |\n";
    }
    md += "\n";
    if (report["mean_timestamp_deviation_ms"].is_number()) {
      md += "- Mean timestamp deviation (ms): " + num(report["mean_timestamp_deviation_ms"], 1) + "\n";
    }
    if (report["iou_agreement"].is_number()) {
      md += "- IoU agreement: " + num(report["iou_agreement"]) + " (pairs within sample, then samples), " +
            num(report["iou_agreement_samples_first"]) + " (samples within pair, then pairs)\n";
    }
    if (report["caption_agreement"].is_number()) {
      md += "- Caption agreement rate at threshold " + num(report["caption_agreement_threshold"], 2) + ": " +
            num(report["caption_agreement"]) + "\n";
    }
    for (const auto& sk : report["skipped"]) md += "- skipped " + sk.get<std::string>() + "\n";
    md += "\n";
  }
  if (kind == "validate") {
    md += std::to_string(report["files"].get<int>()) + " file(s), " + std::to_string(report["violations"].get<int>()) +
          " violation(s).\n\n";
  }
  if (report.contains("manifest")) md += manifest_block(report["manifest"]);
  return md;
}

int cmd_report(const Settings& s, std::ostream& out, std::ostream&) {
  std::string md;
  for (const auto& p : expand_inputs(s.paths)) {
    const json doc = read_json(p);
    if (!doc.is_object() || !doc.contains("kind")) throw CheckFailure(p.string() + ": not a latkit report");
    md += render_markdown(doc);
  }
  if (s.markdown_path.empty()) {
    out << md;
  } else {
    write_file(s.markdown_path, md);
  }
  return kExitOk;
}

}  // namespace latkit::cli
