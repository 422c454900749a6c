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
#include "latkit/errors.hpp"

namespace latkit::cli {

namespace {

struct Finding {
  std::string path;
  std::string where;
  std::string kind;
  std::string detail;
  bool warning = false;
};

void check_trajectory(const fs::path& p, const std::string& text, std::vector<Finding>& out) {
  Trajectory t;
  try {
    t = parse_trajectory(text);
  } catch (const Error& e) {
    out.push_back({p.generic_string(), "document", "Unparseable", e.what()});
    return;
  }
  const auto kind = t.task_kind ? t.task_kind : infer_task_kind(t.prompt);
  if (!kind) {
    out.push_back({p.generic_string(), "prompt", "UnknownTask", "cannot infer the task; add a \"task\" key"});
    return;
  }
  const FormatCheck fc = validate_format(t, *kind);
  for (const auto& v : fc.violations) {
    out.push_back({p.generic_string(), "turn " + std::to_string(v.turn_index), to_string(v.kind), v.detail});
  }
  for (const auto& w : fc.warnings) out.push_back({p.generic_string(), "timeline", "Lint", w, true});
}

void check_annotation(const fs::path& p, const std::string& text, std::vector<Finding>& out) {
  AnnotationSet a;
  try {
    a = parse_annotation(text);
  } catch (const Error& e) {
    out.push_back({p.generic_string(), "document", "Unparseable", e.what()});
    return;
  }
  for (const auto& v : validate_annotation(a)) {
    out.push_back({p.generic_string(), location(v), to_string(v.kind), v.detail});
  }
}

void check_instances(const fs::path& p, const std::string& text, std::vector<Finding>& out) {
  try {
    (void)parse_task_instances(text);
  } catch (const Error& e) {
    out.push_back({p.generic_string(), "document", "Unparseable", e.what()});
  }
}

}  // namespace

int cmd_validate(const Settings& s, std::ostream& out, std::ostream&) {
  const auto files = expand_inputs(s.paths);
  Manifest manifest{"validate"};
  std::vector<Finding> findings;
  for (const auto& p : files) {
    manifest.add_input(p);
    const std::string text = read_file(p);
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      findings.push_back({p.generic_string(), "document", "Unparseable", e.what()});
      continue;
    }
    if (doc.is_object() && doc.contains("messages")) {
      check_trajectory(p, text, findings);
    } else if (doc.is_object() && doc.contains("tracks")) {
      check_annotation(p, text, findings);
    } else if (doc.is_array() || (doc.is_object() && doc.contains("instances"))) {
      check_instances(p, text, findings);
    } else {
      findings.push_back({p.generic_string(), "document", "Unrecognized",
                          "not a trajectory, annotation or task-instance document"});
    }
  }

  std::size_t violations = 0;
  json listing = json::array();
  std::string md = "| File | Location | Kind | Detail |\n|---|---|---|---|\n";
  for (const auto& f : findings) {
    if (!f.warning) ++violations;
    listing.push_back({{"path", f.path}, {"location", f.where}, {"kind", f.kind}, {"detail", f.detail},
                       {"severity", f.warning ? "warning" : "error"}});
    md += "| " + f.path + " | " + f.where + " | " + f.kind + " | " + f.detail + " |\n";
  }
  if (s.out_path.empty()) {
    // Plain listing on stdout; the JSON document goes to --out when asked for.
    for (const auto& f : findings) {
      out << f.path << ": " << (f.warning ? "warning: " : "") << f.where << ": " << f.kind << ": " << f.detail << "\n";
    }
    out << files.size() << " file(s), " << violations << " violation(s)\n";
  }
  json report{{"kind", "validate"},
              {"manifest", manifest.to_json(s)},
              {"files", files.size()},
              {"violations", violations},
              {"findings", std::move(listing)}};
  if (!s.out_path.empty()) write_file(s.out_path, report.dump(2) + "\n");
  if (!s.markdown_path.empty()) write_file(s.markdown_path, md);
  return violations == 0 ? kExitOk : kExitFailure;
}

}  // namespace latkit::cli
