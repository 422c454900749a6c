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
#include "latkit/qc.hpp"

namespace latkit::cli {

int cmd_qc(const Settings& s, std::ostream& out, std::ostream& err) {
  Manifest manifest{"qc"};
  std::vector<AnnotationSet> sets;
  std::vector<TaskInstance> instances;
  std::vector<std::string> skipped;
  for (const auto& p : expand_inputs(s.paths)) {
    manifest.add_input(p);
    const std::string text = read_file(p);
    try {
      const json doc = json::parse(text);
      if (doc.is_object() && doc.contains("tracks")) {
        sets.push_back(parse_annotation(text));
      } else if (doc.is_array() || (doc.is_object() && doc.contains("instances"))) {
        auto more = parse_task_instances(text);
        instances.insert(instances.end(), more.begin(), more.end());
      } else {
        skipped.push_back(p.generic_string() + ": not an annotation or task-instance document");
      }
    } catch (const json::parse_error& e) {
      skipped.push_back(p.generic_string() + ": malformed JSON");
    } catch (const Error& e) {
      skipped.push_back(p.generic_string() + ": " + e.what());
    }
  }

  QcReport r = qc_report(sets, instances);
  r.skipped = skipped;
  if (!s.agreement_path.empty()) {
    manifest.add_input(s.agreement_path);
    const auto scorer = open_scorer(s);
    manifest.config["scorer"] = scorer->id();
    try {
      add_agreement(r, read_json(s.agreement_path), *scorer, s.agreement_threshold);
    } catch (const Error& e) {
      throw CheckFailure(s.agreement_path + ": " + e.what());
    }
  }
  manifest.config["agreement_threshold"] = s.agreement_threshold;

  json report{{"kind", "qc"}, {"manifest", manifest.to_json(s)}};
  report.update(qc_to_json(r));
  emit(s, report, render_markdown(report), out);
  if (sets.empty() && instances.empty()) {
    err << "qc: no parseable annotation or task-instance files\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace latkit::cli
