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

#include "latkit/qc.hpp"

#include <cmath>
#include <set>

#include "latkit/errors.hpp"

namespace latkit {

using json = nlohmann::ordered_json;

namespace {

bool outside(const Interval& iv, TimePoint duration) { return iv.start > duration || iv.end > duration; }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void check_annotators(std::size_t n, const char* who) {
  if (n < 2) throw ContractError(std::string(who) + ": at least two annotators required");
}

Interval interval_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("start") || !j.contains("end") || !j["start"].is_string() ||
      !j["end"].is_string()) {
    throw SchemaError(where + ": expected {\"start\", \"end\"} timestamps");
  }
  Interval iv{parse_timestamp(j["start"].get<std::string>()), parse_timestamp(j["end"].get<std::string>())};
  if (!iv.valid()) throw RangeError(where + ": start exceeds end");
  return iv;
}

std::vector<Interval> interval_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(interval_from(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

double hallucination_rate(const std::vector<AnnotationSet>& sets) {
  if (sets.empty()) throw ContractError("hallucination_rate: at least one annotation set required");
  std::size_t total = 0, bad = 0;
  for (const auto& a : sets) {
    for (Track t : {Track::kEvents, Track::kMusic, Track::kBackground}) {
      for (const auto& e : a.non_speech(t)) {
        ++total;
        if (outside(e.interval, a.duration)) ++bad;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(total);
}

double timestamp_deviation(const std::vector<Interval>& reference, const std::vector<Interval>& hypothesis) {
  if (reference.size() != hypothesis.size()) {
    throw ContractError("timestamp_deviation: " + std::to_string(reference.size()) + " reference vs " +
                        std::to_string(hypothesis.size()) + " hypothesis intervals");
  }
  if (reference.empty()) return 0.0;
  // Integer sum: exact for any realistic corpus.
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    sum += std::llabs(reference[i].start.millis() - hypothesis[i].start.millis());
    sum += std::llabs(reference[i].end.millis() - hypothesis[i].end.millis());
  }
  return static_cast<double>(sum) / static_cast<double>(2 * reference.size());
}

double pairwise_iou_agreement(const std::vector<std::vector<Interval>>& per_annotator, AgreementOrder order) {
  check_annotators(per_annotator.size(), "pairwise_iou_agreement");
  const std::size_t n = per_annotator.front().size();
  for (const auto& a : per_annotator) {
    if (a.size() != n) throw ContractError("pairwise_iou_agreement: annotators cover different sample counts");
  }
  if (n == 0) throw ContractError("pairwise_iou_agreement: no samples");
  const std::size_t m = per_annotator.size();
  if (order == AgreementOrder::kPairsThenSamples) {
    std::vector<double> per_sample;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<double> pairs;
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) pairs.push_back(iou(per_annotator[a][s], per_annotator[b][s]));
      }
      per_sample.push_back(mean(pairs));
    }
    return mean(per_sample);
  }
  std::vector<double> per_pair;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      std::vector<double> samples;
      for (std::size_t s = 0; s < n; ++s) samples.push_back(iou(per_annotator[a][s], per_annotator[b][s]));
      per_pair.push_back(mean(samples));
    }
  }
  return mean(per_pair);
}

double caption_agreement_rate(const std::vector<std::vector<std::string>>& per_annotator,
                              const SemanticScorer& scorer, double threshold) {
  check_annotators(per_annotator.size(), "caption_agreement_rate");
  const std::size_t n = per_annotator.front().size();
  for (const auto& a : per_annotator) {
    if (a.size() != n) throw ContractError("caption_agreement_rate: annotators cover different sample counts");
  }
  if (n == 0) throw ContractError("caption_agreement_rate: empty corpus");
  std::size_t agreed = 0;
  for (std::size_t s = 0; s < n; ++s) {
    bool all = true;
    for (std::size_t a = 0; a < per_annotator.size() && all; ++a) {
      for (std::size_t b = a + 1; b < per_annotator.size() && all; ++b) {
        all = scorer.score(per_annotator[a][s], per_annotator[b][s]) >= threshold;
      }
    }
    if (all) ++agreed;
  }
  return static_cast<double>(agreed) / static_cast<double>(n);
}

DensityStats density_stats(const std::vector<TaskInstance>& dac_instances) {
  if (dac_instances.empty()) throw ContractError("density_stats: at least one instance required");
  std::size_t events = 0;
  std::int64_t total_ms = 0;
  for (const auto& t : dac_instances) {
    if (t.task_kind != TaskKind::kDac) throw ContractError("density_stats: instance '" + t.id + "' is not DAC");
    for (const auto& c : t.dac()) {
      ++events;
      total_ms += c.interval.length_millis();
    }
  }
  DensityStats d;
  d.avg_events_per_sample = static_cast<double>(events) / static_cast<double>(dac_instances.size());
  d.avg_event_duration_sec = events == 0 ? 0.0 : static_cast<double>(total_ms) / 1000.0 / static_cast<double>(events);
  return d;
}

PositionDistribution position_distribution(const std::vector<TaskInstance>& instances) {
  if (instances.empty()) throw ContractError("position_distribution: at least one instance required");
  std::array<std::size_t, 3> counts{};
  for (const auto& t : instances) {
    Interval iv;
    if (t.task_kind == TaskKind::kTag) {
      iv = t.tag();
    } else if (t.task_kind == TaskKind::kTac) {
      iv = *t.target_interval;
    } else {
      throw ContractError("position_distribution: instance '" + t.id + "' has no target interval");
    }
    ++counts[static_cast<std::size_t>(classify_third(iv, t.duration))];
  }
  PositionDistribution out{};
  for (std::size_t k = 0; k < 3; ++k) {
    out[k] = static_cast<double>(counts[k]) / static_cast<double>(instances.size());
  }
  return out;
}

QcReport qc_report(const std::vector<AnnotationSet>& sets, const std::vector<TaskInstance>& instances) {
  std::set<std::string> languages;
  for (const auto& a : sets) {
    if (!a.language.empty()) languages.insert(a.language);
  }
  for (const auto& t : instances) {
    if (!t.language.empty()) languages.insert(t.language);
  }
  auto build = [&](const std::string& label, const std::optional<std::string>& lang) {
    QcGroup g;
    g.label = label;
    std::vector<AnnotationSet> s;
    for (const auto& a : sets) {
      if (!lang || a.language == *lang) s.push_back(a);
    }
    std::vector<TaskInstance> dac, grounding;
    for (const auto& t : instances) {
      if (lang && t.language != *lang) continue;
      (t.task_kind == TaskKind::kDac ? dac : grounding).push_back(t);
    }
    g.annotation_files = s.size();
    for (const auto& a : s) {
      g.non_speech_entries += a.events.size() + a.music.size() + a.background.size();
    }
    if (!s.empty()) g.hallucination_rate = hallucination_rate(s);
    g.dac_instances = dac.size();
    if (!dac.empty()) g.density = density_stats(dac);
    g.grounding_instances = grounding.size();
    if (!grounding.empty()) g.positions = position_distribution(grounding);
    return g;
  };
  QcReport r;
  r.groups.push_back(build("all", std::nullopt));
  for (const auto& l : languages) r.groups.push_back(build(l, l));
  return r;
}

void add_agreement(QcReport& report, const json& doc, const SemanticScorer& scorer, double threshold) {
  if (!doc.is_object()) throw SchemaError("agreement: expected an object");
  if (doc.contains("reference") || doc.contains("hypothesis")) {
    if (!doc.contains("reference") || !doc.contains("hypothesis")) {
      throw SchemaError("agreement: reference and hypothesis must be given together");
    }
    report.mean_timestamp_deviation_ms =
        timestamp_deviation(interval_list(doc["reference"], "reference"), interval_list(doc["hypothesis"], "hypothesis"));
  }
  if (doc.contains("intervals")) {
    const json& j = doc["intervals"];
    if (!j.is_array()) throw SchemaError("intervals: expected an array of annotator lists");
    std::vector<std::vector<Interval>> per;
    for (std::size_t a = 0; a < j.size(); ++a) per.push_back(interval_list(j[a], "intervals[" + std::to_string(a) + "]"));
    report.iou_agreement = pairwise_iou_agreement(per, AgreementOrder::kPairsThenSamples);
    report.iou_agreement_samples_first = pairwise_iou_agreement(per, AgreementOrder::kSamplesThenPairs);
  }
  if (doc.contains("captions")) {
    const json& j = doc["captions"];
    if (!j.is_array()) throw SchemaError("captions: expected an array of annotator lists");
    std::vector<std::vector<std::string>> per;
    for (const auto& list : j) {
      if (!list.is_array()) throw SchemaError("captions: expected an array of annotator lists");
      std::vector<std::string> caps;
      for (const auto& c : list) {
        if (!c.is_string()) throw SchemaError("captions: expected strings");
        caps.push_back(c.get<std::string>());
      }
      per.push_back(std::move(caps));
    }
    report.caption_agreement = caption_agreement_rate(per, scorer, threshold);
    report.caption_agreement_threshold = threshold;
  }
}

json qc_to_json(const QcReport& r) {
  json groups = json::array();
  for (const auto& g : r.groups) {
    json j;
    j["group"] = g.label;
    j["annotation_files"] = g.annotation_files;
    j["non_speech_entries"] = g.non_speech_entries;
    j["hallucination_rate"] = g.hallucination_rate ? json(*g.hallucination_rate) : json(nullptr);
    j["dac_instances"] = g.dac_instances;
    j["Avg. Evt."] = g.density ? json(g.density->avg_events_per_sample) : json(nullptr);
    j["Avg. Evt. Dur (s)"] = g.density ? json(g.density->avg_event_duration_sec) : json(nullptr);
    j["grounding_instances"] = g.grounding_instances;
    for (std::size_t k = 0; k < 3; ++k) {
      const char* name = to_string(static_cast<PositionThird>(k));
      j[name] = g.positions ? json((*g.positions)[k]) : json(nullptr);
    }
    groups.push_back(std::move(j));
  }
  json out;
  out["groups"] = std::move(groups);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  out["mean_timestamp_deviation_ms"] = opt(r.mean_timestamp_deviation_ms);
  out["iou_agreement"] = opt(r.iou_agreement);
  out["iou_agreement_samples_first"] = opt(r.iou_agreement_samples_first);
  out["caption_agreement"] = opt(r.caption_agreement);
  out["caption_agreement_threshold"] = r.caption_agreement_threshold;
  out["skipped"] = r.skipped;
  return out;
}

}  // namespace latkit
