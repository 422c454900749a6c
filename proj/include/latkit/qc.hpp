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

#include <array>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "latkit/annotation.hpp"
#include "latkit/scoring.hpp"

namespace latkit {

/// Share of non-speech track entries with any part outside [0, duration].
/// Returns 0 when the corpus holds no non-speech entries.
double hallucination_rate(const std::vector<AnnotationSet>& sets);

/// Mean absolute endpoint deviation in milliseconds over index-aligned lists.
double timestamp_deviation(const std::vector<Interval>& reference, const std::vector<Interval>& hypothesis);

enum class AgreementOrder {
  kPairsThenSamples,  // mean over samples of the mean over annotator pairs
  kSamplesThenPairs,  // mean over pairs of the mean over samples
};

/// per_annotator[a][s] is annotator a's interval for sample s.
double pairwise_iou_agreement(const std::vector<std::vector<Interval>>& per_annotator,
                              AgreementOrder order = AgreementOrder::kPairsThenSamples);

/// Share of samples where every annotator pair scores at least `threshold`.
double caption_agreement_rate(const std::vector<std::vector<std::string>>& per_annotator,
                              const SemanticScorer& scorer, double threshold = 0.5);

struct DensityStats {
  double avg_events_per_sample = 0.0;
  double avg_event_duration_sec = 0.0;
};

DensityStats density_stats(const std::vector<TaskInstance>& dac_instances);

/// Indexed by PositionThird.
using PositionDistribution = std::array<double, 3>;

PositionDistribution position_distribution(const std::vector<TaskInstance>& instances);

struct QcGroup {
  std::string label;  // "all" or a language code
  std::size_t annotation_files = 0;
  std::size_t non_speech_entries = 0;
  std::optional<double> hallucination_rate;
  std::size_t dac_instances = 0;
  std::optional<DensityStats> density;
  std::size_t grounding_instances = 0;  // TAG and TAC
  std::optional<PositionDistribution> positions;
};

struct QcReport {
  std::vector<QcGroup> groups;  // "all" first, then languages in sorted order
  std::vector<std::string> skipped;  // inputs that parsed as neither format
  std::optional<double> mean_timestamp_deviation_ms;
  std::optional<double> iou_agreement;
  std::optional<double> iou_agreement_samples_first;
  std::optional<double> caption_agreement;
  double caption_agreement_threshold = 0.5;
};

/// Fills the deviation and agreement fields from a document of the form
/// {"reference": [...], "hypothesis": [...], "intervals": [[...], ...],
///  "captions": [[...], ...]} where intervals are {"start","end"} objects and
/// each inner list belongs to one annotator. Every key is optional.
void add_agreement(QcReport& report, const nlohmann::ordered_json& doc, const SemanticScorer& scorer,
                   double threshold);

/// Pooled and per-language statistics. Annotation files feed the
/// hallucination rate; DAC instances feed density; TAG/TAC instances feed the
/// position split. Sets or instances without a language count only in "all".
QcReport qc_report(const std::vector<AnnotationSet>& sets, const std::vector<TaskInstance>& instances);

nlohmann::ordered_json qc_to_json(const QcReport& r);

}  // namespace latkit
