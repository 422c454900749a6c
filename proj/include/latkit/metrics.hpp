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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latkit/annotation.hpp"
#include "latkit/scoring.hpp"
#include "latkit/temporal.hpp"

namespace latkit {

/// IoU thresholds shared by DAC Score@τ and TAG Recall@τ.
inline const std::vector<double> kDefaultThresholds = {0.3, 0.5, 0.7};

struct DacMatch {
  std::size_t gt_index = 0;
  std::optional<std::size_t> pred_index;
  double iou = 0.0;

  friend bool operator==(const DacMatch&, const DacMatch&) = default;
};

/// Best prediction per ground-truth segment by IoU; ties go to the lowest
/// index. One prediction may be the best match of several segments.
std::vector<DacMatch> match_dac(const std::vector<Interval>& gt, const std::vector<Interval>& pred);

struct DacScore {
  std::vector<double> thresholds;
  std::vector<double> per_threshold;
  double average = 0.0;
  std::vector<DacMatch> matches;
};

/// Per threshold, mean over ground-truth segments of scorer(gt caption, best
/// match caption) when the match clears the threshold, else 0. Scorer errors
/// propagate.
DacScore dac_score(const std::vector<CaptionSegment>& gt, const std::vector<CaptionSegment>& pred,
                   const SemanticScorer& scorer, const std::vector<double>& thresholds = kDefaultThresholds);

double tac_score(std::string_view gt_caption, std::string_view pred_caption, const SemanticScorer& scorer);

/// One row of a corpus report.
struct SampleScore {
  std::string id;
  bool parsed = true;   // prediction present and well-formed
  bool scored = true;   // false when the scorer failed; excluded from aggregates
  double value = 0.0;   // TAG: IoU; DAC: average; TAC: scorer value
  std::vector<double> per_threshold;  // DAC only
  std::string note;
};

struct CorpusReport {
  TaskKind task_kind = TaskKind::kTag;
  std::size_t n_samples = 0;
  std::size_t n_unscored = 0;
  std::vector<double> thresholds;
  std::vector<SampleScore> samples;
  /// Ordered (column, value) pairs using the results-table names: mIoU,
  /// Recall@τ for TAG; Score@τ and Avg_score for DAC; semantic for TAC.
  std::vector<std::pair<std::string, double>> aggregates;

  double aggregate(const std::string& column) const;
};

/// A missing prediction contributes IoU 0.
CorpusReport tag_corpus(const std::vector<std::pair<Interval, std::optional<Interval>>>& samples,
                        const std::vector<double>& thresholds = kDefaultThresholds);

/// Aggregates already-scored samples into a report (means over scored rows).
CorpusReport aggregate_corpus(TaskKind kind, std::vector<SampleScore> samples,
                              const std::vector<double>& thresholds = kDefaultThresholds);

/// "0.3" -> "Recall@0.3"-style column suffix.
std::string threshold_label(double tau);

}  // namespace latkit
