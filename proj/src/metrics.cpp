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

#include "latkit/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "latkit/errors.hpp"
#include "latkit/kernels.hpp"

namespace latkit {

namespace {

void check_thresholds(const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw ContractError("at least one IoU threshold is required");
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) throw ContractError("IoU thresholds must lie in [0, 1]");
  }
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string threshold_label(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", tau);
  return buf;
}

std::vector<DacMatch> match_dac(const std::vector<Interval>& gt, const std::vector<Interval>& pred) {
  if (gt.empty()) throw ContractError("match_dac: ground truth must be non-empty");
  std::vector<double> starts(pred.size()), ends(pred.size()), ious(pred.size());
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (!pred[j].valid()) throw ContractError("match_dac: prediction start exceeds end");
    starts[j] = static_cast<double>(pred[j].start.millis());
    ends[j] = static_cast<double>(pred[j].end.millis());
  }
  std::vector<DacMatch> out;
  out.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].valid()) throw ContractError("match_dac: ground-truth start exceeds end");
    DacMatch m{i, std::nullopt, 0.0};
    if (!pred.empty()) {
      kernels::iou_one_to_many(static_cast<double>(gt[i].start.millis()), static_cast<double>(gt[i].end.millis()),
                               starts, ends, ious);
      const auto best = std::max_element(ious.begin(), ious.end());  // first maximum on ties
      m.pred_index = static_cast<std::size_t>(best - ious.begin());
      m.iou = *best;
    }
    out.push_back(m);
  }
  return out;
}

DacScore dac_score(const std::vector<CaptionSegment>& gt, const std::vector<CaptionSegment>& pred,
                   const SemanticScorer& scorer, const std::vector<double>& thresholds) {
  check_thresholds(thresholds);
  std::vector<Interval> gi, pi;
  gi.reserve(gt.size());
  pi.reserve(pred.size());
  for (const auto& g : gt) gi.push_back(g.interval);
  for (const auto& p : pred) pi.push_back(p.interval);

  DacScore out;
  out.thresholds = thresholds;
  out.matches = match_dac(gi, pi);
  out.per_threshold.assign(thresholds.size(), 0.0);
  const double min_tau = *std::min_element(thresholds.begin(), thresholds.end());
  for (const auto& m : out.matches) {
    if (!m.pred_index || m.iou < min_tau) continue;
    const double s = scorer.score(gt[m.gt_index].caption, pred[*m.pred_index].caption);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (m.iou >= thresholds[k]) out.per_threshold[k] += s;
    }
  }
  for (double& v : out.per_threshold) v /= static_cast<double>(gt.size());
  out.average = mean(out.per_threshold);
  return out;
}

double tac_score(std::string_view gt_caption, std::string_view pred_caption, const SemanticScorer& scorer) {
  if (gt_caption.empty()) throw ContractError("tac_score: ground-truth caption must be non-empty");
  return scorer.score(gt_caption, pred_caption);
}

double CorpusReport::aggregate(const std::string& column) const {
  for (const auto& [name, value] : aggregates) {
    if (name == column) return value;
  }
  throw ContractError("report has no column '" + column + "'");
}

CorpusReport tag_corpus(const std::vector<std::pair<Interval, std::optional<Interval>>>& samples,
                        const std::vector<double>& thresholds) {
  if (samples.empty()) throw ContractError("tag_corpus: at least one sample required");
  std::vector<SampleScore> rows;
  rows.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SampleScore s;
    s.id = std::to_string(i);
    s.parsed = samples[i].second.has_value();
    s.value = s.parsed ? iou(samples[i].first, *samples[i].second) : 0.0;
    rows.push_back(std::move(s));
  }
  return aggregate_corpus(TaskKind::kTag, std::move(rows), thresholds);
}

CorpusReport aggregate_corpus(TaskKind kind, std::vector<SampleScore> samples,
                              const std::vector<double>& thresholds) {
  check_thresholds(thresholds);
  CorpusReport r;
  r.task_kind = kind;
  r.thresholds = thresholds;
  r.n_samples = samples.size();
  std::vector<const SampleScore*> scored;
  for (const auto& s : samples) {
    if (s.scored) {
      scored.push_back(&s);
    } else {
      ++r.n_unscored;
    }
  }
  const double n = static_cast<double>(scored.size());
  auto avg = [&](auto&& f) {
    if (scored.empty()) return 0.0;
    double acc = 0.0;
    for (const SampleScore* s : scored) acc += f(*s);
    return acc / n;
  };
  switch (kind) {
    case TaskKind::kTag: {
      r.aggregates.emplace_back("mIoU", avg([](const SampleScore& s) { return s.value; }));
      for (double tau : thresholds) {
        r.aggregates.emplace_back("Recall@" + threshold_label(tau),
                                  avg([tau](const SampleScore& s) { return s.value >= tau ? 1.0 : 0.0; }));
      }
      break;
    }
    case TaskKind::kDac: {
      for (std::size_t k = 0; k < thresholds.size(); ++k) {
        r.aggregates.emplace_back("Score@" + threshold_label(thresholds[k]), avg([k](const SampleScore& s) {
                                    return k < s.per_threshold.size() ? s.per_threshold[k] : 0.0;
                                  }));
      }
      r.aggregates.emplace_back("Avg_score", avg([](const SampleScore& s) { return s.value; }));
      break;
    }
    case TaskKind::kTac:
      r.aggregates.emplace_back("semantic", avg([](const SampleScore& s) { return s.value; }));
      break;
  }
  r.samples = std::move(samples);
  return r;
}

}  // namespace latkit
