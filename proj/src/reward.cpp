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

#include "latkit/reward.hpp"

#include <cmath>
#include <cstdlib>

#include "latkit/errors.hpp"

namespace latkit {

int format_reward(const Trajectory& t, TaskKind task_kind, const FormatOptions& opts) {
  return validate_format(t, task_kind, opts).ok ? 1 : 0;
}

TagTaskReward tag_task_reward(const Trajectory& t, const Interval& gt, TimePoint duration,
                              std::optional<TimePoint> initial_center) {
  TagTaskReward out;
  const auto answer = try_extract_answer(t, TaskKind::kTag);
  if (!answer) return out;
  out.iou = iou(std::get<Interval>(*answer), gt);

  const std::int64_t target = midpoint(gt).millis();
  std::int64_t prev = initial_center ? initial_center->millis() : duration.millis() / 2;
  std::size_t closer = 0;
  for (const auto& turn : t.turns) {
    const auto* call = turn.get<ToolCall>();
    if (call == nullptr) continue;
    std::int64_t center = prev;
    if (call->start_sec >= 0.0 && call->end_sec >= call->start_sec) {
      center = midpoint(Interval{TimePoint::from_seconds(call->start_sec), TimePoint::from_seconds(call->end_sec)})
                   .millis();
    }
    const bool improved = std::llabs(center - target) < std::llabs(prev - target);
    out.convergence.push_back(improved);
    if (improved) ++closer;
    prev = center;
  }
  const double convergence =
      out.convergence.empty() ? 0.0 : static_cast<double>(closer) / static_cast<double>(out.convergence.size());
  out.value = out.iou + convergence;
  return out;
}

double dac_task_reward(const Trajectory& t, const std::vector<CaptionSegment>& gt, const SemanticScorer& scorer,
                       const std::vector<double>& thresholds) {
  const auto answer = try_extract_answer(t, TaskKind::kDac);
  if (!answer) return 0.0;
  return dac_score(gt, std::get<std::vector<CaptionSegment>>(*answer), scorer, thresholds).average;
}

double tac_task_reward(const Trajectory& t, std::string_view gt_caption, const SemanticScorer& scorer) {
  const auto answer = try_extract_answer(t, TaskKind::kTac);
  if (!answer) return 0.0;
  return tac_score(gt_caption, std::get<std::string>(*answer), scorer);
}

RewardBreakdown score_rollout(const Trajectory& t, const TaskInstance& instance, const SemanticScorer& scorer,
                              const FormatOptions& opts) {
  RewardBreakdown r;
  r.format_reward = format_reward(t, instance.task_kind, opts);
  switch (instance.task_kind) {
    case TaskKind::kTag: {
      auto tr = tag_task_reward(t, instance.tag(), instance.duration);
      r.task_reward = tr.value;
      r.metric = tr.iou;
      r.convergence = std::move(tr.convergence);
      break;
    }
    case TaskKind::kDac:
      r.task_reward = dac_task_reward(t, instance.dac(), scorer);
      r.metric = r.task_reward;
      break;
    case TaskKind::kTac:
      r.task_reward = tac_task_reward(t, instance.tac(), scorer);
      r.metric = r.task_reward;
      break;
  }
  r.total = r.format_reward + r.task_reward;
  return r;
}

std::vector<double> group_advantages(const std::vector<double>& totals) {
  if (totals.size() < 2) throw ContractError("group_advantages: group size must be at least 2");
  const double n = static_cast<double>(totals.size());
  double mean = 0.0;
  for (double x : totals) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : totals) var += (x - mean) * (x - mean);
  var /= n;
  const double sd = std::sqrt(var);
  std::vector<double> adv(totals.size(), 0.0);
  // Rounding in the mean leaves a tiny spread on constant groups.
  if (sd <= 1e-12 * std::max(1.0, std::fabs(mean))) return adv;
  for (std::size_t k = 0; k < totals.size(); ++k) adv[k] = (totals[k] - mean) / sd;
  return adv;
}

std::vector<double> group_advantages(const RolloutGroup& g) {
  std::vector<double> totals;
  totals.reserve(g.rollouts.size());
  for (const auto& r : g.rollouts) totals.push_back(r.reward.total);
  return group_advantages(totals);
}

bool is_correct(const Rollout& r, TaskKind kind, const CorrectnessThresholds& th) {
  if (r.reward.format_reward != 1) return false;
  return r.reward.metric >= (kind == TaskKind::kTag ? th.tag_iou : th.score);
}

std::vector<SelectedTrajectory> select_rl_data(const std::vector<RolloutGroup>& groups,
                                               const CorrectnessThresholds& th, std::size_t expected_group_size) {
  std::vector<SelectedTrajectory> out;
  for (const auto& g : groups) {
    if (expected_group_size != 0 && g.group_size() != expected_group_size) {
      throw ContractError("select_rl_data: group '" + g.instance_id + "' has " + std::to_string(g.group_size()) +
                          " rollouts, expected " + std::to_string(expected_group_size));
    }
    const Rollout* best_correct = nullptr;
    const Rollout* worst_incorrect = nullptr;
    for (const auto& r : g.rollouts) {
      if (is_correct(r, g.task_kind, th)) {
        if (best_correct == nullptr || r.reward.total > best_correct->reward.total) best_correct = &r;
      } else if (worst_incorrect == nullptr || r.reward.total < worst_incorrect->reward.total) {
        worst_incorrect = &r;
      }
    }
    if (best_correct == nullptr || worst_incorrect == nullptr) continue;
    out.push_back({g.instance_id, true, best_correct->trajectory});
    out.push_back({g.instance_id, false, worst_incorrect->trajectory});
  }
  return out;
}

}  // namespace latkit
