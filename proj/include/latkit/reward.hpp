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
#include <vector>

#include "latkit/annotation.hpp"
#include "latkit/metrics.hpp"
#include "latkit/scoring.hpp"
#include "latkit/trajectory.hpp"

namespace latkit {

inline constexpr std::size_t kDefaultGroupSize = 8;

struct RewardBreakdown {
  int format_reward = 0;      // 0 or 1
  double task_reward = 0.0;   // TAG in [0, 2]; DAC/TAC in [0, 1]
  double total = 0.0;         // format_reward + task_reward
  /// Task metric behind the reward: TAG IoU, DAC average score, TAC score.
  double metric = 0.0;
  /// TAG only: whether crop i moved its midpoint closer to the target than crop i-1.
  std::vector<bool> convergence;
};

int format_reward(const Trajectory& t, TaskKind task_kind, const FormatOptions& opts = {});

struct TagTaskReward {
  double value = 0.0;
  double iou = 0.0;
  std::vector<bool> convergence;
};

/// IoU(answer, gt) + mean over crops of 1(|c_i - c*| < |c_{i-1} - c*|), with
/// c_0 = `initial_center` (the audio midpoint by default). Zero crops leave the
/// convergence term at 0; an unextractable answer scores 0.
TagTaskReward tag_task_reward(const Trajectory& t, const Interval& gt, TimePoint duration,
                              std::optional<TimePoint> initial_center = std::nullopt);

/// dac_score(gt, extracted answer).average; unextractable answers score 0.
double dac_task_reward(const Trajectory& t, const std::vector<CaptionSegment>& gt, const SemanticScorer& scorer,
                       const std::vector<double>& thresholds = kDefaultThresholds);

double tac_task_reward(const Trajectory& t, std::string_view gt_caption, const SemanticScorer& scorer);

/// Format plus task reward for one rollout against its instance.
RewardBreakdown score_rollout(const Trajectory& t, const TaskInstance& instance, const SemanticScorer& scorer,
                              const FormatOptions& opts = {});

struct Rollout {
  Trajectory trajectory;
  RewardBreakdown reward;
};

struct RolloutGroup {
  std::string instance_id;
  TaskKind task_kind = TaskKind::kTag;
  std::vector<Rollout> rollouts;

  std::size_t group_size() const noexcept { return rollouts.size(); }
};

/// (total_k - mean) / population std; all zeros when the totals do not vary.
std::vector<double> group_advantages(const RolloutGroup& g);
std::vector<double> group_advantages(const std::vector<double>& totals);

struct CorrectnessThresholds {
  double tag_iou = 0.5;
  double score = 0.5;  // DAC and TAC
};

bool is_correct(const Rollout& r, TaskKind kind, const CorrectnessThresholds& th);

struct SelectedTrajectory {
  std::string instance_id;
  bool correct = false;
  Trajectory trajectory;
};

/// Keeps groups holding both correct and incorrect rollouts and emits the
/// highest-total correct rollout followed by the lowest-total incorrect one.
/// Rollouts with format reward 0 never count as correct.
std::vector<SelectedTrajectory> select_rl_data(const std::vector<RolloutGroup>& groups,
                                               const CorrectnessThresholds& th = {},
                                               std::size_t expected_group_size = kDefaultGroupSize);

}  // namespace latkit
