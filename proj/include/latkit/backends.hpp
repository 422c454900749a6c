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

#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "latkit/net.hpp"
#include "latkit/orchestrator.hpp"

namespace latkit {

/// Replays the assistant turns of a recorded trajectory. The next turn is
/// chosen by how many assistant turns the history already holds, so turns the
/// orchestrator issues itself (segment and target crops) consume fixture turns.
class ReplayBackend final : public ModelBackend {
 public:
  explicit ReplayBackend(Trajectory fixture);

  Turn generate(const BackendRequest& request) override;
  std::string id() const override { return "replay"; }

  /// Places where the live history departed from the fixture.
  std::vector<std::string> warnings() const;

 private:
  Trajectory fixture_;
  std::vector<std::size_t> assistant_index_;  // positions of non-ToolResponse turns
  mutable std::mutex mu_;
  std::size_t checked_ = 0;
  std::vector<std::string> warnings_;
};

/// Ground-truth backend: a three-part timeline, one think, one crop on the
/// answer window, then the ground-truth answer. For DAC, timeline parts that
/// would hold no caption are merged into their neighbour so every segment
/// yields a non-empty caption block. Stateless, so sessions may run in parallel.
class OracleBackend final : public ModelBackend {
 public:
  explicit OracleBackend(TaskInstance instance);

  Turn generate(const BackendRequest& request) override;
  bool supports_concurrent_sessions() const override { return true; }
  std::string id() const override { return "oracle"; }

  const GlobalTimeline& timeline() const { return timeline_; }

 private:
  Turn baseline_turn(const BackendRequest& request) const;

  TaskInstance instance_;
  GlobalTimeline timeline_;
  std::vector<std::vector<std::size_t>> segment_captions_;  // DAC only
};

/// Adversarial: declares a two-part timeline, then requests crops forever.
class AlwaysCropBackend final : public ModelBackend {
 public:
  Turn generate(const BackendRequest& request) override;
  bool supports_concurrent_sessions() const override { return true; }
  std::string id() const override { return "always-crop"; }
};

/// JSON-lines client. Each request is one object carrying the phase, task,
/// prompt, the history as trajectory messages and an audio descriptor; the
/// reply is one assistant message in the trajectory document format. Replies
/// that hold several turns are handed out over consecutive calls.
class ExternalBackend final : public ModelBackend {
 public:
  ExternalBackend(std::unique_ptr<net::LineChannel> channel, std::string id, bool send_pcm = false);

  Turn generate(const BackendRequest& request) override;
  std::string id() const override { return id_; }

 private:
  std::unique_ptr<net::LineChannel> channel_;
  std::string id_;
  bool send_pcm_;
  std::deque<Turn> pending_;
  std::size_t pending_history_size_ = 0;
};

/// Throws BackendError when the endpoint cannot be reached.
std::unique_ptr<ExternalBackend> external_backend(const std::string& endpoint, bool send_pcm = false);

}  // namespace latkit
