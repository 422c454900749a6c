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

#include "latkit/backends.hpp"

#include <openssl/evp.h>

#include <algorithm>

#include "latkit/errors.hpp"

namespace latkit {

using json = nlohmann::ordered_json;

namespace {

bool is_assistant_turn(const Turn& t) { return t.kind() != TurnKind::kToolResponse; }

std::string describe(const Turn& t) {
  std::string s = to_string(t.kind());
  if (const auto* c = t.get<ToolCall>()) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(%g, %g)", c->start_sec, c->end_sec);
    s += buf;
  }
  return s;
}

const ToolCall* last_tool_call(const Trajectory& t) {
  for (auto it = t.turns.rbegin(); it != t.turns.rend(); ++it) {
    if (const auto* c = it->get<ToolCall>()) return c;
  }
  return nullptr;
}

std::string base64(const std::int16_t* data, std::size_t n) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data);
  const std::size_t len = n * sizeof(std::int16_t);
  std::string out(4 * ((len + 2) / 3) + 1, '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes, static_cast<int>(len));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

}  // namespace

// --- replay ---------------------------------------------------------------

ReplayBackend::ReplayBackend(Trajectory fixture) : fixture_(std::move(fixture)) {
  for (std::size_t i = 0; i < fixture_.turns.size(); ++i) {
    if (is_assistant_turn(fixture_.turns[i])) assistant_index_.push_back(i);
  }
}

Turn ReplayBackend::generate(const BackendRequest& request) {
  const auto& live = request.history.turns;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (checked_ > live.size()) checked_ = 0;  // new session
    for (; checked_ < live.size(); ++checked_) {
      if (checked_ >= fixture_.turns.size()) {
        warnings_.push_back("turn " + std::to_string(checked_) + ": history runs past the fixture");
        continue;
      }
      const Turn& want = fixture_.turns[checked_];
      const Turn& got = live[checked_];
      if (want.payload != got.payload) {
        warnings_.push_back("turn " + std::to_string(checked_) + ": fixture has " + describe(want) +
                            ", session has " + describe(got));
      }
    }
  }
  const auto used = static_cast<std::size_t>(std::count_if(live.begin(), live.end(), is_assistant_turn));
  if (used >= assistant_index_.size()) {
    throw BackendError("replay fixture exhausted after " + std::to_string(assistant_index_.size()) +
                       " assistant turns");
  }
  return fixture_.turns[assistant_index_[used]];
}

std::vector<std::string> ReplayBackend::warnings() const {
  std::lock_guard<std::mutex> lock(mu_);
  return warnings_;
}

// --- oracle ---------------------------------------------------------------

OracleBackend::OracleBackend(TaskInstance instance) : instance_(std::move(instance)) {
  const std::int64_t total = instance_.duration.millis();
  // Part boundaries on whole seconds so the rendered timeline parses back exactly.
  std::vector<std::int64_t> bounds = {0, total / 3 / 1000 * 1000, 2 * total / 3 / 1000 * 1000, total};
  if (instance_.task_kind != TaskKind::kDac) {
    for (int k = 0; k < 3; ++k) {
      timeline_.segments.push_back(
          {make_interval(bounds[k], bounds[k + 1]), "part " + std::to_string(k + 1) + " of the recording"});
    }
    return;
  }
  std::vector<std::vector<std::size_t>> parts(3);
  const auto& caps = instance_.dac();
  for (std::size_t i = 0; i < caps.size(); ++i) {
    const std::int64_t mid = midpoint(caps[i].interval).millis();
    const int k = mid < bounds[1] ? 0 : (mid < bounds[2] ? 1 : 2);
    parts[k].push_back(i);
  }
  // Merge empty parts: a non-empty part extends back over preceding empties,
  // trailing empties fold into the last non-empty part.
  std::int64_t seg_start = 0;
  for (int k = 0; k < 3; ++k) {
    if (parts[k].empty()) continue;
    timeline_.segments.push_back({make_interval(seg_start, bounds[k + 1]), ""});
    segment_captions_.push_back(parts[k]);
    seg_start = bounds[k + 1];
  }
  if (!timeline_.segments.empty()) timeline_.segments.back().interval.end = TimePoint::from_millis(total);
  for (std::size_t s = 0; s < timeline_.segments.size(); ++s) {
    timeline_.segments[s].description = "part " + std::to_string(s + 1) + " of the recording";
  }
}

Turn OracleBackend::generate(const BackendRequest& request) {
  if (request.phase == Phase::kTimeline) return Turn{timeline_};
  if (request.phase == Phase::kBaseline) return baseline_turn(request);

  const Trajectory& h = request.history;
  const TurnKind last = h.turns.empty() ? TurnKind::kTimelineDecl : h.turns.back().kind();
  switch (instance_.task_kind) {
    case TaskKind::kTag: {
      if (last == TurnKind::kToolResponse) return Turn{Answer{format_interval(instance_.tag())}};
      if (last == TurnKind::kThink) {
        const Interval gt = instance_.tag();
        return Turn{ToolCall{std::string(kCropAudioTool), gt.start.seconds(), gt.end.seconds()}};
      }
      return Turn{Think{"Crop the window that matches the query."}, true};
    }
    case TaskKind::kTac: {
      if (last == TurnKind::kToolResponse) return Turn{Answer{instance_.tac()}};
      if (last == TurnKind::kThink) {
        const Interval target = *instance_.target_interval;
        return Turn{ToolCall{std::string(kCropAudioTool), target.start.seconds(), target.end.seconds()}};
      }
      return Turn{Think{"Listen to the target interval."}, true};
    }
    case TaskKind::kDac: {
      if (last != TurnKind::kToolResponse) return Turn{Think{"Observe the next interval."}, true};
      const ToolCall* call = last_tool_call(h);
      const double mid = call == nullptr ? 0.0 : (call->start_sec + call->end_sec) / 2.0;
      std::size_t seg = 0;
      while (seg + 1 < timeline_.segments.size() && mid >= timeline_.segments[seg].interval.end.seconds()) ++seg;
      std::vector<CaptionSegment> block;
      for (std::size_t i : segment_captions_.at(seg)) block.push_back(instance_.dac()[i]);
      return Turn{Answer{format_dac_answer(block)}};
    }
  }
  throw BackendError("oracle: unknown task");
}

// Answers the chunked baseline prompts from ground truth, in chunk-local time.
Turn OracleBackend::baseline_turn(const BackendRequest& request) const {
  const std::int64_t lo = request.clip_offset.millis();
  const std::int64_t hi = lo + request.audio.duration().millis();
  auto local = [&](Interval iv) {
    return make_interval(std::clamp<std::int64_t>(iv.start.millis() - lo, 0, hi - lo),
                         std::clamp<std::int64_t>(iv.end.millis() - lo, 0, hi - lo));
  };
  switch (instance_.task_kind) {
    case TaskKind::kTag: {
      const Interval gt = instance_.tag();
      if (gt.start.millis() >= lo && gt.start.millis() < hi) return Turn{Answer{"yes " + format_interval(local(gt))}};
      return Turn{Answer{"no"}};
    }
    case TaskKind::kTac:
      return Turn{Answer{instance_.tac()}};
    case TaskKind::kDac: {
      json list = json::array();
      for (const auto& c : instance_.dac()) {
        if (c.interval.start.millis() < lo || c.interval.start.millis() >= hi) continue;
        const Interval iv = local(c.interval);
        list.push_back({{"start", format_timestamp(iv.start)}, {"end", format_timestamp(iv.end)}, {"caption", c.caption}});
      }
      return Turn{Answer{list.dump()}};
    }
  }
  throw BackendError("oracle: unknown task");
}

// --- adversarial ----------------------------------------------------------

Turn AlwaysCropBackend::generate(const BackendRequest& request) {
  const std::int64_t total = request.source_duration.millis();
  if (request.phase == Phase::kTimeline) {
    GlobalTimeline tl;
    tl.segments.push_back({make_interval(0, total / 2000 * 1000), "first half"});
    tl.segments.push_back({make_interval(total / 2000 * 1000, total), "second half"});
    return Turn{tl};
  }
  const double dur = static_cast<double>(total) / 1000.0;
  const double step = dur / 8.0;
  const double k = static_cast<double>(request.history.step_count() % 8);
  return Turn{ToolCall{std::string(kCropAudioTool), k * step, (k + 1.0) * step}};
}

// --- external -------------------------------------------------------------

ExternalBackend::ExternalBackend(std::unique_ptr<net::LineChannel> channel, std::string id, bool send_pcm)
    : channel_(std::move(channel)), id_(std::move(id)), send_pcm_(send_pcm) {}

Turn ExternalBackend::generate(const BackendRequest& request) {
  if (!pending_.empty() && request.history.turns.size() == pending_history_size_) {
    Turn t = std::move(pending_.front());
    pending_.pop_front();
    ++pending_history_size_;
    return t;
  }
  pending_.clear();

  json audio = {{"ref", request.audio_ref},
                {"offset_sec", request.clip_offset.seconds()},
                {"duration_sec", request.audio.duration_seconds()},
                {"sample_rate", request.audio.sample_rate},
                {"downsample", request.downsample_factor}};
  if (send_pcm_) audio["pcm_s16le_base64"] = base64(request.audio.samples.data(), request.audio.samples.size());
  json req = {{"phase", to_string(request.phase)},
              {"task", to_string(request.task_kind)},
              {"prompt", request.prompt},
              {"messages", json::array()},
              {"audio", std::move(audio)}};
  if (!request.history.turns.empty()) req["messages"] = trajectory_to_json(request.history)["messages"];

  std::optional<std::string> line;
  try {
    channel_->write_line(req.dump());
    line = channel_->read_line();
  } catch (const net::IoError& e) {
    throw BackendError(id_ + ": " + e.what());
  }
  if (!line) throw BackendError(id_ + ": connection closed");
  json reply;
  try {
    reply = json::parse(*line);
  } catch (const json::parse_error& e) {
    throw BackendError(id_ + ": malformed reply: " + e.what());
  }
  if (reply.is_object() && reply.contains("error")) {
    throw BackendError(id_ + ": " + reply["error"].dump());
  }
  Trajectory one;
  try {
    one = trajectory_from_json(json{{"messages", json::array({json{{"role", "user"}, {"content", ""}}, reply})}});
  } catch (const Error& e) {
    throw BackendError(id_ + ": reply is not an assistant message: " + e.what());
  }
  if (one.turns.empty() || one.turns.front().kind() == TurnKind::kToolResponse) {
    throw BackendError(id_ + ": reply is not an assistant message");
  }
  Turn first = std::move(one.turns.front());
  for (std::size_t i = 1; i < one.turns.size(); ++i) pending_.push_back(std::move(one.turns[i]));
  pending_history_size_ = request.history.turns.size() + 1;
  return first;
}

std::unique_ptr<ExternalBackend> external_backend(const std::string& endpoint, bool send_pcm) {
  try {
    return std::make_unique<ExternalBackend>(net::connect_tcp(net::Endpoint::parse(endpoint)), endpoint, send_pcm);
  } catch (const std::exception& e) {
    throw BackendError("backend " + endpoint + " unreachable: " + e.what());
  }
}

}  // namespace latkit
