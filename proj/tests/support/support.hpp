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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "latkit/annotation.hpp"
#include "latkit/audio.hpp"
#include "latkit/scoring.hpp"
#include "latkit/temporal.hpp"
#include "latkit/trajectory.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(LATKIT_SOURCE_DIR); }
inline fs::path fixture(const std::string& name) { return source_dir() / "data" / "fixtures" / name; }

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline latkit::Trajectory load_fixture_trajectory(const std::string& task) {
  return latkit::parse_trajectory(slurp(fixture("appendix_" + task + ".json")));
}

inline std::vector<latkit::TaskInstance> appendix_instances() {
  return latkit::parse_task_instances(slurp(fixture("appendix_instances.json")));
}

inline latkit::TaskInstance appendix_instance(latkit::TaskKind k) {
  for (auto& t : appendix_instances()) {
    if (t.task_kind == k) return t;
  }
  throw std::runtime_error("no appendix instance");
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("latkit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

// --- independent oracles ---------------------------------------------------

/// IoU written from the definition: clamped overlap over the hull, in exact
/// integer milliseconds, identical degenerate points scoring 1.
inline double oracle_iou(std::int64_t as, std::int64_t ae, std::int64_t bs, std::int64_t be) {
  if (as == ae && bs == be) return as == bs ? 1.0 : 0.0;
  const std::int64_t overlap = std::min(ae, be) - std::max(as, bs);
  const std::int64_t hull = std::max(ae, be) - std::min(as, bs);
  if (overlap <= 0 || hull == 0) return 0.0;
  return static_cast<double>(overlap) / static_cast<double>(hull);
}

inline double oracle_iou(const latkit::Interval& a, const latkit::Interval& b) {
  return oracle_iou(a.start.millis(), a.end.millis(), b.start.millis(), b.end.millis());
}

struct OracleMatch {
  std::optional<std::size_t> pred;
  double iou = 0.0;
};

/// Exhaustive per-ground-truth maximization; first index wins ties.
inline std::vector<OracleMatch> brute_force_match(const std::vector<latkit::Interval>& gt,
                                                  const std::vector<latkit::Interval>& pred) {
  std::vector<OracleMatch> out;
  for (const auto& g : gt) {
    OracleMatch m;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double v = oracle_iou(g, pred[j]);
      if (!m.pred || v > m.iou) {
        m.pred = j;
        m.iou = v;
      }
    }
    out.push_back(m);
  }
  return out;
}

/// Per-threshold DAC score from the definition: mean over ground truth of
/// scorer value times the threshold indicator.
inline std::vector<double> brute_force_dac(const std::vector<latkit::CaptionSegment>& gt,
                                           const std::vector<latkit::CaptionSegment>& pred,
                                           const latkit::SemanticScorer& scorer, const std::vector<double>& taus) {
  std::vector<latkit::Interval> gi, pi;
  for (const auto& g : gt) gi.push_back(g.interval);
  for (const auto& p : pred) pi.push_back(p.interval);
  const auto matches = brute_force_match(gi, pi);
  std::vector<double> out;
  for (double tau : taus) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (matches[i].pred && matches[i].iou >= tau) acc += scorer.score(gt[i].caption, pred[*matches[i].pred].caption);
    }
    out.push_back(acc / static_cast<double>(gt.size()));
  }
  return out;
}

/// Scorer backed by a fixed table; unknown pairs score `fallback`.
class TableScorer final : public latkit::SemanticScorer {
 public:
  explicit TableScorer(double fallback = 1.0) : fallback_(fallback) {}
  void set(const std::string& a, const std::string& b, double v) { table_.push_back({a, b, v}); }
  double score(std::string_view a, std::string_view b) const override {
    for (const auto& e : table_) {
      if (e.a == a && e.b == b) return e.v;
    }
    return fallback_;
  }
  std::string id() const override { return "test:table"; }

 private:
  struct Entry {
    std::string a, b;
    double v;
  };
  double fallback_;
  std::vector<Entry> table_;
};

/// Scores 1 for identical text, else 0.
class IdentityScorer final : public latkit::SemanticScorer {
 public:
  double score(std::string_view a, std::string_view b) const override { return a == b ? 1.0 : 0.0; }
  std::string id() const override { return "test:identity"; }
};

// --- trajectory builders ---------------------------------------------------

inline latkit::Turn think(std::string text, bool continues = false) {
  return latkit::Turn{latkit::Think{std::move(text)}, continues};
}
inline latkit::Turn call(double s, double e) {
  latkit::ToolCall c;
  c.start_sec = s;
  c.end_sec = e;
  return latkit::Turn{c, false};
}
inline latkit::Turn response(std::string text = "Segment extracted: <audio>") {
  return latkit::Turn{latkit::ToolResponse{std::move(text)}, false};
}
inline latkit::Turn answer(std::string text, bool continues = true) {
  return latkit::Turn{latkit::Answer{std::move(text)}, continues};
}
inline latkit::Turn timeline(const std::vector<std::pair<latkit::Interval, std::string>>& parts) {
  latkit::GlobalTimeline g;
  for (const auto& [iv, d] : parts) g.segments.push_back({iv, d});
  return latkit::Turn{g, false};
}

inline latkit::Trajectory make_trajectory(latkit::TaskKind kind, std::vector<latkit::Turn> turns) {
  latkit::Trajectory t;
  t.task_kind = kind;
  t.prompt = "<audio> prompt";
  t.turns = std::move(turns);
  return t;
}

/// TAG rollout: one think/crop/response per crop, then the answer.
inline latkit::Trajectory tag_rollout(const std::vector<std::pair<double, double>>& crops, const std::string& ans) {
  std::vector<latkit::Turn> turns;
  for (const auto& [s, e] : crops) {
    turns.push_back(think("probe"));
    turns.push_back(call(s, e));
    turns.push_back(response());
  }
  turns.push_back(think("done"));
  turns.push_back(answer(ans));
  return make_trajectory(latkit::TaskKind::kTag, std::move(turns));
}

// --- generators ------------------------------------------------------------

inline latkit::Interval random_interval(std::mt19937_64& rng, std::int64_t max_ms, std::int64_t grain = 1) {
  std::uniform_int_distribution<std::int64_t> d(0, max_ms / grain);
  std::int64_t a = d(rng) * grain, b = d(rng) * grain;
  if (a > b) std::swap(a, b);
  return latkit::make_interval(a, b);
}

inline latkit::AudioBuffer random_audio(std::mt19937_64& rng, std::size_t n, std::uint32_t rate) {
  latkit::AudioBuffer a;
  a.sample_rate = rate;
  a.samples.resize(n);
  std::uniform_int_distribution<int> d(-32768, 32767);
  for (auto& s : a.samples) s = static_cast<std::int16_t>(d(rng));
  return a;
}

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

/// Hand-assembled RIFF/WAVE PCM file with arbitrary width and channel count.
inline std::vector<std::uint8_t> make_wav(const std::vector<std::int32_t>& interleaved, int channels,
                                          std::uint32_t rate, int bits, std::uint16_t format_tag = 1,
                                          std::optional<std::uint32_t> claimed_data_size = std::nullopt) {
  const int bytes = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(interleaved.size()) * bytes;
  std::vector<std::uint8_t> out;
  auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  tag("RIFF");
  put_le(out, 36 + data_size, 4);
  tag("WAVE");
  tag("fmt ");
  put_le(out, 16, 4);
  put_le(out, format_tag, 2);
  put_le(out, static_cast<std::uint64_t>(channels), 2);
  put_le(out, rate, 4);
  put_le(out, static_cast<std::uint64_t>(rate) * channels * bytes, 4);
  put_le(out, static_cast<std::uint64_t>(channels * bytes), 2);
  put_le(out, static_cast<std::uint64_t>(bits), 2);
  tag("data");
  put_le(out, claimed_data_size.value_or(data_size), 4);
  for (std::int32_t v : interleaved) {
    if (bits == 8) {
      out.push_back(static_cast<std::uint8_t>(v + 128));
    } else {
      put_le(out, static_cast<std::uint32_t>(v), bytes);
    }
  }
  return out;
}

// --- loopback line server --------------------------------------------------

/// Accepts connections on 127.0.0.1 and answers each received line with
/// handler(line). Stops when destroyed.
class LineServer {
 public:
  explicit LineServer(std::function<std::string(const std::string&)> handler) : handler_(std::move(handler)) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    ::listen(fd_, 4);
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve(); });
  }
  ~LineServer() {
    stop_ = true;
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    if (thread_.joinable()) thread_.join();
  }
  std::string endpoint() const { return "tcp://127.0.0.1:" + std::to_string(port_); }
  std::vector<std::string> received() const { return received_; }

 private:
  void serve() {
    while (!stop_) {
      const int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) return;
      std::string buf;
      char chunk[4096];
      for (;;) {
        const ssize_t n = ::recv(c, chunk, sizeof(chunk), 0);
        if (n <= 0) break;
        buf.append(chunk, static_cast<std::size_t>(n));
        for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
          const std::string line = buf.substr(0, nl);
          buf.erase(0, nl + 1);
          received_.push_back(line);
          const std::string reply = handler_(line) + "\n";
          ::send(c, reply.data(), reply.size(), MSG_NOSIGNAL);
        }
      }
      ::close(c);
    }
  }

  std::function<std::string(const std::string&)> handler_;
  int fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stop_{false};
  std::vector<std::string> received_;
  std::thread thread_;
};

}  // namespace testsupport
