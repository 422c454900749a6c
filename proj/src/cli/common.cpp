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

#include "common.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "latkit/errors.hpp"

namespace latkit::cli {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoFailure(p.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoFailure(p.string() + ": read failed");
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure(p.string() + ": cannot open for writing");
  out << content;
  if (!out) throw IoFailure(p.string() + ": write failed");
}

json read_json(const fs::path& p) {
  const std::string text = read_file(p);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw CheckFailure(p.string() + ": malformed JSON: " + e.what());
  }
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& paths, const std::string& extension) {
  std::vector<fs::path> out;
  for (const auto& raw : paths) {
    const fs::path p(raw);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (auto it = fs::recursive_directory_iterator(p, ec); !ec && it != fs::recursive_directory_iterator();
           it.increment(ec)) {
        if (it->is_regular_file() && it->path().extension() == extension) found.push_back(it->path());
      }
      if (ec) throw IoFailure(raw + ": " + ec.message());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      out.push_back(p);
    } else {
      throw IoFailure(raw + ": no such file or directory");
    }
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

void Manifest::add_input(const fs::path& p) { inputs.emplace_back(p.generic_string(), sha256_hex(read_file(p))); }

std::string resolve_timestamp(const Settings& s) {
  if (!s.timestamp.empty()) return s.timestamp;
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde != nullptr && *sde != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(sde, &end, 10);
    if (end != nullptr && *end == '\0' && v >= 0) t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json Manifest::to_json(const Settings& s) const {
  json cfg;
  cfg["thresholds"] = s.thresholds;
  cfg["max_steps"] = s.max_steps;
  cfg["timeline_downsample"] = s.timeline_downsample;
  cfg["crop_downsample"] = s.crop_downsample;
  cfg["group_size"] = s.group_size;
  for (auto it = config.begin(); it != config.end(); ++it) cfg[it.key()] = it.value();
  json in = json::array();
  for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"sha256", digest}});
  return json{{"command", command},
              {"tool_version", kToolVersion},
              {"timestamp", resolve_timestamp(s)},
              {"config", std::move(cfg)},
              {"inputs", std::move(in)}};
}

void emit(const Settings& s, const json& report, const std::string& markdown, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (s.out_path.empty()) {
    out << text;
  } else {
    write_file(s.out_path, text);
  }
  if (!s.markdown_path.empty()) write_file(s.markdown_path, markdown);
}

std::vector<double> parse_threshold_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0' || !(v >= 0.0 && v <= 1.0)) {
      throw CheckFailure("thresholds: '" + item + "' is not a number in [0, 1]");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CheckFailure("thresholds: empty list");
  return out;
}

void apply_config(Settings& s) {
  if (s.config_path.empty()) return;
  const json cfg = read_json(s.config_path);
  if (!cfg.is_object()) throw CheckFailure(s.config_path + ": expected an object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    try {
      if (k == "thresholds") {
        s.thresholds = v.is_string() ? parse_threshold_list(v.get<std::string>()) : v.get<std::vector<double>>();
      } else if (k == "scorer") {
        s.scorer = v.get<std::string>();
      } else if (k == "workers") {
        s.workers = v.get<int>();
      } else if (k == "backend") {
        s.backend = v.get<std::string>();
      } else if (k == "send_pcm") {
        s.send_pcm = v.get<bool>();
      } else if (k == "max_steps") {
        s.max_steps = v.get<int>();
      } else if (k == "timeline_downsample") {
        s.timeline_downsample = v.get<int>();
      } else if (k == "crop_downsample") {
        s.crop_downsample = v.get<int>();
      } else if (k == "id_tolerance") {
        s.id_tolerance = v.get<std::size_t>();
      } else if (k == "group") {
        s.group = v.get<bool>();
      } else if (k == "group_size") {
        s.group_size = v.get<std::size_t>();
      } else if (k == "tag_iou_threshold") {
        s.tag_iou_threshold = v.get<double>();
      } else if (k == "score_threshold") {
        s.score_threshold = v.get<double>();
      } else if (k == "agreement_threshold") {
        s.agreement_threshold = v.get<double>();
      } else if (k == "timestamp") {
        s.timestamp = v.get<std::string>();
      } else if (k == "audio_dir") {
        s.audio_dir = v.get<std::string>();
      } else if (k == "silent_audio") {
        s.silent_audio = v.get<bool>();
      } else {
        throw CheckFailure(s.config_path + ": unknown key '" + k + "'");
      }
    } catch (const json::exception& e) {
      throw CheckFailure(s.config_path + ": bad value for '" + k + "': " + e.what());
    }
  }
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

std::unique_ptr<SemanticScorer> open_scorer(const Settings& s) {
  try {
    return make_scorer(s.scorer);
  } catch (const ScorerError& e) {
    throw IoFailure(e.what());
  }
}

SampleScore score_sample(const TaskInstance& instance, const std::optional<TaskAnswer>& answer,
                         const SemanticScorer& scorer, const std::vector<double>& thresholds) {
  SampleScore s;
  s.id = instance.id;
  s.parsed = answer.has_value();
  try {
    switch (instance.task_kind) {
      case TaskKind::kTag:
        s.value = answer ? iou(instance.tag(), std::get<Interval>(*answer)) : 0.0;
        break;
      case TaskKind::kDac:
        if (answer) {
          const DacScore d = dac_score(instance.dac(), std::get<std::vector<CaptionSegment>>(*answer), scorer,
                                       thresholds);
          s.value = d.average;
          s.per_threshold = d.per_threshold;
        } else {
          s.per_threshold.assign(thresholds.size(), 0.0);
        }
        break;
      case TaskKind::kTac:
        s.value = answer ? tac_score(instance.tac(), std::get<std::string>(*answer), scorer) : 0.0;
        break;
    }
  } catch (const ScorerError& e) {
    s.scored = false;
    s.value = 0.0;
    s.note = e.what();
  }
  if (!s.parsed && s.note.empty()) s.note = "no parseable prediction";
  return s;
}

std::vector<CorpusReport> corpus_reports(const std::vector<TaskInstance>& instances,
                                         const std::vector<SampleScore>& samples,
                                         const std::vector<double>& thresholds) {
  std::vector<CorpusReport> out;
  for (TaskKind k : {TaskKind::kTag, TaskKind::kDac, TaskKind::kTac}) {
    std::vector<SampleScore> rows;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (instances[i].task_kind == k) rows.push_back(samples[i]);
    }
    if (!rows.empty()) out.push_back(aggregate_corpus(k, std::move(rows), thresholds));
  }
  return out;
}

json corpus_json(const CorpusReport& r) {
  json agg = json::object();
  for (const auto& [name, value] : r.aggregates) agg[name] = value;
  json samples = json::array();
  for (const auto& s : r.samples) {
    json j{{"id", s.id}, {"parsed", s.parsed}, {"scored", s.scored}, {"value", s.value}};
    if (r.task_kind == TaskKind::kDac) j["per_threshold"] = s.per_threshold;
    if (!s.note.empty()) j["note"] = s.note;
    samples.push_back(std::move(j));
  }
  return json{{"task", to_string(r.task_kind)},
              {"n_samples", r.n_samples},
              {"n_unscored", r.n_unscored},
              {"thresholds", r.thresholds},
              {"aggregates", std::move(agg)},
              {"samples", std::move(samples)}};
}

json answer_to_json(const TaskAnswer& a) {
  if (const auto* iv = std::get_if<Interval>(&a)) return format_interval(*iv);
  if (const auto* text = std::get_if<std::string>(&a)) return *text;
  json list = json::array();
  for (const auto& c : std::get<std::vector<CaptionSegment>>(a)) {
    list.push_back({{"start", format_timestamp(c.interval.start)}, {"end", format_timestamp(c.interval.end)},
                    {"caption", c.caption}});
  }
  return list;
}

std::optional<TaskAnswer> answer_from_json(const json& j, TaskKind kind) {
  switch (kind) {
    case TaskKind::kTag:
      if (j.is_string()) {
        if (auto iv = parse_tag_answer(j.get<std::string>())) return TaskAnswer{*iv};
      } else if (j.is_object() && j.contains("start") && j.contains("end") && j["start"].is_string() &&
                 j["end"].is_string()) {
        auto s = try_parse_interval("[" + j["start"].get<std::string>() + " - " + j["end"].get<std::string>() + "]");
        if (s) return TaskAnswer{*s};
      }
      return std::nullopt;
    case TaskKind::kDac: {
      const std::string text = j.is_string() ? j.get<std::string>() : j.dump();
      if (auto caps = parse_dac_answer(text)) return TaskAnswer{std::move(*caps)};
      return std::nullopt;
    }
    case TaskKind::kTac:
      if (j.is_string()) {
        if (auto c = parse_tac_answer(j.get<std::string>())) return TaskAnswer{std::move(*c)};
      }
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace latkit::cli
