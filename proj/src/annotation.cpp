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

#include "latkit/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "latkit/errors.hpp"

namespace latkit {

using json = nlohmann::ordered_json;

namespace {

constexpr Track kNonSpeechTracks[] = {Track::kEvents, Track::kMusic, Track::kBackground};

json parse_json(std::string_view document, const char* what) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + (path.empty() ? "" : ".") + key + ": missing required key");
  return *it;
}

std::string require_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + (path.empty() ? "" : ".") + key + ": expected a string");
  return v.get<std::string>();
}

std::string optional_string(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw SchemaError(path + "." + key + ": expected a string");
  return it->get<std::string>();
}

TimePoint timestamp_at(const json& obj, const std::string& key, const std::string& path) {
  const std::string text = require_string(obj, key, path);
  const std::string where = path + (path.empty() ? "" : ".") + key;
  try {
    return parse_timestamp(text);
  } catch (const RangeError& e) {
    throw RangeError(where + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Interval interval_at(const json& obj, const std::string& path) {
  return Interval{timestamp_at(obj, "start", path), timestamp_at(obj, "end", path)};
}

const json* optional_array(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  if (!it->is_array()) throw SchemaError(path + "." + key + ": expected an array");
  return &*it;
}

json interval_json(const Interval& i) {
  return json{{"start", format_timestamp(i.start)}, {"end", format_timestamp(i.end)}};
}

bool same_text(const TrackEvent& a, const TrackEvent& b) { return a.description == b.description; }
bool same_text(const SpeechSegment& a, const SpeechSegment& b) {
  return a.transcription == b.transcription && a.speaker_attr == b.speaker_attr && a.content == b.content;
}

template <typename T>
struct Tagged {
  T item;
  std::size_t chunk;
};

// Entries from neighbouring chunks with identical text whose spans meet at
// the seam (gap or overlap within tolerance) become one entry.
template <typename T, typename Get>
std::vector<T> shift_and_coalesce(const std::vector<std::pair<TimePoint, AnnotationSet>>& chunks, Get get,
                                  std::int64_t tolerance_ms) {
  std::vector<Tagged<T>> all;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const auto& [offset, set] = chunks[c];
    const std::vector<T>* src = &get(set);
    for (T item : *src) {
      item.interval.start = TimePoint::from_millis(item.interval.start.millis() + offset.millis());
      item.interval.end = TimePoint::from_millis(item.interval.end.millis() + offset.millis());
      all.push_back({std::move(item), c});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Tagged<T>& a, const Tagged<T>& b) {
    return a.item.interval.start < b.item.interval.start;
  });
  std::vector<Tagged<T>> merged;
  for (auto& t : all) {
    if (!merged.empty()) {
      Tagged<T>& prev = merged.back();
      const std::int64_t gap = t.item.interval.start.millis() - prev.item.interval.end.millis();
      if (t.chunk == prev.chunk + 1 && gap <= tolerance_ms && gap >= -tolerance_ms &&
          same_text(prev.item, t.item)) {
        prev.item.interval.end = std::max(prev.item.interval.end, t.item.interval.end);
        prev.chunk = t.chunk;
        continue;
      }
    }
    merged.push_back(std::move(t));
  }
  std::vector<T> out;
  out.reserve(merged.size());
  for (auto& t : merged) out.push_back(std::move(t.item));
  return out;
}

}  // namespace

const char* to_string(Track t) noexcept {
  switch (t) {
    case Track::kSpeech:
      return "speech";
    case Track::kEvents:
      return "events";
    case Track::kMusic:
      return "music";
    case Track::kBackground:
      return "background";
  }
  return "?";
}

const std::vector<TrackEvent>& AnnotationSet::non_speech(Track t) const {
  switch (t) {
    case Track::kEvents:
      return events;
    case Track::kMusic:
      return music;
    case Track::kBackground:
      return background;
    case Track::kSpeech:
      break;
  }
  throw ContractError("non_speech: speech track requested");
}

std::vector<TrackEvent>& AnnotationSet::non_speech(Track t) {
  return const_cast<std::vector<TrackEvent>&>(std::as_const(*this).non_speech(t));
}

const char* to_string(ValidationViolation::Kind k) noexcept {
  switch (k) {
    case ValidationViolation::Kind::kOutOfRange:
      return "OutOfRange";
    case ValidationViolation::Kind::kInvertedInterval:
      return "InvertedInterval";
    case ValidationViolation::Kind::kEmptyField:
      return "EmptyField";
    case ValidationViolation::Kind::kUnsortedTrack:
      return "UnsortedTrack";
  }
  return "?";
}

std::string location(const ValidationViolation& v) {
  return std::string(to_string(v.track)) + "[" + std::to_string(v.index) + "]";
}

AnnotationSet parse_annotation(std::string_view document) {
  const json root = parse_json(document, "annotation");
  if (!root.is_object()) throw SchemaError("annotation: expected a top-level object");
  AnnotationSet a;
  a.summary = require_string(root, "summary", "");
  a.duration = timestamp_at(root, "duration", "");
  a.language = optional_string(root, "language", "");
  const json& tracks = require(root, "tracks", "");
  if (!tracks.is_object()) throw SchemaError("tracks: expected an object");

  if (const json* speech = optional_array(tracks, "speech", "tracks")) {
    for (std::size_t i = 0; i < speech->size(); ++i) {
      const std::string path = "tracks.speech[" + std::to_string(i) + "]";
      const json& e = (*speech)[i];
      SpeechSegment s;
      s.interval = interval_at(e, path);
      s.speaker_attr = optional_string(e, "speaker_attr", path);
      s.content = optional_string(e, "content", path);
      s.transcription = require_string(e, "transcription", path);
      a.speech.push_back(std::move(s));
    }
  }
  for (Track t : kNonSpeechTracks) {
    const std::string name = to_string(t);
    if (const json* arr = optional_array(tracks, name, "tracks")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string path = "tracks." + name + "[" + std::to_string(i) + "]";
        const json& e = (*arr)[i];
        a.non_speech(t).push_back(TrackEvent{interval_at(e, path), require_string(e, "description", path)});
      }
    }
  }
  return a;
}

std::string serialize_annotation(const AnnotationSet& a) {
  json root;
  root["summary"] = a.summary;
  root["duration"] = format_timestamp(a.duration);
  if (!a.language.empty()) root["language"] = a.language;
  json tracks = json::object();
  json speech = json::array();
  for (const auto& s : a.speech) {
    json e = interval_json(s.interval);
    e["speaker_attr"] = s.speaker_attr;
    if (!s.content.empty()) e["content"] = s.content;
    e["transcription"] = s.transcription;
    speech.push_back(std::move(e));
  }
  tracks["speech"] = std::move(speech);
  for (Track t : kNonSpeechTracks) {
    json arr = json::array();
    for (const auto& ev : a.non_speech(t)) {
      json e = interval_json(ev.interval);
      e["description"] = ev.description;
      arr.push_back(std::move(e));
    }
    tracks[to_string(t)] = std::move(arr);
  }
  root["tracks"] = std::move(tracks);
  return root.dump(2) + "\n";
}

std::vector<ValidationViolation> validate_annotation(const AnnotationSet& a) {
  using Kind = ValidationViolation::Kind;
  std::vector<ValidationViolation> out;
  auto check = [&](Track track, std::size_t i, const Interval& iv, const std::string& text,
                   const char* field, const Interval* prev) {
    if (!iv.valid()) {
      out.push_back({Kind::kInvertedInterval, track, i, "start " + format_timestamp(iv.start) +
                                                            " after end " + format_timestamp(iv.end)});
    }
    if (iv.start > a.duration || iv.end > a.duration) {
      out.push_back({Kind::kOutOfRange, track, i,
                     format_interval(iv) + " exceeds duration " + format_timestamp(a.duration)});
    }
    if (text.empty()) out.push_back({Kind::kEmptyField, track, i, std::string(field) + " is empty"});
    if (prev != nullptr && iv.start < prev->start) {
      out.push_back({Kind::kUnsortedTrack, track, i, "starts before the previous entry"});
    }
  };
  for (std::size_t i = 0; i < a.speech.size(); ++i) {
    check(Track::kSpeech, i, a.speech[i].interval, a.speech[i].transcription, "transcription",
          i > 0 ? &a.speech[i - 1].interval : nullptr);
  }
  for (Track t : kNonSpeechTracks) {
    const auto& track = a.non_speech(t);
    for (std::size_t i = 0; i < track.size(); ++i) {
      check(t, i, track[i].interval, track[i].description, "description",
            i > 0 ? &track[i - 1].interval : nullptr);
    }
  }
  return out;
}

AnnotationSet merge_chunks(const std::vector<std::pair<TimePoint, AnnotationSet>>& chunks,
                           std::int64_t coalesce_tolerance_ms) {
  if (chunks.empty()) throw MergeError("merge_chunks: no chunks");
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    const auto& [prev_off, prev] = chunks[i - 1];
    const TimePoint off = chunks[i].first;
    if (off <= prev_off) throw MergeError("merge_chunks: chunk offsets must be strictly increasing");
    if (prev_off.millis() + prev.duration.millis() > off.millis()) {
      throw MergeError("merge_chunks: chunk " + std::to_string(i - 1) + " overlaps chunk " +
                       std::to_string(i));
    }
  }
  AnnotationSet out;
  out.summary = chunks.front().second.summary;
  out.language = chunks.front().second.language;
  out.duration = TimePoint::from_millis(chunks.back().first.millis() + chunks.back().second.duration.millis());
  out.speech = shift_and_coalesce<SpeechSegment>(
      chunks, [](const AnnotationSet& s) -> const std::vector<SpeechSegment>& { return s.speech; },
      coalesce_tolerance_ms);
  for (Track t : kNonSpeechTracks) {
    out.non_speech(t) = shift_and_coalesce<TrackEvent>(
        chunks, [t](const AnnotationSet& s) -> const std::vector<TrackEvent>& { return s.non_speech(t); },
        coalesce_tolerance_ms);
  }
  return out;
}

const char* to_string(TaskKind k) noexcept {
  switch (k) {
    case TaskKind::kDac:
      return "DAC";
    case TaskKind::kTag:
      return "TAG";
    case TaskKind::kTac:
      return "TAC";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view s) {
  std::string up(s);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "DAC") return TaskKind::kDac;
  if (up == "TAG") return TaskKind::kTag;
  if (up == "TAC") return TaskKind::kTac;
  throw SchemaError("unknown task kind '" + std::string(s) + "' (expected DAC, TAG or TAC)");
}

std::vector<TaskInstance> parse_task_instances(std::string_view document) {
  const json root = parse_json(document, "task instances");
  const json* list = &root;
  std::string base = "";
  if (root.is_object()) {
    list = &require(root, "instances", "");
    base = "instances";
  }
  if (!list->is_array()) throw SchemaError("instances: expected an array");

  static const std::vector<std::string> kTaskOnlyKeys = {"query", "answer", "target", "caption", "captions"};
  std::vector<TaskInstance> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& e = (*list)[i];
    const std::string path = base + "[" + std::to_string(i) + "]";
    if (!e.is_object()) throw SchemaError(path + ": expected an object");
    TaskInstance t;
    t.id = require_string(e, "id", path);
    try {
      t.task_kind = parse_task_kind(require_string(e, "task", path));
    } catch (const SchemaError& err) {
      throw SchemaError(path + ".task: " + err.what());
    }
    t.audio_ref = require_string(e, "audio", path);
    t.duration = timestamp_at(e, "duration", path);
    t.language = optional_string(e, "language", path);

    std::vector<std::string> allowed;
    auto within = [&](const Interval& iv, const std::string& where) {
      if (!iv.valid()) throw RangeError(where + ": start after end");
      if (iv.end > t.duration) {
        throw RangeError(where + ": " + format_interval(iv) + " exceeds duration " + format_timestamp(t.duration));
      }
    };
    switch (t.task_kind) {
      case TaskKind::kTag: {
        allowed = {"query", "answer"};
        t.query = require_string(e, "query", path);
        if (t.query.empty()) throw SchemaError(path + ".query: empty");
        const Interval gt = interval_at(require(e, "answer", path), path + ".answer");
        within(gt, path + ".answer");
        t.ground_truth = gt;
        break;
      }
      case TaskKind::kTac: {
        allowed = {"target", "caption"};
        const Interval target = interval_at(require(e, "target", path), path + ".target");
        within(target, path + ".target");
        t.target_interval = target;
        const std::string caption = require_string(e, "caption", path);
        if (caption.empty()) throw SchemaError(path + ".caption: empty");
        t.ground_truth = caption;
        break;
      }
      case TaskKind::kDac: {
        allowed = {"captions"};
        const json& caps = require(e, "captions", path);
        if (!caps.is_array()) throw SchemaError(path + ".captions: expected an array");
        if (caps.empty()) throw SchemaError(path + ".captions: at least one ground-truth segment required");
        DacGroundTruth gt;
        for (std::size_t j = 0; j < caps.size(); ++j) {
          const std::string cp = path + ".captions[" + std::to_string(j) + "]";
          const Interval iv = interval_at(caps[j], cp);
          within(iv, cp);
          gt.push_back({iv, require_string(caps[j], "caption", cp)});
        }
        t.ground_truth = std::move(gt);
        break;
      }
    }
    for (const auto& key : kTaskOnlyKeys) {
      if (e.contains(key) && std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw SchemaError(path + "." + key + ": not allowed for task " + to_string(t.task_kind));
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string serialize_task_instances(const std::vector<TaskInstance>& instances) {
  json list = json::array();
  for (const auto& t : instances) {
    json e;
    e["id"] = t.id;
    e["task"] = to_string(t.task_kind);
    e["audio"] = t.audio_ref;
    e["duration"] = format_timestamp(t.duration);
    if (!t.language.empty()) e["language"] = t.language;
    switch (t.task_kind) {
      case TaskKind::kTag:
        e["query"] = t.query;
        e["answer"] = interval_json(t.tag());
        break;
      case TaskKind::kTac:
        e["target"] = interval_json(*t.target_interval);
        e["caption"] = t.tac();
        break;
      case TaskKind::kDac: {
        json caps = json::array();
        for (const auto& c : t.dac()) {
          json ce = interval_json(c.interval);
          ce["caption"] = c.caption;
          caps.push_back(std::move(ce));
        }
        e["captions"] = std::move(caps);
        break;
      }
    }
    list.push_back(std::move(e));
  }
  return json{{"instances", std::move(list)}}.dump(2) + "\n";
}

}  // namespace latkit
