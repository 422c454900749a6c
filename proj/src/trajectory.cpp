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

#include "latkit/trajectory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "latkit/errors.hpp"

namespace latkit {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kTimelineOpen = "<global_timeline>";
constexpr std::string_view kTimelineClose = "</global_timeline>";
constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto nl = s.find('\n', pos);
    const auto end = nl == std::string_view::npos ? s.size() : nl;
    out.push_back(s.substr(pos, end - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

// Trimmed non-empty lines joined by '\n'.
std::string normalize_block(std::string_view s) {
  std::string out;
  for (auto line : split_lines(s)) {
    line = trim(line);
    if (line.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out.append(line);
  }
  return out;
}

double crop_argument(const json& args, const char* key, std::size_t msg) {
  auto it = args.find(key);
  if (it == args.end()) {
    throw SchemaError("messages[" + std::to_string(msg) + "].tool_call.arguments: missing " + key);
  }
  if (!it->is_number()) {
    throw ParseError("messages[" + std::to_string(msg) + "].tool_call.arguments." + key + ": not numeric");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw ParseError("messages[" + std::to_string(msg) + "].tool_call.arguments." + key + ": not finite");
  }
  return v;
}

std::string render_timeline(const GlobalTimeline& tl) {
  std::string out(kTimelineOpen);
  out.push_back('\n');
  for (const auto& seg : tl.segments) {
    out += format_interval(seg.interval);
    if (!seg.description.empty()) out += " " + seg.description;
    out.push_back('\n');
  }
  out += kTimelineClose;
  return out;
}

std::string render_content_turn(const Turn& turn) {
  if (const auto* th = turn.get<Think>()) return std::string(kThinkOpen) + th->text + std::string(kThinkClose);
  if (const auto* an = turn.get<Answer>()) return an->text;
  if (const auto* tl = turn.get<GlobalTimeline>()) return render_timeline(*tl);
  return {};
}

bool near_ms(std::int64_t a, std::int64_t b, std::int64_t tol) { return a - b <= tol && b - a <= tol; }

}  // namespace

const char* to_string(TurnKind k) noexcept {
  switch (k) {
    case TurnKind::kThink:
      return "Think";
    case TurnKind::kToolCall:
      return "ToolCall";
    case TurnKind::kToolResponse:
      return "ToolResponse";
    case TurnKind::kAnswer:
      return "Answer";
    case TurnKind::kTimelineDecl:
      return "TimelineDecl";
  }
  return "?";
}

std::size_t Trajectory::step_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const Turn& t) { return t.kind() == TurnKind::kToolCall; }));
}

const GlobalTimeline* Trajectory::timeline() const noexcept {
  for (const auto& t : turns) {
    if (const auto* tl = t.get<GlobalTimeline>()) return tl;
  }
  return nullptr;
}

GlobalTimeline parse_timeline_block(std::string_view body) {
  GlobalTimeline tl;
  for (auto line : split_lines(body)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto close = line.find(']');
    if (line.front() != '[' || close == std::string_view::npos) {
      throw ParseError("timeline line '" + std::string(line) + "': expected [MM:SS - MM:SS] description");
    }
    TimelineSegment seg;
    seg.interval = parse_interval(line.substr(0, close + 1));
    seg.description = std::string(trim(line.substr(close + 1)));
    tl.segments.push_back(std::move(seg));
  }
  return tl;
}

std::vector<Turn> parse_assistant_content(std::string_view content) {
  std::vector<Turn> turns;
  std::size_t pos = 0;
  auto push = [&](Turn t) {
    t.continues_message = !turns.empty();
    turns.push_back(std::move(t));
  };
  while (pos < content.size()) {
    while (pos < content.size() && is_ws(content[pos])) ++pos;
    if (pos >= content.size()) break;
    const std::string_view rest = content.substr(pos);
    if (rest.substr(0, kTimelineOpen.size()) == kTimelineOpen) {
      const auto close = content.find(kTimelineClose, pos + kTimelineOpen.size());
      if (close == std::string_view::npos) {
        throw ParseError("unclosed <global_timeline> at byte " + std::to_string(pos));
      }
      push(Turn{parse_timeline_block(content.substr(pos + kTimelineOpen.size(), close - pos - kTimelineOpen.size()))});
      pos = close + kTimelineClose.size();
    } else if (rest.substr(0, kThinkOpen.size()) == kThinkOpen) {
      const auto close = content.find(kThinkClose, pos + kThinkOpen.size());
      if (close == std::string_view::npos) throw ParseError("unclosed <think> at byte " + std::to_string(pos));
      const auto inner = content.substr(pos + kThinkOpen.size(), close - pos - kThinkOpen.size());
      if (inner.find(kThinkOpen) != std::string_view::npos) {
        throw ParseError("nested <think> inside block opened at byte " + std::to_string(pos));
      }
      push(Turn{Think{std::string(trim(inner))}});
      pos = close + kThinkClose.size();
    } else {
      std::size_t next = std::min(content.find(kThinkOpen, pos), content.find(kTimelineOpen, pos));
      if (next == std::string_view::npos) next = content.size();
      const auto text = content.substr(pos, next - pos);
      for (std::string_view stray : {kThinkClose, kTimelineClose}) {
        if (const auto at = text.find(stray); at != std::string_view::npos) {
          throw ParseError("closing tag " + std::string(stray) + " without opener at byte " +
                           std::to_string(pos + at));
        }
      }
      push(Turn{Answer{normalize_block(text)}});
      pos = next;
    }
  }
  return turns;
}

Trajectory trajectory_from_json(const json& document) {
  if (!document.is_object()) throw SchemaError("trajectory: expected an object");
  auto mit = document.find("messages");
  if (mit == document.end()) throw SchemaError("trajectory: missing required key messages");
  if (!mit->is_array()) throw SchemaError("messages: expected an array");
  const json& messages = *mit;
  if (messages.empty()) throw ParseError("trajectory: empty message list (no turns)");

  Trajectory t;
  if (auto it = document.find("id"); it != document.end() && it->is_string()) t.id = it->get<std::string>();
  if (auto it = document.find("task"); it != document.end()) {
    if (!it->is_string()) throw SchemaError("task: expected a string");
    t.task_kind = parse_task_kind(it->get<std::string>());
  }
  bool seen_prompt = false;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const json& m = messages[i];
    const std::string where = "messages[" + std::to_string(i) + "]";
    if (!m.is_object() || !m.contains("role") || !m["role"].is_string()) {
      throw SchemaError(where + ": expected an object with a role");
    }
    const std::string role = m["role"].get<std::string>();
    auto content_of = [&]() -> std::string {
      auto c = m.find("content");
      if (c == m.end() || c->is_null()) return {};
      if (!c->is_string()) throw SchemaError(where + ".content: expected a string");
      return c->get<std::string>();
    };
    if (role == "user") {
      if (seen_prompt || !t.turns.empty()) throw SchemaError(where + ": unexpected user message");
      t.prompt = std::string(trim(content_of()));
      seen_prompt = true;
    } else if (role == "assistant") {
      std::vector<Turn> turns;
      try {
        turns = parse_assistant_content(content_of());
      } catch (const ParseError& e) {
        throw ParseError(where + ".content: " + e.what());
      }
      if (auto tc = m.find("tool_call"); tc != m.end()) {
        if (!tc->is_object()) throw SchemaError(where + ".tool_call: expected an object");
        const std::string name = tc->value("name", std::string{});
        if (name != kCropAudioTool) throw SchemaError(where + ".tool_call: unknown tool '" + name + "'");
        auto args = tc->find("arguments");
        if (args == tc->end() || !args->is_object()) throw SchemaError(where + ".tool_call: missing arguments");
        Turn call{ToolCall{name, crop_argument(*args, "start_sec", i), crop_argument(*args, "end_sec", i)}};
        call.continues_message = !turns.empty();
        turns.push_back(std::move(call));
      }
      for (auto& turn : turns) t.turns.push_back(std::move(turn));
    } else if (role == "tool_response" || role == "tool") {
      t.turns.push_back(Turn{ToolResponse{std::string(trim(content_of()))}});
    } else {
      throw SchemaError(where + ": unknown role '" + role + "'");
    }
  }
  if (t.turns.empty()) throw ParseError("trajectory: no assistant turns");
  return t;
}

Trajectory parse_trajectory(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("trajectory: malformed JSON: ") + e.what());
  }
  return trajectory_from_json(doc);
}

json trajectory_to_json(const Trajectory& t) {
  json doc;
  if (!t.id.empty()) doc["id"] = t.id;
  if (t.task_kind) doc["task"] = to_string(*t.task_kind);
  json messages = json::array();
  messages.push_back(json{{"role", "user"}, {"content", t.prompt}});
  std::string content;
  bool open = false;  // an assistant content message is being accumulated
  auto flush = [&] {
    if (open) messages.push_back(json{{"role", "assistant"}, {"content", content}});
    content.clear();
    open = false;
  };
  for (const auto& turn : t.turns) {
    if (const auto* call = turn.get<ToolCall>()) {
      if (!turn.continues_message) flush();
      json msg{{"role", "assistant"}};
      if (open) msg["content"] = content;
      content.clear();
      open = false;
      msg["tool_call"] = json{{"name", call->name},
                              {"arguments", json{{"start_sec", call->start_sec}, {"end_sec", call->end_sec}}}};
      messages.push_back(std::move(msg));
    } else if (const auto* resp = turn.get<ToolResponse>()) {
      flush();
      messages.push_back(json{{"role", "tool_response"}, {"content", resp->content}});
    } else {
      if (!turn.continues_message || !open) {
        flush();
        open = true;
        content = render_content_turn(turn);
      } else {
        content += "\n" + render_content_turn(turn);
      }
    }
  }
  flush();
  doc["messages"] = std::move(messages);
  return doc;
}

std::string serialize_trajectory(const Trajectory& t) { return trajectory_to_json(t).dump(2) + "\n"; }

std::optional<TaskKind> infer_task_kind(std::string_view prompt) {
  std::string lower(prompt);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower.find("dense audio caption") != std::string::npos) return TaskKind::kDac;
  if (lower.find("output strictly in [mm:ss - mm:ss]") != std::string::npos) return TaskKind::kTag;
  if (lower.find("listen carefully to [") != std::string::npos) return TaskKind::kTac;
  return std::nullopt;
}

const char* to_string(FormatViolation::Kind k) noexcept {
  using K = FormatViolation::Kind;
  switch (k) {
    case K::kNoTurns:
      return "NoTurns";
    case K::kToolCallWithoutThink:
      return "ToolCallWithoutThink";
    case K::kToolCallWithoutResponse:
      return "ToolCallWithoutResponse";
    case K::kOrphanToolResponse:
      return "OrphanToolResponse";
    case K::kTrailingToolResponse:
      return "TrailingToolResponse";
    case K::kStepBudgetExceeded:
      return "StepBudgetExceeded";
    case K::kInvalidCropWindow:
      return "InvalidCropWindow";
    case K::kCropOutOfRange:
      return "CropOutOfRange";
    case K::kMissingAnswer:
      return "MissingAnswer";
    case K::kMultipleAnswers:
      return "MultipleAnswers";
    case K::kAnswerNotTerminal:
      return "AnswerNotTerminal";
    case K::kAnswerGrammar:
      return "AnswerGrammar";
    case K::kMultipleTimelines:
      return "MultipleTimelines";
    case K::kTimelineOverlap:
      return "TimelineOverlap";
  }
  return "?";
}

bool FormatCheck::has(FormatViolation::Kind k) const noexcept {
  return std::any_of(violations.begin(), violations.end(), [k](const FormatViolation& v) { return v.kind == k; });
}

std::size_t refinement_steps(const Trajectory& t, TaskKind task_kind) {
  const std::size_t total = t.step_count();
  if (task_kind != TaskKind::kDac) return total;
  const GlobalTimeline* tl = t.timeline();
  if (tl == nullptr) return total;
  std::vector<bool> visited(tl->segments.size(), false);
  std::size_t refinement = 0;
  for (const auto& turn : t.turns) {
    const auto* call = turn.get<ToolCall>();
    if (call == nullptr) continue;
    bool segment_visit = false;
    if (call->start_sec >= 0.0 && call->end_sec >= 0.0) {
      const auto s = TimePoint::from_seconds(call->start_sec).millis();
      const auto e = TimePoint::from_seconds(call->end_sec).millis();
      for (std::size_t k = 0; k < tl->segments.size(); ++k) {
        const auto& seg = tl->segments[k].interval;
        if (!visited[k] && near_ms(s, seg.start.millis(), 1000) && near_ms(e, seg.end.millis(), 1000)) {
          visited[k] = true;
          segment_visit = true;
          break;
        }
      }
    }
    if (!segment_visit) ++refinement;
  }
  return refinement;
}

FormatCheck validate_format(const Trajectory& t, TaskKind task_kind, const FormatOptions& opts) {
  using K = FormatViolation::Kind;
  FormatCheck out;
  auto flag = [&](K kind, std::size_t at, std::string detail) {
    out.violations.push_back({kind, at, std::move(detail)});
  };
  const auto& turns = t.turns;
  if (turns.empty()) {
    flag(K::kNoTurns, 0, "trajectory has no turns");
    return out;
  }

  std::size_t timelines = 0;
  std::vector<std::size_t> answers;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Turn& turn = turns[i];
    switch (turn.kind()) {
      case TurnKind::kTimelineDecl: {
        ++timelines;
        const auto& segs = turn.get<GlobalTimeline>()->segments;
        const int k = static_cast<int>(segs.size());
        if (k < opts.min_timeline_segments || k > opts.max_timeline_segments) {
          out.warnings.push_back("timeline has " + std::to_string(k) + " segments (expected " +
                                 std::to_string(opts.min_timeline_segments) + "-" +
                                 std::to_string(opts.max_timeline_segments) + ")");
        }
        for (std::size_t s = 0; s < segs.size(); ++s) {
          if (!segs[s].interval.valid()) {
            flag(K::kTimelineOverlap, i, "timeline segment " + std::to_string(s) + " is inverted");
          }
          if (s > 0 && segs[s].interval.start < segs[s - 1].interval.end) {
            flag(K::kTimelineOverlap, i, "timeline segment " + std::to_string(s) + " overlaps or precedes its predecessor");
          }
        }
        break;
      }
      case TurnKind::kToolCall: {
        const auto* call = turn.get<ToolCall>();
        if (i == 0 || turns[i - 1].kind() != TurnKind::kThink) {
          flag(K::kToolCallWithoutThink, i, "tool call is not preceded by a think turn");
        }
        if (i + 1 >= turns.size() || turns[i + 1].kind() != TurnKind::kToolResponse) {
          flag(K::kToolCallWithoutResponse, i, "tool call is not followed by a tool response");
        }
        if (!(call->start_sec >= 0.0 && call->start_sec < call->end_sec)) {
          flag(K::kInvalidCropWindow, i, "crop window requires 0 <= start_sec < end_sec");
        } else if (opts.duration && call->end_sec * 1000.0 > static_cast<double>(opts.duration->millis())) {
          flag(K::kCropOutOfRange, i, "crop window ends past the audio duration");
        }
        break;
      }
      case TurnKind::kToolResponse:
        if (i == 0 || turns[i - 1].kind() != TurnKind::kToolCall) {
          flag(K::kOrphanToolResponse, i, "tool response without a preceding tool call");
        }
        break;
      case TurnKind::kAnswer:
        answers.push_back(i);
        break;
      case TurnKind::kThink:
        break;
    }
  }
  if (timelines > 1) flag(K::kMultipleTimelines, 0, "more than one global timeline");
  if (turns.back().kind() == TurnKind::kToolResponse) {
    flag(K::kTrailingToolResponse, turns.size() - 1, "trajectory ends on a tool response");
  }
  const std::size_t steps = refinement_steps(t, task_kind);
  if (steps > static_cast<std::size_t>(opts.max_steps)) {
    flag(K::kStepBudgetExceeded, 0,
         std::to_string(steps) + " tool-call steps exceed the budget of " + std::to_string(opts.max_steps));
  }

  if (answers.empty()) {
    flag(K::kMissingAnswer, turns.size() - 1, "no answer turn");
  } else {
    if (task_kind != TaskKind::kDac && answers.size() > 1) {
      flag(K::kMultipleAnswers, answers[1], "exactly one answer is allowed for " + std::string(to_string(task_kind)));
    }
    if (answers.back() != turns.size() - 1) {
      flag(K::kAnswerNotTerminal, answers.back(), "the final turn is not an answer");
    }
    for (std::size_t idx : answers) {
      const std::string& text = turns[idx].get<Answer>()->text;
      bool good = false;
      switch (task_kind) {
        case TaskKind::kTag:
          good = parse_tag_answer(text).has_value();
          break;
        case TaskKind::kDac:
          good = parse_dac_answer(text).has_value();
          break;
        case TaskKind::kTac:
          good = parse_tac_answer(text).has_value();
          break;
      }
      if (!good) flag(K::kAnswerGrammar, idx, "answer does not match the " + std::string(to_string(task_kind)) + " grammar");
    }
  }
  out.ok = out.violations.empty();
  return out;
}

std::optional<Interval> parse_tag_answer(std::string_view text) {
  const auto iv = try_parse_interval(trim(text));
  if (!iv || !iv->valid()) return std::nullopt;
  // The bracket form must be the whole answer.
  if (trim(text).find('\n') != std::string_view::npos) return std::nullopt;
  return iv;
}

std::optional<std::vector<CaptionSegment>> parse_dac_answer(std::string_view text) {
  const std::string_view body = trim(text);
  if (body.empty()) return std::nullopt;
  std::vector<CaptionSegment> out;
  if (body.front() == '[' && body.size() > 1 && trim(body.substr(1)).front() == '{') {
    json arr;
    try {
      arr = json::parse(body.begin(), body.end());
    } catch (const json::parse_error&) {
      return std::nullopt;
    }
    if (!arr.is_array() || arr.empty()) return std::nullopt;
    for (const auto& e : arr) {
      if (!e.is_object() || !e.contains("start") || !e.contains("end") || !e.contains("caption")) return std::nullopt;
      if (!e["start"].is_string() || !e["end"].is_string() || !e["caption"].is_string()) return std::nullopt;
      try {
        const Interval iv{parse_timestamp(e["start"].get<std::string>()), parse_timestamp(e["end"].get<std::string>())};
        if (!iv.valid()) return std::nullopt;
        out.push_back({iv, e["caption"].get<std::string>()});
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    return out;
  }
  for (auto line : split_lines(body)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto close = line.find("]:");
    if (close == std::string_view::npos) return std::nullopt;
    const auto iv = try_parse_interval(line.substr(0, close + 1));
    if (!iv || !iv->valid()) return std::nullopt;
    const auto caption = trim(line.substr(close + 2));
    if (caption.empty()) return std::nullopt;
    out.push_back({*iv, std::string(caption)});
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<std::string> parse_tac_answer(std::string_view text) {
  const auto body = trim(text);
  if (body.empty()) return std::nullopt;
  return std::string(body);
}

std::string format_dac_answer(const std::vector<CaptionSegment>& segments) {
  std::string out;
  for (const auto& s : segments) {
    if (!out.empty()) out.push_back('\n');
    out += format_interval(s.interval) + ": " + s.caption;
  }
  return out;
}

std::optional<TaskAnswer> try_extract_answer(const Trajectory& t, TaskKind task_kind) {
  std::vector<const Answer*> answers;
  for (const auto& turn : t.turns) {
    if (const auto* a = turn.get<Answer>()) answers.push_back(a);
  }
  if (answers.empty()) return std::nullopt;
  switch (task_kind) {
    case TaskKind::kTag:
      if (auto iv = parse_tag_answer(answers.back()->text)) return TaskAnswer{*iv};
      return std::nullopt;
    case TaskKind::kTac:
      if (auto c = parse_tac_answer(answers.back()->text)) return TaskAnswer{*c};
      return std::nullopt;
    case TaskKind::kDac: {
      std::vector<CaptionSegment> all;
      for (const Answer* a : answers) {
        auto segs = parse_dac_answer(a->text);
        if (!segs) return std::nullopt;
        all.insert(all.end(), segs->begin(), segs->end());
      }
      std::stable_sort(all.begin(), all.end(), [](const CaptionSegment& a, const CaptionSegment& b) {
        return a.interval.start < b.interval.start;
      });
      return TaskAnswer{std::move(all)};
    }
  }
  return std::nullopt;
}

TaskAnswer extract_answer(const Trajectory& t, TaskKind task_kind) {
  const FormatCheck check = validate_format(t, task_kind);
  if (!check.ok) {
    throw ContractError("extract_answer: trajectory does not conform (" +
                        std::string(to_string(check.violations.front().kind)) + ")");
  }
  auto answer = try_extract_answer(t, task_kind);
  if (!answer) throw ContractError("extract_answer: no extractable answer");
  return *answer;
}

}  // namespace latkit
