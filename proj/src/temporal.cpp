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

#include "latkit/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "latkit/errors.hpp"

namespace latkit {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

TimePoint TimePoint::from_millis(std::int64_t millis) {
  if (millis < 0) {
    throw RangeError("negative time point: " + std::to_string(millis) + " ms");
  }
  return TimePoint(millis);
}

TimePoint TimePoint::from_seconds(double seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0) {
    throw RangeError("time in seconds must be finite and non-negative");
  }
  return TimePoint(static_cast<std::int64_t>(std::floor(seconds * 1000.0 + 0.5)));
}

Interval make_interval(std::int64_t start_ms, std::int64_t end_ms) {
  return Interval{TimePoint::from_millis(start_ms), TimePoint::from_millis(end_ms)};
}

const char* to_string(PositionThird p) noexcept {
  switch (p) {
    case PositionThird::kStart:
      return "Start";
    case PositionThird::kMiddle:
      return "Middle";
    case PositionThird::kEnd:
      return "End";
  }
  return "?";
}

TimePoint parse_timestamp(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("timestamp '" + std::string(text) + "': missing ':' separator");
  }
  const std::string_view minutes = text.substr(0, colon);
  const std::string_view seconds = text.substr(colon + 1);
  if (minutes.empty() || minutes.size() > 3) {
    throw ParseError("timestamp '" + std::string(text) + "': minutes field must have 1-3 digits");
  }
  for (char c : minutes) {
    if (!is_digit(c)) {
      throw ParseError("timestamp '" + std::string(text) + "': minutes field is not numeric");
    }
  }
  if (seconds.size() != 2 || !is_digit(seconds[0]) || !is_digit(seconds[1])) {
    throw ParseError("timestamp '" + std::string(text) + "': seconds field must have 2 digits");
  }
  std::int64_t m = 0;
  for (char c : minutes) m = m * 10 + (c - '0');
  const std::int64_t s = (seconds[0] - '0') * 10 + (seconds[1] - '0');
  if (s >= 60) {
    throw RangeError("timestamp '" + std::string(text) + "': seconds field out of range (00-59)");
  }
  return TimePoint::from_millis((m * 60 + s) * 1000);
}

std::string format_timestamp(TimePoint t) {
  const std::int64_t total = (t.millis() + 500) / 1000;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld", static_cast<long long>(total / 60),
                static_cast<long long>(total % 60));
  return buf;
}

Interval parse_interval(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw ParseError("interval '" + std::string(text) + "': expected [MM:SS - MM:SS]");
  }
  const std::string_view body = s.substr(1, s.size() - 2);
  const auto dash = body.find(" - ");
  if (dash == std::string_view::npos) {
    throw ParseError("interval '" + std::string(text) + "': expected ' - ' between timestamps");
  }
  return Interval{parse_timestamp(body.substr(0, dash)), parse_timestamp(body.substr(dash + 3))};
}

std::optional<Interval> try_parse_interval(std::string_view text) noexcept {
  try {
    return parse_interval(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string format_interval(const Interval& interval) {
  return "[" + format_timestamp(interval.start) + " - " + format_timestamp(interval.end) + "]";
}

double iou(const Interval& a, const Interval& b) {
  if (!a.valid() || !b.valid()) {
    throw ContractError("iou: interval start exceeds end");
  }
  const std::int64_t inter = std::min(a.end, b.end).millis() - std::max(a.start, b.start).millis();
  const std::int64_t hull = std::max(a.end, b.end).millis() - std::min(a.start, b.start).millis();
  if (hull == 0) return 1.0;  // both are the same point
  if (inter <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(hull);
}

TimePoint midpoint(const Interval& a) {
  if (!a.valid()) throw ContractError("midpoint: interval start exceeds end");
  return TimePoint::from_millis((a.start.millis() + a.end.millis()) / 2);
}

PositionThird classify_third(const Interval& a, TimePoint duration) {
  if (duration.millis() == 0) throw RangeError("classify_third: invalid duration 0");
  if (a.end > duration) {
    throw RangeError("classify_third: interval " + format_interval(a) + " exceeds duration " +
                     format_timestamp(duration));
  }
  const std::int64_t m3 = midpoint(a).millis() * 3;
  if (m3 < duration.millis()) return PositionThird::kStart;
  if (m3 < 2 * duration.millis()) return PositionThird::kMiddle;
  return PositionThird::kEnd;
}

}  // namespace latkit
