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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace latkit {

/// Non-negative offset from the start of an audio stream, in whole milliseconds.
class TimePoint {
 public:
  constexpr TimePoint() = default;

  /// Throws RangeError for negative input.
  static TimePoint from_millis(std::int64_t millis);
  /// Seconds as emitted in tool-call arguments; rounds half-up to milliseconds.
  static TimePoint from_seconds(double seconds);

  constexpr std::int64_t millis() const noexcept { return millis_; }
  constexpr double seconds() const noexcept { return static_cast<double>(millis_) / 1000.0; }

  friend constexpr auto operator<=>(TimePoint, TimePoint) = default;

 private:
  constexpr explicit TimePoint(std::int64_t millis) : millis_(millis) {}
  std::int64_t millis_ = 0;
};

/// Closed span [start, end]. Construction does not enforce start <= end so that
/// inverted spans in input data can be reported instead of rejected.
struct Interval {
  TimePoint start;
  TimePoint end;

  bool valid() const noexcept { return start <= end; }
  std::int64_t length_millis() const noexcept { return end.millis() - start.millis(); }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

Interval make_interval(std::int64_t start_ms, std::int64_t end_ms);

enum class PositionThird { kStart, kMiddle, kEnd };

const char* to_string(PositionThird p) noexcept;

/// Parses `M{1,3}:SS`. Minutes may exceed 59; seconds must be 00-59.
TimePoint parse_timestamp(std::string_view text);

/// Whole-second `MM:SS` rendering, rounding half-up to the nearest second.
std::string format_timestamp(TimePoint t);

/// Parses the bracketed form `[MM:SS - MM:SS]` (exact bracket-space-dash-space layout).
Interval parse_interval(std::string_view text);
/// Non-throwing variant for scoring paths where malformed answers are expected.
std::optional<Interval> try_parse_interval(std::string_view text) noexcept;
std::string format_interval(const Interval& interval);

/// Temporal IoU over the hull. Disjoint or touching spans give 0; two identical
/// points give 1. Throws ContractError for inverted spans.
double iou(const Interval& a, const Interval& b);

/// (start + end) / 2, rounded down.
TimePoint midpoint(const Interval& a);

/// Classifies the interval midpoint against [0,T/3), [T/3,2T/3), [2T/3,T].
PositionThird classify_third(const Interval& a, TimePoint duration);

}  // namespace latkit
