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

#include "latkit/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>

#include "latkit/errors.hpp"

namespace latkit {

namespace {

// Decodes one UTF-8 code point starting at s[i]; invalid bytes decode as themselves.
char32_t decode(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> bool {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) {
    i += 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    const char32_t cp = ((b0 & 0x1F) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    const char32_t cp = ((b0 & 0x0F) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                        (static_cast<unsigned char>(s[i + 2]) & 0x3F);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    const char32_t cp = ((b0 & 0x07) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                        ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                        (static_cast<unsigned char>(s[i + 3]) & 0x3F);
    i += 4;
    return cp;
  }
  i += 1;
  return b0;
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0xF900 && c <= 0xFAFF) ||
         (c >= 0x20000 && c <= 0x2FA1F) || (c >= 0x3040 && c <= 0x30FF) || (c >= 0xAC00 && c <= 0xD7AF);
}

bool is_punct(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  return (c >= 0x2000 && c <= 0x206F) ||   // general punctuation
         (c >= 0x3000 && c <= 0x303F) ||   // CJK symbols and punctuation
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65) || c == 0x00B7 || c == 0x00BF || c == 0x00A1;
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' || c == 0x00A0 ||
         c == 0x3000;
}

}  // namespace

std::vector<std::string> caption_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t begin = i;
    const char32_t c = decode(text, i);
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      // stripped without splitting: "don't" -> "dont"
    } else if (is_cjk(c)) {
      flush();
      tokens.emplace_back(text.substr(begin, i - begin));
    } else if (c < 0x80) {
      current.push_back(static_cast<char>(std::tolower(static_cast<int>(c))));
    } else {
      current.append(text.substr(begin, i - begin));
    }
  }
  flush();
  return tokens;
}

double token_f1_score(std::string_view reference, std::string_view candidate) {
  auto r = caption_tokens(reference);
  auto c = caption_tokens(candidate);
  if (r.empty() && c.empty()) return 1.0;
  if (r.empty() || c.empty()) return 0.0;
  std::sort(r.begin(), r.end());
  std::sort(c.begin(), c.end());
  std::vector<std::string> common;
  std::set_intersection(r.begin(), r.end(), c.begin(), c.end(), std::back_inserter(common));
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(r.size() + c.size());
}

double parse_scorer_response(std::string_view line) {
  while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.remove_suffix(1);
  while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
  if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v)) {
    throw ScorerError("scorer protocol: expected a decimal response, got '" + std::string(line) + "'");
  }
  return std::clamp(v, 0.0, 1.0);
}

ExternalScorer::ExternalScorer(std::unique_ptr<net::LineChannel> channel, std::string id)
    : channel_(std::move(channel)), id_(std::move(id)) {}

double ExternalScorer::score(std::string_view reference, std::string_view candidate) const {
  const nlohmann::json req = {{"reference", std::string(reference)}, {"candidate", std::string(candidate)}};
  std::lock_guard<std::mutex> lock(mu_);
  std::optional<std::string> line;
  try {
    channel_->write_line(req.dump());
    line = channel_->read_line();
  } catch (const net::IoError& e) {
    throw ScorerError(id_ + ": " + e.what());
  }
  if (!line) throw ScorerError(id_ + ": connection closed before response");
  return parse_scorer_response(*line);
}

std::unique_ptr<SemanticScorer> external_scorer(std::string_view endpoint) {
  try {
    const auto ep = net::Endpoint::parse(endpoint);
    return std::make_unique<ExternalScorer>(net::connect_tcp(ep), ep.to_string());
  } catch (const net::IoError& e) {
    throw ScorerError(std::string("scorer unavailable: ") + e.what());
  }
}

std::unique_ptr<SemanticScorer> make_scorer(std::string_view selection) {
  if (selection.empty() || selection == "builtin" || selection == "token-f1") {
    return std::make_unique<TokenF1Scorer>();
  }
  if (selection == "exact") return std::make_unique<ExactMatchScorer>();
  return external_scorer(selection);
}

}  // namespace latkit
