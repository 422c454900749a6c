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

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "latkit/net.hpp"

namespace latkit {

/// Caption similarity in [0, 1]. Implementations must tolerate concurrent
/// callers.
class SemanticScorer {
 public:
  virtual ~SemanticScorer() = default;
  virtual double score(std::string_view reference, std::string_view candidate) const = 0;
  /// Identifier recorded in run manifests.
  virtual std::string id() const = 0;
};

/// Lowercased, punctuation-stripped tokens; CJK ideographs and kana become
/// one token per character.
std::vector<std::string> caption_tokens(std::string_view text);

/// 2|R∩C| / (|R|+|C|) over token multisets. Both empty gives 1, one empty gives 0.
double token_f1_score(std::string_view reference, std::string_view candidate);

class TokenF1Scorer final : public SemanticScorer {
 public:
  double score(std::string_view reference, std::string_view candidate) const override {
    return token_f1_score(reference, candidate);
  }
  std::string id() const override { return "builtin:token-f1"; }
};

/// 1 for byte-identical captions, else 0.
class ExactMatchScorer final : public SemanticScorer {
 public:
  double score(std::string_view reference, std::string_view candidate) const override {
    return reference == candidate ? 1.0 : 0.0;
  }
  std::string id() const override { return "builtin:exact"; }
};

/// Forwards pairs over the line protocol: one JSON object
/// {"reference": ..., "candidate": ...} per request line, one decimal per
/// response line. Calls are serialized on the single connection.
class ExternalScorer final : public SemanticScorer {
 public:
  ExternalScorer(std::unique_ptr<net::LineChannel> channel, std::string id);

  double score(std::string_view reference, std::string_view candidate) const override;
  std::string id() const override { return id_; }

 private:
  mutable std::mutex mu_;
  std::unique_ptr<net::LineChannel> channel_;
  std::string id_;
};

/// Connects to a scorer service. Throws ScorerError when unreachable.
std::unique_ptr<SemanticScorer> external_scorer(std::string_view endpoint);

/// "builtin" (or "token-f1") selects the token-F1 scorer, "exact" the exact-match one;
/// anything else is an endpoint.
std::unique_ptr<SemanticScorer> make_scorer(std::string_view selection);

/// Parses one response line of the scorer protocol; clamps to [0, 1].
double parse_scorer_response(std::string_view line);

}  // namespace latkit
