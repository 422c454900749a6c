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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace latkit::net {

/// Newline-delimited request/response channel over a byte stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  /// Writes `line` followed by '\n'. Throws BackendError-family errors via the caller's mapping.
  virtual void write_line(std::string_view line) = 0;
  /// Next line without its terminator; nullopt on orderly EOF.
  virtual std::optional<std::string> read_line() = 0;
};

/// Endpoint of the form `tcp://host:port`.
struct Endpoint {
  std::string host;
  int port = 0;

  static Endpoint parse(std::string_view text);
  std::string to_string() const;
};

/// Connects over TCP. Throws std::runtime_error (net::IoError) when unreachable.
std::unique_ptr<LineChannel> connect_tcp(const Endpoint& endpoint);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latkit::net
