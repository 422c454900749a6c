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

#include <iosfwd>

#include "common.hpp"

namespace latkit::cli {

int cmd_validate(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_eval(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_reward(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_run(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_chunk_eval(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_qc(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_report(const Settings& s, std::ostream& out, std::ostream& err);

/// Markdown view of any report document this tool writes.
std::string render_markdown(const json& report);

}  // namespace latkit::cli
