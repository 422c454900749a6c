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

#include <string_view>

// Task templates compiled in from data/prompts. Trailing newlines are stripped.
namespace latkit::prompts {

std::string_view twa_dac();
std::string_view twa_tag();  // {query}
std::string_view twa_tac();  // {interval}
std::string_view tag_binary();  // {query}
std::string_view dac_baseline();

}  // namespace latkit::prompts
