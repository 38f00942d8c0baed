// Copyright 2026 The probekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace probekit::utf8 {

/// Splits a UTF-8 string into code points, each returned as its own byte
/// sequence. Invalid bytes are passed through one at a time.
std::vector<std::string> split_chars(std::string_view text);

/// Number of code points in `text`, counting invalid bytes individually.
std::size_t length(std::string_view text);

/// Splits on Unicode White_Space characters. Empty pieces are dropped.
std::vector<std::string> split_whitespace(std::string_view text);

/// ASCII-only lowercasing; non-ASCII bytes are left unchanged.
std::string ascii_lower(std::string_view text);

}  // namespace probekit::utf8
