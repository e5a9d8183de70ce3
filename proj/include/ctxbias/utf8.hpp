// Copyright (c) 2026 The ctxbias Authors
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

#ifndef CTXBIAS_UTF8_HPP_
#define CTXBIAS_UTF8_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace ctxbias {

// Splits a UTF-8 string into one string per code point. Throws on malformed
// input.
std::vector<std::string> split_utf8(std::string_view text);

// Strips ASCII whitespace (incl. CR) from both ends.
std::string_view trim(std::string_view s);

}  // namespace ctxbias

#endif  // CTXBIAS_UTF8_HPP_
