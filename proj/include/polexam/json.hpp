/*
 * Copyright 2026 The polexam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef POLEXAM_JSON_HPP_
#define POLEXAM_JSON_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace polexam {

/// Insertion-ordered JSON so every document we emit has a fixed field order.
using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Lower-case, zero-padded 16 digit hex.
std::string hex64(std::uint64_t value);

/// Parses `text`, mapping parse failures to Error(code) with `what` as context.
Json parse_json(std::string_view text, std::string_view what);

}  // namespace polexam

#endif  // POLEXAM_JSON_HPP_
