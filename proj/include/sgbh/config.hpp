/*
 * Copyright 2026 The sgbh Authors.
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

#ifndef SGBH_CONFIG_HPP_
#define SGBH_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sgbh {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Line-oriented `key = value` files. '#' starts a comment, blank lines are
// ignored, keys may use '-' or '_' interchangeably and are normalized to '-'.
// Throws ParseError on a line without '='.
ConfigEntries parse_config(const std::string& text, const std::string& origin = "<config>");
ConfigEntries read_config_file(const std::filesystem::path& path);
void write_config_file(const ConfigEntries& entries,
                       const std::filesystem::path& path);

}  // namespace sgbh

#endif  // SGBH_CONFIG_HPP_
