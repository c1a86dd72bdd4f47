// Copyright 2026 The datamarket Authors
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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "datamarket/config.hpp"

#include "json.hpp"

namespace datamarket {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

// Writes via a temp file plus rename so readers never observe a partial
// report.
void write_text_atomic(const std::filesystem::path& path,
                       std::string_view content);

// Round-trippable fixed formatting for CSV cells.
std::string format_double(double v);

// Common header block: tool version, config hash, seed, objective.
nlohmann::json report_header(const RunConfig& config,
                             std::string_view command);

void write_json_report(const std::filesystem::path& path,
                       const nlohmann::json& body);

}  // namespace datamarket
