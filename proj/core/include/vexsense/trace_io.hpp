// Copyright 2026 The vexsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "vexsense/hydraulics.hpp"

namespace vexsense {

inline constexpr const char* kTraceFormat = "vexsense.trace";
inline constexpr int kTraceFormatVersion = 1;

/// Writes "time_s,pressure_pa" rows with round-trip precision.
void write_trace_csv(std::ostream& out, const PressureTrace& trace);
/// Reads a CSV written by write_trace_csv. The sample rate is recovered from
/// the time column.
PressureTrace read_trace_csv(std::istream& in);

nlohmann::json trace_to_json(const PressureTrace& trace);
PressureTrace trace_from_json(const nlohmann::json& doc);

void save_trace_json(const std::filesystem::path& path, const PressureTrace& trace);
PressureTrace load_trace_json(const std::filesystem::path& path);

}  // namespace vexsense
