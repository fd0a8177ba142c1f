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
#include "vexsense/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "vexsense/error.hpp"

namespace vexsense {
namespace {

double parse_double(std::string_view text, std::size_t line) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("trace csv line " + std::to_string(line) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void write_trace_csv(std::ostream& out, const PressureTrace& trace) {
  out << "time_s,pressure_pa\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto samples = trace.samples();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out << static_cast<double>(k) / trace.sample_rate_hz() << ',' << samples[k] << '\n';
  }
}

PressureTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("time_s,pressure_pa", 0) != 0) {
    throw InvalidInput("trace csv must start with header 'time_s,pressure_pa'");
  }
  std::vector<double> times;
  std::vector<double> samples;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidInput("trace csv line " + std::to_string(number) + ": expected two columns");
    const std::string_view view(line);
    times.push_back(parse_double(view.substr(0, comma), number));
    samples.push_back(parse_double(view.substr(comma + 1), number));
  }
  if (samples.size() < 2) throw InvalidInput("trace csv needs at least two rows to recover the sample rate");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw InvalidInput("trace csv time column must be increasing");
  return PressureTrace(std::move(samples), std::round(1.0 / dt * 1e6) / 1e6);
}

nlohmann::json trace_to_json(const PressureTrace& trace) {
  nlohmann::json doc;
  doc["format"] = kTraceFormat;
  doc["version"] = kTraceFormatVersion;
  doc["sample_rate_hz"] = trace.sample_rate_hz();
  doc["duration_s"] = trace.duration_s();
  doc["scenario_label"] = trace.scenario_label() ? nlohmann::json(std::string(to_string(*trace.scenario_label())))
                                                 : nlohmann::json(nullptr);
  const auto& meta = trace.metadata();
  doc["metadata"] = {
      {"source", meta.source},
      {"seed", meta.seed},
      {"heart_rate_bpm", meta.heart_rate_bpm},
      {"tortuosity", meta.tortuosity},
      {"tip_to_clot_distance_m", meta.tip_to_clot_distance_m},
      {"clamped_samples", meta.clamped_samples},
  };
  doc["samples_pa"] = std::vector<double>(trace.samples().begin(), trace.samples().end());
  return doc;
}

PressureTrace trace_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kTraceFormat) throw InvalidInput("not a vexsense trace document");
    const int version = doc.at("version").get<int>();
    if (version != kTraceFormatVersion) {
      throw InvalidInput("unsupported trace document version " + std::to_string(version));
    }
    std::optional<ContactState> label;
    if (!doc.at("scenario_label").is_null()) label = contact_state_from_string(doc["scenario_label"].get<std::string>());
    TraceMetadata meta;
    if (doc.contains("metadata")) {
      const auto& m = doc["metadata"];
      meta.source = m.value("source", std::string{});
      meta.seed = m.value("seed", std::uint64_t{0});
      meta.heart_rate_bpm = m.value("heart_rate_bpm", 0.0);
      meta.tortuosity = m.value("tortuosity", 1.0);
      meta.tip_to_clot_distance_m = m.value("tip_to_clot_distance_m", 0.0);
      meta.clamped_samples = m.value("clamped_samples", std::size_t{0});
    }
    PressureTrace trace(doc.at("samples_pa").get<std::vector<double>>(), doc.at("sample_rate_hz").get<double>(), label,
                        std::move(meta));
    if (std::abs(trace.duration_s() - doc.at("duration_s").get<double>()) > 0.5 / trace.sample_rate_hz()) {
      throw InvalidInput("trace duration does not match its sample count");
    }
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed trace document: ") + e.what());
  }
}

void save_trace_json(const std::filesystem::path& path, const PressureTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << trace_to_json(trace).dump() << '\n';
}

PressureTrace load_trace_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open trace " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("cannot parse trace " + path.string() + ": " + e.what());
  }
  return trace_from_json(doc);
}

}  // namespace vexsense
