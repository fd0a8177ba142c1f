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
#include "vexsense/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "vexsense/error.hpp"

namespace vexsense {

std::string_view to_string(ContactLabel label) noexcept {
  return label == ContactLabel::contact ? "contact" : "no_contact";
}

ContactLabel contact_label_from_string(std::string_view text) {
  if (text == "contact") return ContactLabel::contact;
  if (text == "no_contact") return ContactLabel::no_contact;
  throw InvalidInput("unknown contact label '" + std::string(text) + "'");
}

double mean_pressure(std::span<const double> samples) {
  if (samples.empty()) throw InvalidInput("cannot average an empty trace");
  // Neumaier summation
  double sum = 0.0;
  double compensation = 0.0;
  for (double x : samples) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      compensation += (sum - t) + x;
    } else {
      compensation += (x - t) + sum;
    }
    sum = t;
  }
  return (sum + compensation) / static_cast<double>(samples.size());
}

double mean_pressure(const PressureTrace& trace) { return mean_pressure(trace.samples()); }

FeatureVector compute_features(const PressureTrace& current, const PressureTrace& reference,
                               const PressureTrace& prior) {
  if (current.sample_rate_hz() != reference.sample_rate_hz() || current.sample_rate_hz() != prior.sample_rate_hz()) {
    std::ostringstream msg;
    msg << "sample-rate mismatch: current " << current.sample_rate_hz() << " Hz, reference "
        << reference.sample_rate_hz() << " Hz, prior " << prior.sample_rate_hz() << " Hz";
    throw InvalidInput(msg.str());
  }
  const double current_mean = mean_pressure(current);
  return FeatureVector{current_mean - mean_pressure(reference), current_mean - mean_pressure(prior)};
}

void write_feature_csv(std::ostream& out, std::span<const LabeledSample> rows) {
  out << "relative_average_pressure_pa,pressure_change_from_prior_pa,label,scenario_id\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& row : rows) {
    if (row.scenario_id.find_first_of(",\n\r") != std::string::npos) {
      throw InvalidInput("scenario id '" + row.scenario_id + "' contains a CSV delimiter");
    }
    out << row.features.relative_average_pressure_pa << ',' << row.features.pressure_change_from_prior_pa << ','
        << to_string(row.label) << ',' << row.scenario_id << '\n';
  }
}

std::vector<LabeledSample> read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("feature csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "relative_average_pressure_pa,pressure_change_from_prior_pa,label,scenario_id") {
    throw InvalidInput("unexpected feature csv header '" + line + "'");
  }
  std::vector<LabeledSample> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() != 4) throw InvalidInput("feature csv line " + std::to_string(number) + ": expected 4 columns");
    auto number_at = [&](std::string_view text) {
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw InvalidInput("feature csv line " + std::to_string(number) + ": bad number '" + std::string(text) + "'");
      }
      return value;
    };
    LabeledSample row;
    row.features.relative_average_pressure_pa = number_at(cols[0]);
    row.features.pressure_change_from_prior_pa = number_at(cols[1]);
    row.label = contact_label_from_string(cols[2]);
    row.scenario_id = std::string(cols[3]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_feature_csv(const std::filesystem::path& path, std::span<const LabeledSample> rows) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  write_feature_csv(out, rows);
}

std::vector<LabeledSample> load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_feature_csv(in);
}

}  // namespace vexsense
