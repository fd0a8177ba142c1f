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
#include <fstream>

#include "vexsense/digest.hpp"
#include "vexsense/error.hpp"
#include "vexsense/svm.hpp"

namespace vexsense {

nlohmann::json model_to_json(const SvmModel& model) {
  nlohmann::json svs = nlohmann::json::array();
  for (const auto& p : model.support_vectors()) svs.push_back({p[0], p[1]});
  const auto& d = model.diagnostics();
  return {
      {"format", kModelFormat},
      {"version", kModelFormatVersion},
      {"kernel", "gaussian"},
      {"gamma", model.gamma()},
      {"c", model.c()},
      {"bias", model.bias()},
      {"scaler",
       {{"features", {"relative_average_pressure_pa", "pressure_change_from_prior_pa"}},
        {"mean", {model.scaler().mean[0], model.scaler().mean[1]}},
        {"scale", {model.scaler().scale[0], model.scaler().scale[1]}}}},
      {"support_vectors", svs},
      {"dual_coefficients", model.dual_coefficients()},
      {"training_corpus_digest", model.corpus_digest()},
      {"diagnostics",
       {{"iterations", d.iterations},
        {"kkt_gap", d.kkt_gap},
        {"free_support_vectors", d.free_support_vectors},
        {"bounded_support_vectors", d.bounded_support_vectors}}},
  };
}

SvmModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kModelFormat) throw InvalidInput("not a vexsense SVM model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) throw InvalidInput("unsupported model version " + std::to_string(version));
    if (doc.at("kernel").get<std::string>() != "gaussian") throw InvalidInput("only the gaussian kernel is supported");
    std::vector<Point2> svs;
    for (const auto& p : doc.at("support_vectors")) svs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    FeatureScaler scaler;
    const auto& s = doc.at("scaler");
    scaler.mean = {s.at("mean").at(0).get<double>(), s.at("mean").at(1).get<double>()};
    scaler.scale = {s.at("scale").at(0).get<double>(), s.at("scale").at(1).get<double>()};
    TrainingDiagnostics diag;
    if (doc.contains("diagnostics")) {
      const auto& d = doc["diagnostics"];
      diag.iterations = d.value("iterations", std::size_t{0});
      diag.kkt_gap = d.value("kkt_gap", 0.0);
      diag.free_support_vectors = d.value("free_support_vectors", std::size_t{0});
      diag.bounded_support_vectors = d.value("bounded_support_vectors", std::size_t{0});
    }
    return SvmModel(std::move(svs), doc.at("dual_coefficients").get<std::vector<double>>(),
                    doc.at("bias").get<double>(), doc.at("gamma").get<double>(), doc.at("c").get<double>(), scaler,
                    doc.value("training_corpus_digest", std::string{}), diag);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << model_to_json(model).dump(2) << '\n';
}

SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("cannot parse model " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

std::string model_digest(const SvmModel& model) {
  auto doc = model_to_json(model);
  // Solver diagnostics do not affect predictions.
  doc.erase("diagnostics");
  return sha256_hex(doc.dump());
}

}  // namespace vexsense
