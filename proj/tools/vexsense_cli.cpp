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
// vexsense command-line front end: simulate traces, build and evaluate
// classifiers, run the benchtop harness, summarize study records, replay
// logged sessions and serve the operator protocol over HTTP.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <thread>

#include "vexsense/bench.hpp"
#include "vexsense/config.hpp"
#include "vexsense/error.hpp"
#include "vexsense/http_frontend.hpp"
#include "vexsense/metrics.hpp"
#include "vexsense/session_log.hpp"
#include "vexsense/session_service.hpp"
#include "vexsense/study_stats.hpp"
#include "vexsense/svm.hpp"
#include "vexsense/trace_io.hpp"

namespace {

using namespace vexsense;
using nlohmann::json;

struct Common {
  std::string config_path;

  Config load() const {
    return load_config_or_default(config_path.empty() ? std::nullopt
                                                      : std::optional<std::filesystem::path>(config_path));
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

std::size_t thread_count(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<LabeledSample> corpus_for(const Config& cfg, const std::string& corpus_path) {
  if (!corpus_path.empty()) return load_feature_csv(corpus_path);
  return build_training_corpus(cfg.training_seed, cfg.simulator, cfg.detector, cfg.training);
}

HttpFrontend* g_frontend = nullptr;

void on_signal(int) {
  if (g_frontend != nullptr) g_frontend->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vexsense: vacuum-excitation catheter contact sensing"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path, "JSON config file (default: $VEXSENSE_CONFIG)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate one pressure trace");
  std::string state = "open_vessel", sim_out;
  double hr = 0.0, tortuosity = 1.0, distance_mm = 0.0, duration = 2.0;
  std::uint64_t sim_seed = 0;
  sim_cmd->add_option("--state", state, "open_vessel | clot_contact | wall_graze");
  sim_cmd->add_option("--heart-rate", hr, "Heart rate in bpm (0: no pulsatility)");
  sim_cmd->add_option("--tortuosity", tortuosity, "Resistance multiplier >= 1");
  sim_cmd->add_option("--distance-mm", distance_mm, "Tip-to-clot distance label");
  sim_cmd->add_option("--duration", duration, "Seconds");
  sim_cmd->add_option("--seed", sim_seed);
  sim_cmd->add_option("-o,--out", sim_out, "Output file (.csv or .json; default CSV to stdout)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Build the synthetic corpus and train a model");
  std::string model_out = "model.json", corpus_out, train_corpus;
  train_cmd->add_option("-o,--out", model_out, "Model JSON path");
  train_cmd->add_option("--corpus", train_corpus, "Train on this feature CSV instead of the synthetic corpus");
  train_cmd->add_option("--corpus-out", corpus_out, "Also write the training corpus as feature CSV");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Repeated splits and k-fold cross-validation on the corpus");
  std::string eval_corpus, eval_out;
  std::size_t folds = 10, repeats = 10;
  double train_fraction = 0.303;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--corpus", eval_corpus, "Feature CSV (default: synthetic corpus)");
  eval_cmd->add_option("--folds", folds);
  eval_cmd->add_option("--repeats", repeats);
  eval_cmd->add_option("--train-fraction", train_fraction);
  eval_cmd->add_option("--seed", eval_seed);
  eval_cmd->add_option("-o,--out", eval_out, "JSON report path (default stdout)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic benchtop protocol");
  std::string bench_model, bench_out, outcomes_out, grid_out;
  bench_cmd->add_option("-m,--model", bench_model, "Model JSON (default: train on the synthetic corpus)");
  bench_cmd->add_option("-o,--out", bench_out, "JSON report path (default stdout)");
  bench_cmd->add_option("--outcomes", outcomes_out, "Per-window CSV");
  bench_cmd->add_option("--grid", grid_out, "Decision-grid CSV for boundary plots");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Classification metrics from confusion counts");
  ConfusionCounts counts;
  metrics_cmd->add_option("--tp", counts.tp)->required();
  metrics_cmd->add_option("--fp", counts.fp)->required();
  metrics_cmd->add_option("--fn", counts.fn)->required();
  metrics_cmd->add_option("--tn", counts.tn)->required();

  // study
  auto* study_cmd = app.add_subcommand("study", "Summarize study records (confusion, odds ratios, Wald test)");
  std::string records_path, study_format = "markdown", study_out;
  study_cmd->add_option("records", records_path, "Study records CSV")->required();
  study_cmd->add_option("--format", study_format, "markdown | json")->check(CLI::IsMember({"markdown", "json"}));
  study_cmd->add_option("-o,--out", study_out);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a logged detector session and compare");
  std::string log_path, replay_model;
  replay_cmd->add_option("log", log_path, "session.ndjson")->required();
  replay_cmd->add_option("-m,--model", replay_model, "Model JSON")->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve operator sessions over HTTP");
  std::optional<int> port;
  std::optional<std::string> host, data_dir, serve_model, static_dir;
  std::optional<std::uint64_t> serve_seed;
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--data-dir", data_dir);
  serve_cmd->add_option("-m,--model", serve_model, "Register this model JSON under the default model id");
  serve_cmd->add_option("--seed", serve_seed, "Service seed mixed into every session script");
  serve_cmd->add_option("--static", static_dir, "Directory served at / (console bundle)");

  // config
  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");
  std::string config_out;
  config_cmd->add_option("-o,--out", config_out, "Write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    const Config cfg = common.load();

    if (*config_cmd) {
      write_text(config_out, to_json(cfg).dump(2) + "\n");
    } else if (*sim_cmd) {
      const auto scenario = cfg.simulator.scenario(contact_state_from_string(state), hr, tortuosity,
                                                   distance_mm / 1000.0, sim_seed);
      const auto trace = cfg.simulator.simulate(scenario, duration);
      if (sim_out.size() > 5 && sim_out.ends_with(".json")) {
        save_trace_json(sim_out, trace);
      } else {
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        write_text(sim_out, csv.str());
      }
      if (trace.metadata().clamped_samples > 0) {
        std::cerr << "warning: " << trace.metadata().clamped_samples << " samples clamped at the vacuum limit\n";
      }
    } else if (*train_cmd) {
      const auto corpus = corpus_for(cfg, train_corpus);
      if (!corpus_out.empty()) save_feature_csv(corpus_out, corpus);
      const auto model = train(corpus, cfg.svm);
      save_model(model_out, model);
      const auto score = evaluate(model, corpus);
      json summary = {{"model", model_out},
                      {"samples", corpus.size()},
                      {"support_vectors", model.support_vectors().size()},
                      {"gamma", model.gamma()},
                      {"training_accuracy", score.accuracy},
                      {"iterations", model.diagnostics().iterations},
                      {"kkt_gap", model.diagnostics().kkt_gap},
                      {"model_digest", model_digest(model)}};
      std::cout << summary.dump(2) << '\n';
    } else if (*eval_cmd) {
      const auto corpus = corpus_for(cfg, eval_corpus);
      const auto split = split_evaluate(corpus, cfg.svm, train_fraction, repeats, eval_seed);
      const auto cv = cross_validate(corpus, folds, cfg.svm, eval_seed);
      json report = {{"schema", "vexsense.evaluation/v1"},
                     {"samples", corpus.size()},
                     {"split", {{"train_fraction", train_fraction},
                                {"repeats", repeats},
                                {"mean_accuracy", split.mean_accuracy},
                                {"mean_f1", split.mean_f1},
                                {"warnings", split.warnings}}},
                     {"cross_validation", {{"folds", folds},
                                           {"accuracy", cv.accuracy},
                                           {"classification_loss", cv.classification_loss},
                                           {"pooled", to_json(cv.pooled)},
                                           {"warnings", cv.warnings}}}};
      write_text(eval_out, report.dump(2) + "\n");
    } else if (*bench_cmd) {
      const SvmModel model = bench_model.empty() ? train(corpus_for(cfg, ""), cfg.svm) : load_model(bench_model);
      const auto result = run_benchtop(cfg.bench, model, cfg.simulator, cfg.detector, thread_count(cfg.bench_threads));
      write_text(bench_out, to_json(result, cfg.bench).dump(2) + "\n");
      if (!outcomes_out.empty()) {
        std::ofstream out(outcomes_out);
        write_outcomes_csv(out, result.samples);
      }
      if (!grid_out.empty()) {
        double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
        for (const auto& s : result.samples) {
          lo_x = std::min(lo_x, s.features.relative_average_pressure_pa);
          hi_x = std::max(hi_x, s.features.relative_average_pressure_pa);
          lo_y = std::min(lo_y, s.features.pressure_change_from_prior_pa);
          hi_y = std::max(hi_y, s.features.pressure_change_from_prior_pa);
        }
        const double px = 0.1 * (hi_x - lo_x) + 1.0, py = 0.1 * (hi_y - lo_y) + 1.0;
        std::ofstream out(grid_out);
        write_decision_grid_csv(out, model, {lo_x - px, lo_y - py}, {hi_x + px, hi_y + py}, 101, 101);
      }
      std::cerr << "accuracy " << result.total.correct() << "/" << result.total.total() << "\n";
    } else if (*metrics_cmd) {
      std::cout << json{{"counts", to_json(counts)}, {"metrics", to_json(metrics(counts))}}.dump(2) << '\n';
    } else if (*study_cmd) {
      const auto records = load_study_csv(records_path);
      write_text(study_out, study_format == "json" ? study_report_json(records).dump(2) + "\n"
                                                   : study_report_markdown(records));
    } else if (*replay_cmd) {
      const auto result = replay(std::filesystem::path(log_path), load_model(replay_model));
      for (const auto& m : result.mismatches) {
        std::cout << "mismatch seq=" << m.sequence << " trace=" << m.trace_id << ": " << m.detail << '\n';
      }
      std::cout << result.events.size() << " events replayed, " << (result.identical() ? "identical" : "DIFFERENT")
                << '\n';
      return result.identical() ? 0 : 1;
    } else if (*serve_cmd) {
      Config scfg = cfg;
      if (port) scfg.service.port = *port;
      if (host) scfg.service.host = *host;
      if (data_dir) scfg.service.data_dir = *data_dir;
      if (serve_seed) scfg.service.seed = *serve_seed;
      SessionService service(scfg);
      if (serve_model) {
        service.models().add(scfg.service.default_model, load_model(*serve_model));
      } else if (!service.models().contains(scfg.service.default_model)) {
        std::cerr << "no model '" << scfg.service.default_model << "' in the data directory; training one\n";
        service.models().add(scfg.service.default_model, train(corpus_for(scfg, ""), scfg.svm),
                             !scfg.service.data_dir.empty());
      }
      HttpOptions opts;
      opts.host = scfg.service.host;
      opts.port = scfg.service.port;
      if (static_dir) opts.static_dir = *static_dir;
      HttpFrontend frontend(service, opts);
      const int bound = frontend.bind();
      g_frontend = &frontend;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << opts.host << ":" << bound << "\n";
      frontend.serve();
      g_frontend = nullptr;
    }
  } catch (const vexsense::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
