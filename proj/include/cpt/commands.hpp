#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpt/eval.hpp"
#include "cpt/io.hpp"
#include "cpt/synthetic.hpp"

namespace cpt {

struct TrainOutcome {
  RunConfig config;  // with the grid-selected learning rate and alpha
  std::unique_ptr<Estimator> estimator;
  std::optional<GridResult> grid;
};

// Fits an estimator on `data` for cfg.passes passes. Passes after the first
// freeze a tree's structure and only retrain its regressors. A non-empty
// learning-rate or alpha grid first selects the parameters by progressive
// validation on `data`.
TrainOutcome train_estimator(const RunConfig& cfg, std::span<const Example> data);

// Trains on cfg.train_path and writes the model to cfg.model_path. Progress goes to
// `log`.
void cmd_train(const RunConfig& cfg, std::ostream& log);

struct EvalRequest {
  std::string model_path;
  std::string test_path;
  std::string report_path;
  std::optional<Mode> expected_mode;  // ConfigError when the model differs
  bool freeze = false;
  bool timing = true;
  double delta = kDefaultDelta;
};

EvalReport cmd_eval(const EvalRequest& req, std::ostream& out);

// One report per mode. Every mode sees the same training stream and seed;
// with a test stream each estimator is trained on cfg.train_path and then
// progressively validated on the test stream, otherwise progressive
// validation runs over the training stream itself.
std::vector<EvalReport> compare_modes(const RunConfig& base, std::span<const Mode> modes,
                                      std::span<const Example> train, std::span<const Example> test,
                                      kernels::Exec exec = kernels::Exec::kParallel);
std::vector<EvalReport> cmd_compare(const RunConfig& base, std::span<const Mode> modes, std::ostream& out);

struct TradeoffRow {
  std::size_t k;
  std::size_t regressors_per_example;
  double multiplier;
};

std::vector<TradeoffRow> tradeoff_rows(std::size_t n, std::span<const std::size_t> ks);
std::string format_tradeoff(std::span<const TradeoffRow> rows);

struct TreeInspection {
  std::string kind;
  std::size_t labels = 0;
  std::size_t max_depth = 0;
  double depth_bound = 0.0;
  std::uint64_t total_leaf_depth = 0;
  double total_depth_bound = 0.0;
  std::uint64_t disagreements = 0;
  std::vector<std::size_t> depth_histogram;
  bool within_bound = true;
};

// Tree statistics for a CPT or k-way model; ConfigError for other modes.
TreeInspection inspect(const LoadedModel& model);
std::string format_inspection(const TreeInspection& t);
TreeInspection cmd_inspect(const std::string& model_path, std::ostream& out);

// Writes m samples of the task, one example line each.
void cmd_synth(const SyntheticSpec& spec, std::size_t m, std::uint64_t seed, std::ostream& out);

}  // namespace cpt
