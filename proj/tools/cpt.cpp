#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpt/commands.hpp"

namespace {

using cpt::Mode;
using cpt::RunConfig;

void add_model_flags(CLI::App& app, RunConfig& cfg, std::string& mode, std::uint64_t& seed, std::size_t& k) {
  app.add_option("--mode", mode, "cpt-online | cpt-random | cpt-fixed | oaa | pecoc | kway | table");
  app.add_option("--alpha", cfg.alpha, "Insertion balance aggressiveness in (0, 1]");
  app.add_option("--eta", cfg.learning_rate, "Regressor learning rate");
  app.add_option("--hash-bits", cfg.hash_bits, "Feature hash width in [10, 30]");
  app.add_option("--passes", cfg.passes, "Training passes; passes after the first freeze tree structure");
  app.add_option("--k", k, "k-way arity (kway mode only)");
  app.add_option("--delta", cfg.delta, "Confidence parameter for the reported interval");
  app.add_option("--seed", seed, "Random seed")->required();
  app.add_option("--eta-grid", cfg.learning_rate_grid, "Learning rates to search")->delimiter(',');
  app.add_option("--alpha-grid", cfg.alpha_grid, "Alphas to search (cpt-online)")->delimiter(',');
  app.add_flag("!--no-timing", cfg.timing, "Zero the seconds column in written reports");
}

void finish_config(RunConfig& cfg, const std::string& mode, std::uint64_t seed, std::size_t k, bool has_k) {
  cfg.mode = cpt::parse_mode(mode);
  cfg.seed = seed;
  if (has_k) cfg.k = k;
}

std::vector<Mode> parse_modes(const std::vector<std::string>& names) {
  std::vector<Mode> modes;
  for (const auto& n : names) modes.push_back(cpt::parse_mode(n));
  return modes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional probability tree estimation"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string mode = "cpt-online";
  std::uint64_t seed = 0;
  std::size_t k = 0;

  auto* train = app.add_subcommand("train", "Train a model and write it to a file");
  add_model_flags(*train, cfg, mode, seed, k);
  train->add_option("--train", cfg.train_path, "Training examples")->required();
  train->add_option("--model", cfg.model_path, "Output model file")->required();

  cpt::EvalRequest eval_req;
  std::string eval_mode;
  auto* eval = app.add_subcommand("eval", "Progressively validate a model on a test stream");
  eval->add_option("--model", eval_req.model_path, "Model file")->required();
  eval->add_option("--test", eval_req.test_path, "Test examples")->required();
  eval->add_option("--report", eval_req.report_path, "Write tab-separated report here");
  eval->add_option("--mode", eval_mode, "Expected model mode");
  eval->add_option("--delta", eval_req.delta, "Confidence parameter");
  eval->add_flag("--freeze", eval_req.freeze, "Do not learn while testing");
  eval->add_flag("!--no-timing", eval_req.timing, "Zero the seconds column in the report");

  std::vector<std::string> compare_mode_names;
  auto* compare = app.add_subcommand("compare", "Compare several modes on identical streams");
  add_model_flags(*compare, cfg, mode, seed, k);
  compare->add_option("--modes", compare_mode_names, "Modes to compare")->delimiter(',')->required();
  compare->add_option("--train", cfg.train_path, "Training examples")->required();
  compare->add_option("--test", cfg.test_path, "Test examples; progressive training loss when absent");
  compare->add_option("--report", cfg.report_path, "Write tab-separated report here");

  std::size_t tradeoff_n = 0;
  std::vector<std::size_t> tradeoff_ks;
  auto* tradeoff = app.add_subcommand("tradeoff", "Regressor count against regret multiplier over k");
  tradeoff->add_option("--n", tradeoff_n, "Label count")->required();
  tradeoff->add_option("--k", tradeoff_ks, "Arities")->delimiter(',')->required();

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Tree statistics of a model");
  inspect->add_option("model", inspect_path, "Model file")->required();

  cpt::SyntheticSpec spec;
  std::size_t synth_m = 1000;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Emit a synthetic example stream");
  synth->add_option("--contexts", spec.contexts);
  synth->add_option("--labels", spec.labels);
  synth->add_option("--clusters", spec.clusters);
  synth->add_option("--support", spec.support);
  synth->add_option("--label-skew", spec.label_skew);
  synth->add_option("--context-skew", spec.context_skew);
  synth->add_option("--spill", spec.spill);
  synth->add_option("--task-seed", spec.seed, "Seed of the task distribution");
  synth->add_option("--examples", synth_m, "Number of examples");
  synth->add_option("--seed", synth_seed, "Seed of the draws")->required();
  synth->add_option("--out", synth_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      finish_config(cfg, mode, seed, k, train->count("--k") > 0);
      cpt::cmd_train(cfg, std::cerr);
    } else if (*eval) {
      if (!eval_mode.empty()) eval_req.expected_mode = cpt::parse_mode(eval_mode);
      cpt::cmd_eval(eval_req, std::cout);
    } else if (*compare) {
      finish_config(cfg, mode, seed, k, compare->count("--k") > 0);
      cpt::cmd_compare(cfg, parse_modes(compare_mode_names), std::cout);
    } else if (*tradeoff) {
      std::cout << cpt::format_tradeoff(cpt::tradeoff_rows(tradeoff_n, tradeoff_ks));
    } else if (*inspect) {
      const auto t = cpt::cmd_inspect(inspect_path, std::cout);
      return t.within_bound ? 0 : 3;
    } else if (*synth) {
      if (synth_out.empty()) {
        cpt::cmd_synth(spec, synth_m, synth_seed, std::cout);
      } else {
        std::ofstream out(synth_out);
        if (!out) throw cpt::IoError("cannot write " + synth_out);
        cpt::cmd_synth(spec, synth_m, synth_seed, out);
      }
    }
  } catch (const cpt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
