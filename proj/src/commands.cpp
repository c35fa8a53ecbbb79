#include "cpt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

#include "cpt/kway.hpp"
#include "cpt/tree.hpp"
#include "cpt/tree_bounds.hpp"

namespace cpt {

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void set_frozen(Estimator& est, bool frozen) {
  if (auto* tree = dynamic_cast<CondProbTree*>(&est)) tree->freeze_structure(frozen);
}

}  // namespace

TrainOutcome train_estimator(const RunConfig& cfg, std::span<const Example> data) {
  validate(cfg);
  if (data.empty()) throw EmptyStream("no training examples");

  TrainOutcome out;
  out.config = cfg;
  if (!cfg.learning_rate_grid.empty() || !cfg.alpha_grid.empty()) {
    const std::vector<double> etas = cfg.learning_rate_grid.empty() ? std::vector{cfg.learning_rate}
                                                                    : cfg.learning_rate_grid;
    const std::vector<double> alphas = cfg.alpha_grid.empty() ? std::vector{cfg.alpha} : cfg.alpha_grid;
    const auto grid = make_grid(etas, alphas);
    auto factory = [&](const GridPoint& p) {
      RunConfig c = cfg;
      c.learning_rate = p.learning_rate;
      c.alpha = p.alpha;
      return make_estimator(c, data);
    };
    out.grid = grid_search(grid, factory, data);
    out.config.learning_rate = grid[out.grid->best].learning_rate;
    out.config.alpha = grid[out.grid->best].alpha;
  }

  out.estimator = make_estimator(out.config, data);
  for (int pass = 0; pass < out.config.passes; ++pass) {
    if (pass == 1) set_frozen(*out.estimator, true);
    for (const Example& ex : data) out.estimator->learn(ex);
  }
  // Online trees stay open to new labels at evaluation time.
  if (out.config.mode != Mode::kCptFixed) set_frozen(*out.estimator, false);
  return out;
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  if (cfg.model_path.empty()) throw ConfigError("--model is required");
  const auto data = read_examples(cfg.train_path, cfg.hash_bits);
  const TrainOutcome t = train_estimator(cfg, data);
  if (t.grid) {
    for (std::size_t i = 0; i < t.grid->points.size(); ++i)
      log << "grid eta=" << t.grid->points[i].learning_rate << " alpha=" << t.grid->points[i].alpha
          << " loss=" << fixed4(t.grid->reports[i].mean_sq_loss) << (i == t.grid->best ? " *" : "") << "\n";
  }
  save_model(cfg.model_path, t.config, *t.estimator);
  log << "trained " << mode_name(t.config.mode) << " on " << data.size() << " examples, "
      << t.estimator->label_count() << " labels, " << t.estimator->regressor_updates() << " regressor updates\n";
}

EvalReport cmd_eval(const EvalRequest& req, std::ostream& out) {
  LoadedModel model = load_model(req.model_path);
  if (req.expected_mode && *req.expected_mode != model.config.mode)
    throw ConfigError("model mode is " + std::string(mode_name(model.config.mode)) + ", config asks for " +
                      std::string(mode_name(*req.expected_mode)));
  const auto test = read_examples(req.test_path, model.config.hash_bits);
  ValidationOptions opts;
  opts.delta = req.delta;
  opts.learn = !req.freeze;
  EvalReport r = progressive_validate(test, *model.estimator, opts);
  r.name = std::string(mode_name(model.config.mode));
  if (!req.timing) r.seconds = 0.0;

  const EvalReport rows[] = {r};
  out << format_table(rows);
  if (!req.report_path.empty()) write_file(req.report_path, format_rows(rows, req.timing));
  return r;
}

std::vector<EvalReport> compare_modes(const RunConfig& base, std::span<const Mode> modes,
                                      std::span<const Example> train, std::span<const Example> test,
                                      kernels::Exec exec) {
  if (modes.empty()) throw ConfigError("no modes to compare");
  std::vector<RunConfig> configs;
  for (Mode m : modes) {
    RunConfig c = base;
    c.mode = m;
    if (m != Mode::kKway) c.k.reset();
    else if (!c.k) throw ConfigError("kway needs --k");
    if (m != Mode::kCptOnline) c.alpha_grid.clear();
    validate(c);
    configs.push_back(std::move(c));
  }

  std::vector<EvalReport> reports(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic) if (exec == kernels::Exec::kParallel && n > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      ValidationOptions opts;
      opts.delta = configs[i].delta;
      if (test.empty()) {
        auto est = make_estimator(configs[i], train);
        reports[i] = progressive_validate(train, *est, opts);
      } else {
        auto t = train_estimator(configs[i], train);
        reports[i] = progressive_validate(test, *t.estimator, opts);
      }
      reports[i].name = std::string(mode_name(configs[i].mode));
      if (!configs[i].timing) reports[i].seconds = 0.0;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

std::vector<EvalReport> cmd_compare(const RunConfig& base, std::span<const Mode> modes, std::ostream& out) {
  const auto train = read_examples(base.train_path, base.hash_bits);
  std::vector<Example> test;
  if (!base.test_path.empty()) test = read_examples(base.test_path, base.hash_bits);
  auto reports = compare_modes(base, modes, train, test);
  out << format_table(reports);
  if (!base.report_path.empty()) write_file(base.report_path, format_rows(reports, base.timing));
  return reports;
}

std::vector<TradeoffRow> tradeoff_rows(std::size_t n, std::span<const std::size_t> ks) {
  std::vector<TradeoffRow> rows;
  for (std::size_t k : ks) {
    const double mult = regret_curve(n, k);  // validates k and n
    rows.push_back({k, (k - 1) * *exact_log(n, k), mult});
  }
  return rows;
}

std::string format_tradeoff(std::span<const TradeoffRow> rows) {
  std::string out = "k\tregressors_per_example\tmultiplier\n";
  for (const auto& r : rows)
    out += std::to_string(r.k) + "\t" + std::to_string(r.regressors_per_example) + "\t" + fixed4(r.multiplier) + "\n";
  return out;
}

TreeInspection inspect(const LoadedModel& model) {
  TreeInspection t;
  t.kind = std::string(mode_name(model.config.mode));
  if (const auto* tree = dynamic_cast<const CondProbTree*>(model.estimator.get())) {
    const DepthStats s = tree->depth_stats();
    // A fixed tree is balanced by construction, whatever alpha it was given.
    const double k = kappa(model.config.mode == Mode::kCptFixed ? 1.0 : tree->options().alpha);
    t.labels = s.leaves;
    t.max_depth = s.max_depth;
    t.total_leaf_depth = s.total_leaf_depth;
    t.disagreements = s.disagreement_count;
    t.depth_histogram = s.depth_histogram;
    t.depth_bound = t.labels >= 2 ? depth_bound(t.labels, k) : 2.0;
    t.total_depth_bound = t.labels >= 2 ? total_depth_bound(t.labels, k) : 0.0;
  } else if (const auto* kw = dynamic_cast<const KWayTree*>(model.estimator.get())) {
    t.labels = kw->label_count();
    t.max_depth = kw->depth();
    t.total_leaf_depth = static_cast<std::uint64_t>(t.labels) * kw->depth();
    t.depth_histogram.assign(kw->depth() + 1, 0);
    t.depth_histogram.back() = t.labels;
    const double levels = t.labels >= 2 ? std::ceil(std::log2(static_cast<double>(t.labels)) /
                                                    std::log2(static_cast<double>(kw->arity())) - 1e-12)
                                        : 1.0;
    t.depth_bound = std::max(1.0, levels);
    t.total_depth_bound = t.depth_bound * static_cast<double>(t.labels);
  } else {
    throw ConfigError("inspect needs a tree model, got " + t.kind);
  }
  t.within_bound = static_cast<double>(t.max_depth) <= t.depth_bound + 1e-9;
  return t;
}

std::string format_inspection(const TreeInspection& t) {
  std::string out;
  out += "model\t" + t.kind + "\n";
  out += "labels\t" + std::to_string(t.labels) + "\n";
  out += "max_depth\t" + std::to_string(t.max_depth) + "\n";
  out += "depth_bound\t" + fixed4(t.depth_bound) + "\n";
  out += "total_leaf_depth\t" + std::to_string(t.total_leaf_depth) + "\n";
  out += "total_depth_bound\t" + fixed4(t.total_depth_bound) + "\n";
  out += "disagreements\t" + std::to_string(t.disagreements) + "\n";
  out += "depth_histogram";
  for (std::size_t d = 0; d < t.depth_histogram.size(); ++d)
    if (t.depth_histogram[d] != 0) out += "\t" + std::to_string(d) + ":" + std::to_string(t.depth_histogram[d]);
  out += "\n";
  out += std::string("depth_check\t") + (t.within_bound ? "PASS" : "FAIL") + "\n";
  return out;
}

TreeInspection cmd_inspect(const std::string& model_path, std::ostream& out) {
  const TreeInspection t = inspect(load_model(model_path));
  out << format_inspection(t);
  return t;
}

void cmd_synth(const SyntheticSpec& spec, std::size_t m, std::uint64_t seed, std::ostream& out) {
  const SyntheticTask task = SyntheticTask::generate(spec);
  for (const auto& line : task.sample_lines(m, seed)) out << line << "\n";
}

}  // namespace cpt
