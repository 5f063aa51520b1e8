#include "pvarmix/config.hpp"
#include "pvarmix/error.hpp"
#include "pvarmix/forecast.hpp"
#include "pvarmix/io.hpp"
#include "pvarmix/sampler.hpp"
#include "pvarmix/simlab.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pvarmix;

namespace {

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  require(!ec, ErrorKind::io_error, "cannot create " + d);
}

void record_config(const RunConfig& c, const fs::path& dir) {
  std::ofstream f(dir / "config.txt");
  dump_config(c, f);
  require(static_cast<bool>(f), ErrorKind::io_error, "cannot write " + (dir / "config.txt").string());
}

PanelData load_data(const RunConfig& c) {
  require(!c.data.empty(), ErrorKind::config_error, "no data file given (--data or data=...)");
  return read_panel_csv(c.data);
}

int cmd_simulate(const RunConfig& c) {
  ensure_dir(c.out);
  record_config(c, c.out);
  RngStream rng(c.model.seed, hash_label("dgp"));
  const auto [panel, truth] = generate_dgp(c.dgp, rng);
  write_panel_csv((fs::path(c.out) / "panel.csv").string(), panel);
  write_truth((fs::path(c.out) / "truth.json").string(), truth, panel);
  std::cout << "wrote " << (fs::path(c.out) / "panel.csv").string() << " (" << panel.N() << " countries, T="
            << panel.T() << ")\n";
  if (!c.experiment) return 0;
  ExperimentPlan plan;
  plan.T_grid = parse_int_list(c.T_grid);
  plan.sparsity_grid = parse_double_list(c.sparsity_grid);
  plan.estimators.clear();
  for (const auto& e : split_list(c.estimators)) plan.estimators.push_back(parse_estimator(e));
  plan.replications = c.dgp.replications;
  plan.threads = c.threads;
  plan.model = c.model;
  DgpSpec spec = c.dgp;
  spec.seed = c.model.seed;
  const auto rows = run_experiment(spec, plan);
  write_experiment_csv((fs::path(c.out) / "experiment.csv").string(), rows);
  write_experiment_csv((fs::path(c.out) / "experiment_summary.csv").string(), summarize_experiment(rows));
  int failed = 0;
  for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
  if (failed > 0) {
    std::cerr << failed << " estimator runs failed; see experiment.csv\n";
    return 3;
  }
  return 0;
}

int cmd_fit(const RunConfig& c) {
  const PanelData panel = load_data(c);
  RunOptions opts;
  opts.label = c.model.prior == PriorKind::mixture ? "pvar" : "var_ng";
  const std::string dir = (fs::path(c.out) / "store").string();
  opts.checkpoint_dir = dir + ".partial";
  const ChainResult res = run_chain(panel, c.model, opts);
  res.store.save(dir);
  write_fit_summary(dir, res.store, c.model.ident, c.model.ident_coord);
  record_config(c, dir);
  std::cout << "wrote " << res.store.retained() << " draws to " << dir << "\n";
  return 0;
}

int cmd_forecast(const RunConfig& c) {
  const PanelData panel = load_data(c);
  ensure_dir(c.out);
  record_config(c, c.out);
  const ModelKind kind = parse_model(split_list(c.models).at(0));
  RunOptions opts;
  opts.label = model_name(kind);
  const FitResult fit = fit_model(kind, panel, c.model, opts);
  std::ofstream out(fs::path(c.out) / "predictive.csv");
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot write predictive.csv");
  out.precision(12);
  out << "model,country,variable,horizon,mean,var\n";
  const int M = panel.M();
  for (int h : parse_int_list(c.horizons)) {
    RngStream rng(c.model.seed, hash_label(std::string("predict:") + model_name(kind)) ^ static_cast<std::uint64_t>(h));
    const PredictiveSummary ps = predict(fit.store, panel, h, rng, {}, c.paths_per_draw);
    for (int k = 0; k < panel.K(); ++k)
      out << model_name(kind) << ',' << panel.countries[static_cast<std::size_t>(k / M)] << ','
          << panel.variables[static_cast<std::size_t>(k % M)] << ',' << h << ',' << ps.mean[k] << ',' << ps.var[k]
          << '\n';
    if (ps.overflow > 0) std::cerr << "h=" << h << ": " << ps.overflow << " paths hit the magnitude cap\n";
  }
  require(static_cast<bool>(out), ErrorKind::io_error, "short write on predictive.csv");
  return 0;
}

int cmd_evaluate(const RunConfig& c) {
  const PanelData panel = load_data(c);
  ensure_dir(c.out);
  record_config(c, c.out);
  EvaluationPlan plan;
  plan.train_end = c.train_end > 0 ? c.train_end : panel.T() - 12;
  plan.horizons = parse_int_list(c.horizons);
  plan.models.clear();
  for (const auto& m : split_list(c.models)) plan.models.push_back(parse_model(m));
  plan.benchmark = parse_model(c.benchmark);
  plan.target_variable = c.target_variable;
  plan.warm_start = c.warm_start;
  plan.paths_per_draw = c.paths_per_draw;
  plan.threads = c.threads;
  const EvaluationResult res = recursive_evaluation(panel, c.model, plan);
  write_scores_csv((fs::path(c.out) / "scores.csv").string(), res.scores, false);
  write_scores_csv((fs::path(c.out) / "aggregate.csv").string(), res.aggregate, true);
  std::cout << "scored " << res.records.size() << " forecasts\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panel VAR with mixture priors on domestic dynamics and factor stochastic volatility"};
  app.require_subcommand(0, 1);
  std::string config_file;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string data;
  std::string out;
  bool dump = false;
  app.add_option("--config", config_file, "flat key = value file");
  app.add_option("--set", sets, "override one key, key=value (repeatable)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--data", data, "panel CSV (date,country,variable,value)");
  app.add_option("--out", out, "output directory");
  app.add_flag("--dump-config", dump, "print every key with its value and exit");
  app.add_subcommand("simulate", "generate a panel and its truth record, or run the experiment grid")->fallthrough();
  app.add_subcommand("fit", "run the sampler on --data and write the draw store")->fallthrough();
  app.add_subcommand("forecast", "fit the first listed model and write predictive moments")->fallthrough();
  app.add_subcommand("evaluate", "recursive out-of-sample scores against the benchmark")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) load_config_file(cfg, config_file);
    for (const auto& s : sets) apply_assignment(cfg, s);
    if (app.count("--seed")) cfg.model.seed = seed;
    if (app.count("--threads")) cfg.threads = threads;
    if (!data.empty()) cfg.data = data;
    if (!out.empty()) cfg.out = out;
    if (!app.get_subcommands().empty()) cfg.command = app.get_subcommands().front()->get_name();
    if (dump) {
      dump_config(cfg, std::cout);
      return 0;
    }
    require(cfg.threads >= 1, ErrorKind::config_error, "threads must be >= 1");
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "forecast") return cmd_forecast(cfg);
    if (cfg.command == "evaluate") return cmd_evaluate(cfg);
    fail(ErrorKind::config_error, "no command given (simulate | fit | forecast | evaluate)");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::config_error || e.kind() == ErrorKind::io_error ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
