#pragma once

#include <charconv>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swtail/check.hpp"
#include "swtail/errors.hpp"
#include "swtail/io.hpp"
#include "swtail/model.hpp"
#include "swtail/montecarlo.hpp"
#include "swtail/spectral.hpp"

namespace swtail {

namespace detail {

struct CliConfig {
  std::string model_path;
  std::string out_path;
  std::string samples_path;
  std::uint64_t seed = 42;
  int workers = 0;
  bool verbose = false;
  double delta = 0.0;
  std::string burnin = "auto";
  std::int64_t samples = 100000;
  std::string format = "csv";
  double k_frac = 0.005;
  std::int64_t replicas = 100000;
  double cutoff_drop = 0.0;
  int grid_points = 64;
  std::int64_t mc_paths = 200000;
};

inline void emit_json(const CliConfig& cfg, const json& j, std::ostream& out) {
  if (cfg.out_path.empty())
    out << j.dump(2) << '\n';
  else
    write_json_file(cfg.out_path, j);
}

inline int cmd_analyze(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const SwitchingModel model = load_model(cfg.model_path);
  if (cfg.verbose) err << "analyze: " << model.n_states() << " states\n";
  const SpectralReport rep = diagnostics(model, 1.0, default_s_grid(model, cfg.grid_points));
  emit_json(cfg, to_json(rep), out);
  return 0;
}

inline int cmd_simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const SwitchingModel model = load_model(cfg.model_path);
  SimulationPlan plan;
  plan.delta = cfg.delta;
  plan.n_samples = cfg.samples;
  plan.seed = cfg.seed;
  plan.workers = cfg.workers;
  if (cfg.burnin != "auto") {
    std::int64_t n = 0;
    const auto res = std::from_chars(cfg.burnin.data(), cfg.burnin.data() + cfg.burnin.size(), n);
    if (res.ec != std::errc{} || res.ptr != cfg.burnin.data() + cfg.burnin.size() || n <= 0)
      fail(Errc::bad_argument, "--burnin must be 'auto' or a positive integer");
    plan.burn_in_steps = n;
    const double delta = resolve_delta(model, plan);
    const double alpha = ergodicity_index(model, invariant_law(generator(model)));
    if (alpha < 0.0 && static_cast<double>(n) * delta * std::abs(alpha) < 40.0)
      err << "warning: burn-in " << n << " covers less than the contraction budget\n";
  }
  const TailSampleSet set = sample_stationary(model, plan);
  if (cfg.out_path.empty()) fail(Errc::bad_argument, "simulate requires --out");
  if (cfg.format == "csv")
    write_samples_csv(cfg.out_path, set.values);
  else if (cfg.format == "bin")
    write_samples_bin(cfg.out_path, set.values);
  else
    fail(Errc::bad_argument, "--format must be csv or bin");

  double mean = 0.0;
  double min_v = set.values.front(), max_v = set.values.front();
  for (const double v : set.values) {
    mean += v;
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  mean /= static_cast<double>(set.values.size());
  double var = 0.0;
  for (const double v : set.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(set.values.size() - 1);
  out << "n=" << set.values.size() << " mean=" << detail::format_double(mean)
      << " variance=" << detail::format_double(var) << " min=" << detail::format_double(min_v)
      << " max=" << detail::format_double(max_v) << '\n';
  return 0;
}

inline int cmd_tail(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<double> values = read_samples(cfg.samples_path);
  if (values.empty()) fail(Errc::io_error, "no samples in " + cfg.samples_path);
  if (cfg.verbose) err << "tail: " << values.size() << " samples\n";

  std::optional<double> kappa_ref;
  std::optional<Regime> regime;
  if (!cfg.model_path.empty()) {
    const SwitchingModel model = load_model(cfg.model_path);
    regime = classify_regime(model);
    if (*regime == Regime::heavy) kappa_ref = solve_kappa(model).kappa;
  }

  const TailEstimate est = hill_estimate(values, cfg.k_frac, kappa_ref);
  json j = to_json(est);
  j["plateau"] = to_json(hill_plateau(values));
  j["symmetry"] = to_json(tail_symmetry_check(values));
  j["moments"] = to_json(moment_probe(values, {0.5, 1.0, 2.0, 4.0, 8.0}));
  if (regime) j["regime"] = regime_name(*regime);
  if (kappa_ref) {
    j["kappa_spectral"] = *kappa_ref;
    j["kappa_ratio"] = est.kappa_hat / *kappa_ref;
  }
  emit_json(cfg, j, out);
  return 0;
}

inline int cmd_walkmax(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const SwitchingModel model = load_model(cfg.model_path);
  const KappaSolution kappa = solve_kappa(model);
  const double cutoff = cfg.cutoff_drop > 0.0 ? cfg.cutoff_drop : default_cutoff_drop(kappa.kappa);
  if (cfg.verbose) err << "walkmax: kappa=" << kappa.kappa << " cutoff=" << cutoff << '\n';
  const LadderEstimate est =
      simulate_walk_max(model, kappa.kappa, cfg.replicas, cutoff, cfg.seed, cfg.workers);
  emit_json(cfg, to_json(est), out);
  return 0;
}

inline int cmd_check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const SwitchingModel model = load_model(cfg.model_path);
  CheckOptions opts;
  opts.grid_points = cfg.grid_points;
  opts.mc_paths = cfg.mc_paths;
  opts.seed = cfg.seed;
  opts.workers = cfg.workers;
  if (cfg.verbose) err << "check: grid=" << opts.grid_points << " paths=" << opts.mc_paths << '\n';
  const CheckReport rep = run_check(model, opts);
  for (const auto& item : rep.items) {
    out << (item.pass ? "PASS" : "FAIL") << ' ' << item.name << " measured="
        << detail::format_double(item.measured);
    if (std::isfinite(item.limit)) out << " limit=" << detail::format_double(item.limit);
    if (!item.note.empty()) out << " (" << item.note << ')';
    out << '\n';
  }
  if (!cfg.out_path.empty()) write_json_file(cfg.out_path, to_json(rep));
  return rep.all_pass() ? 0 : 1;
}

}  // namespace detail

// Full command-line entry point, callable in-process. Streams default to the
// real stdout/stderr; tests pass their own to capture bytes.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Tail analysis of Markov-switching Ornstein-Uhlenbeck diffusions"};
  app.require_subcommand(1);
  detail::CliConfig cfg;

  auto add_common = [&](CLI::App* sub, bool model_required) {
    auto* opt = sub->add_option("--model", cfg.model_path, "model JSON file");
    if (model_required) opt->required();
    sub->add_option("--out", cfg.out_path, "output file (default: stdout)");
    sub->add_option("--seed", cfg.seed, "RNG seed (default 42)");
    sub->add_option("--workers", cfg.workers, "worker threads (default: hardware)");
    sub->add_flag("--verbose", cfg.verbose, "progress notes on stderr");
  };

  auto* analyze = app.add_subcommand("analyze", "classify the tail and compute the exponent");
  add_common(analyze, true);
  analyze->add_option("--grid-points", cfg.grid_points, "diagnostic grid size");

  auto* simulate = app.add_subcommand("simulate", "draw stationary samples by exact discretization");
  add_common(simulate, true);
  simulate->add_option("--delta", cfg.delta, "step size (default 0.25/max lambda)");
  simulate->add_option("--burnin", cfg.burnin, "'auto' or step count");
  simulate->add_option("--samples", cfg.samples, "number of replicas");
  simulate->add_option("--format", cfg.format, "csv or bin");

  auto* tail = app.add_subcommand("tail", "estimate the tail exponent from samples");
  add_common(tail, false);
  tail->add_option("--samples-file", cfg.samples_path, "samples file (csv or bin)")->required();
  tail->add_option("--k-frac", cfg.k_frac, "top fraction used by the estimator");

  auto* walkmax = app.add_subcommand("walkmax", "ladder structure of the driving random walk");
  add_common(walkmax, true);
  walkmax->add_option("--replicas", cfg.replicas, "number of walk replicas");
  walkmax->add_option("--cutoff-drop", cfg.cutoff_drop, "stop when the walk falls this far below its max");

  auto* check = app.add_subcommand("check", "run the spectral invariant battery");
  add_common(check, true);
  check->add_option("--grid-points", cfg.grid_points, "diagnostic grid size");
  check->add_option("--mc-paths", cfg.mc_paths, "paths per Monte Carlo operator row");

  std::vector<const char*> argv;
  argv.push_back("swtail");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(analyze)) return detail::cmd_analyze(cfg, out, err);
    if (app.got_subcommand(simulate)) return detail::cmd_simulate(cfg, out, err);
    if (app.got_subcommand(tail)) return detail::cmd_tail(cfg, out, err);
    if (app.got_subcommand(walkmax)) return detail::cmd_walkmax(cfg, out, err);
    if (app.got_subcommand(check)) return detail::cmd_check(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace swtail
