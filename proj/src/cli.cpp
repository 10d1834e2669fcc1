#include "sinkbond/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "sinkbond/calibration.hpp"
#include "sinkbond/error.hpp"
#include "sinkbond/intensity_tree.hpp"
#include "sinkbond/mc_oracle.hpp"
#include "sinkbond/pricer.hpp"

namespace sinkbond::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands{"price",    "calibrate", "zspread",
                                         "worst",    "mc-check",  "validate-tree"};

const SinkingBondSpec& need_bond(const RunConfig& c) {
  if (!c.bond) throw ValidationError("config.bond: required by this command");
  return *c.bond;
}

const JdcevParams& need_model(const RunConfig& c) {
  if (!c.model) throw ValidationError("config.model: required by this command");
  c.model->validate();
  return *c.model;
}

json params_json(const JdcevParams& p) {
  return {{"lambda0", p.lambda0}, {"sigma", p.sigma}, {"beta", p.beta}, {"z0", p.z0}};
}

RedemptionSchedule schedule_named(const SinkingBondSpec& bond, const std::string& name) {
  return name == "forced_min" ? forced_min_schedule(bond) : forced_max_schedule(bond);
}

json price_report(const RunConfig& c) {
  const SinkingBondSpec& bond = need_bond(c);
  const JdcevParams& model = need_model(c);
  const TimeGrid grid = grid_for(bond, c.grid.steps_per_year);
  const IntensityTree tree = build_default_tree(model, grid, c.tree_options());
  const SinkingBondPrice result = price_sinking_bond(tree, c.curve, bond);
  const double forced_max = price_fixed_schedule(tree, c.curve, bond, forced_max_schedule(bond));
  const double forced_min = price_fixed_schedule(tree, c.curve, bond, forced_min_schedule(bond));

  json policy = json::array();
  for (const RedemptionSummary& s : summarize_policy(tree, bond, result.solution)) {
    json actions = json::array();
    for (const auto& [fraction, prob] : s.actions) {
      actions.push_back({{"fraction", fraction}, {"probability", prob}});
    }
    policy.push_back({{"time", s.time},
                      {"survival", s.survival},
                      {"expected_fraction", s.expected_fraction},
                      {"actions", actions}});
  }
  return {{"price", result.price},
          {"forced_max", forced_max},
          {"forced_min", forced_min},
          {"option_value", forced_max - result.price},
          {"policy", policy},
          {"steps", grid.steps()}};
}

json calibrate_report(const RunConfig& c, int threads) {
  if (c.quotes.empty()) throw ValidationError("config.quotes: required by calibrate");
  if (!c.model) throw ValidationError("config.model.z0: required by calibrate");
  CalibrationConfig cc = c.calibration;
  cc.z0 = c.model->z0;
  cc.steps_per_year = c.grid.steps_per_year;
  cc.intensity_cap = c.grid.lambda_cap;
  cc.threads = threads;
  const CalibrationResult r = calibrate(c.quotes, c.curve, cc);
  json residuals = json::array();
  for (const QuoteFit& f : r.fits) {
    residuals.push_back({{"tenor", f.quote.tenor},
                         {"market", f.quote.spread},
                         {"model", f.model_spread},
                         {"residual", f.model_spread - f.quote.spread}});
  }
  return {{"params", params_json(r.params)},
          {"grid_seed", params_json(r.seed)},
          {"objective", r.objective},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"converged", r.converged},
          {"residuals", residuals}};
}

json zspread_report(const RunConfig& c) {
  const SinkingBondSpec& bond = need_bond(c);
  if (!c.market_price) throw ValidationError("config.zspread.market_price: required by zspread");
  const TimeGrid grid = grid_for(bond, c.grid.steps_per_year);
  return {{"spread", z_spread(bond, c.curve, grid, *c.market_price)},
          {"market_price", *c.market_price}};
}

json worst_report(const RunConfig& c) {
  const SinkingBondSpec& bond = need_bond(c);
  const TimeGrid grid = grid_for(bond, c.grid.steps_per_year);
  json report{{"price", worst_ansatz(bond, c.curve, grid, c.worst_spread)},
              {"spread", c.worst_spread}};
  if (bond.callable) report["mdp_price"] = deterministic_price(bond, c.curve, grid, c.worst_spread);
  return report;
}

json mc_report(const RunConfig& c, int threads) {
  const SinkingBondSpec& bond = need_bond(c);
  const JdcevParams& model = need_model(c);
  const TimeGrid grid = grid_for(bond, c.grid.steps_per_year);
  const RedemptionSchedule schedule = schedule_named(bond, c.mc.schedule);
  const IntensityTree tree = build_default_tree(model, grid, c.tree_options());
  const double tree_price = price_fixed_schedule(tree, c.curve, bond, schedule);
  SimulationOptions so;
  so.intensity_cap = c.grid.lambda_cap;
  so.threads = threads;
  const PathSet paths = simulate_paths(model, grid, c.mc.paths, c.mc.seed, so);
  const McEstimate mc = mc_price_fixed_policy(paths, bond, schedule, c.curve);
  const double diff = tree_price - mc.estimate;
  return {{"schedule", c.mc.schedule},
          {"tree", tree_price},
          {"mc", mc.estimate},
          {"std_error", mc.std_error},
          {"paths", mc.paths},
          {"difference", diff},
          {"within_3se", std::abs(diff) <= 3.0 * mc.std_error}};
}

json validate_report(const RunConfig& c) {
  const JdcevParams& model = need_model(c);
  TimeGrid grid = c.bond ? grid_for(*c.bond, c.grid.steps_per_year)
                         : [&] {
                             if (!c.grid.maturity) {
                               throw ValidationError(
                                   "config.grid.maturity: required by validate-tree without a bond");
                             }
                             return build_time_grid(*c.grid.maturity, c.grid.steps_per_year, {});
                           }();
  const IntensityTree tree = build_default_tree(model, grid, c.tree_options());
  json report = to_json(validate_tree(tree));
  report["steps"] = grid.steps();
  return report;
}

void write_report(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot write report to " + path);
  file << text;
}

int fail(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
  return code;
}

}  // namespace

void apply(const Overrides& overrides, RunConfig& config) {
  if (overrides.seed) config.mc.seed = *overrides.seed;
  if (overrides.steps_per_year) config.grid.steps_per_year = *overrides.steps_per_year;
}

json run_command(const std::string& command, const RunConfig& config, int threads) {
  json body;
  if (command == "price") {
    body = price_report(config);
  } else if (command == "calibrate") {
    body = calibrate_report(config, threads);
  } else if (command == "zspread") {
    body = zspread_report(config);
  } else if (command == "worst") {
    body = worst_report(config);
  } else if (command == "mc-check") {
    body = mc_report(config, threads);
  } else if (command == "validate-tree") {
    body = validate_report(config);
  } else {
    throw ValidationError("unknown command '" + command + "'");
  }
  return {{"command", command}, {"config", config.resolved()}, {"result", body}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sinking-bond pricing on a default-intensity lattice", "sinkbond"};
  std::string command;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int steps_per_year = 0;
  int threads = 1;
  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_path, "Report path (default: stdout)");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed");
  auto* spy_opt = app.add_option("--steps-per-year", steps_per_year, "Grid density")
                      ->check(CLI::Range(1, 100000));
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, kExitValidation, "usage", e.what());
  }

  try {
    RunConfig config = load_config(config_path);
    Overrides o;
    if (*seed_opt) o.seed = seed;
    if (*spy_opt) o.steps_per_year = steps_per_year;
    o.threads = threads;
    apply(o, config);
    json report = run_command(command, config, threads);
    write_report(report, out_path, out);
    if (command == "validate-tree" && !report["result"]["ok"].get<bool>()) {
      return fail(err, kExitNumerical, "numerical", "lattice invariants violated");
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    return fail(err, kExitValidation, "validation", e.what());
  } catch (const NumericalError& e) {
    return fail(err, kExitNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return fail(err, kExitFailure, "internal", e.what());
  }
}

}  // namespace sinkbond::cli
