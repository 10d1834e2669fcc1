#include "sinkbond/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sinkbond/error.hpp"

namespace sinkbond {

using nlohmann::json;

namespace {

// Typed access to one JSON object; finish() rejects keys never asked for.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  std::string key_path(const std::string& key) const { return path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::optional<double> number(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) throw ValidationError(key_path(key) + ": expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ValidationError(key_path(key) + ": expected a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }
  double required_number(const std::string& key) {
    const auto v = number(key);
    if (!v) throw ValidationError(key_path(key) + ": required field missing");
    return *v;
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) throw ValidationError(key_path(key) + ": expected an integer");
    return v->get<std::int64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_boolean()) throw ValidationError(key_path(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) throw ValidationError(key_path(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) throw ValidationError(key_path(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        throw ValidationError(key_path(key) + "[" + std::to_string(i) + "]: expected a number");
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (seen_.count(key) == 0) {
        throw ValidationError("unknown key '" + key_path(key) + "'");
      }
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

int positive_int(std::optional<std::int64_t> v, int fallback, const std::string& where) {
  if (!v) return fallback;
  if (*v < 1 || *v > 1'000'000) throw ValidationError(where + ": must be a positive integer");
  return static_cast<int>(*v);
}

std::vector<RatePillar> pillars_from(const json& array, const std::string& path) {
  if (!array.is_array() || array.empty()) {
    throw ValidationError(path + ": expected a non-empty array of {time, rate}");
  }
  std::vector<RatePillar> out;
  for (std::size_t i = 0; i < array.size(); ++i) {
    Reader r(array[i], path + "[" + std::to_string(i) + "]");
    RatePillar p{r.required_number("time"), r.required_number("rate")};
    r.finish();
    out.push_back(p);
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

DiscountCurve parse_curve(const json& node, const std::filesystem::path& base_dir) {
  if (node.is_number()) return DiscountCurve::flat(node.get<double>());
  if (node.is_string()) {
    std::filesystem::path file = node.get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    return DiscountCurve(pillars_from(read_json_file(file), "curve file " + file.string()));
  }
  return DiscountCurve(pillars_from(node, "curve"));
}

JdcevParams parse_model(const json& node) {
  Reader r(node, "model");
  JdcevParams p;
  p.lambda0 = r.number("lambda0", 0.0);
  p.sigma = r.number("sigma", 0.0);
  p.beta = r.number("beta", 0.0);
  p.z0 = r.required_number("z0");
  r.finish();
  if (!(p.z0 > 0.0)) throw ValidationError("model.z0: must be positive");
  return p;
}

SinkingBondSpec parse_bond(const json& node) {
  Reader r(node, "bond");
  SinkingBondSpec b;
  b.maturity = r.required_number("maturity");
  b.coupon_rate = r.number("coupon_rate", b.coupon_rate);
  b.coupon_frequency = positive_int(r.integer("coupon_frequency"), b.coupon_frequency,
                                    "bond.coupon_frequency");
  b.redemption_dates = r.numbers("redemption_dates").value_or(std::vector<double>{});
  b.admissible_fractions = r.numbers("admissible_fractions").value_or(std::vector<double>{});
  b.alpha = r.number("alpha", b.alpha);
  b.recovery = r.number("recovery", b.recovery);
  if (const auto k = r.integer("nominal_units")) {
    b.nominal_units = positive_int(k, 1, "bond.nominal_units");
  }
  b.allow_skip = r.boolean("allow_skip").value_or(false);
  b.callable = r.boolean("callable").value_or(false);
  r.finish();
  b.validate();
  return b;
}

std::vector<CdsQuote> parse_quotes(const json& node) {
  if (!node.is_array()) throw ValidationError("quotes: expected an array");
  std::vector<CdsQuote> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string path = "quotes[" + std::to_string(i) + "]";
    Reader r(node[i], path);
    CdsQuote q;
    q.tenor = r.required_number("tenor");
    q.spread = r.required_number("spread");
    q.side = r.string("side").value_or("mid");
    r.finish();
    if (q.side != "mid" && q.side != "bid" && q.side != "ask") {
      throw ValidationError(path + ".side: expected mid, bid or ask");
    }
    q.validate();
    out.push_back(q);
  }
  return out;
}

void parse_calibration(const json& node, CalibrationConfig& c) {
  Reader r(node, "calibration");
  c.recovery = r.number("recovery", c.recovery);
  c.premium_frequency = positive_int(r.integer("premium_frequency"), c.premium_frequency,
                                     "calibration.premium_frequency");
  c.penalty_weight = r.number("penalty_weight", c.penalty_weight);
  c.max_iterations = positive_int(r.integer("max_iterations"), c.max_iterations,
                                  "calibration.max_iterations");
  c.tolerance = r.number("tolerance", c.tolerance);
  if (auto g = r.numbers("sigma_grid")) c.sigma_grid = *g;
  if (auto g = r.numbers("lambda0_grid")) c.lambda0_grid = *g;
  if (auto g = r.numbers("beta_grid")) c.beta_grid = *g;
  r.finish();
  if (!(c.recovery >= 0.0 && c.recovery < 1.0)) {
    throw ValidationError("calibration.recovery: must lie in [0, 1)");
  }
  if (!(c.penalty_weight >= 0.0)) throw ValidationError("calibration.penalty_weight: must be >= 0");
  if (!(c.tolerance > 0.0)) throw ValidationError("calibration.tolerance: must be positive");
  if (c.sigma_grid.empty() || c.lambda0_grid.empty() || c.beta_grid.empty()) {
    throw ValidationError("calibration grids must be non-empty");
  }
}

json model_json(const JdcevParams& p) {
  return {{"lambda0", p.lambda0}, {"sigma", p.sigma}, {"beta", p.beta}, {"z0", p.z0}};
}

}  // namespace

TreeOptions RunConfig::tree_options() const {
  TreeOptions o;
  o.intensity_cap = grid.lambda_cap;
  o.max_drift_steps = grid.max_drift_steps;
  return o;
}

json RunConfig::resolved() const {
  json out;
  out["grid"] = {{"steps_per_year", grid.steps_per_year},
                 {"lambda_cap", grid.lambda_cap},
                 {"max_drift_steps", grid.max_drift_steps}};
  if (grid.maturity) out["grid"]["maturity"] = *grid.maturity;
  json curve_out = json::array();
  for (const RatePillar& p : curve.pillars()) curve_out.push_back({{"time", p.time}, {"rate", p.rate}});
  out["curve"] = curve_out;
  if (model) out["model"] = model_json(*model);
  if (bond) {
    const SinkingBondSpec& b = *bond;
    out["bond"] = {{"maturity", b.maturity},
                   {"coupon_rate", b.coupon_rate},
                   {"coupon_frequency", b.coupon_frequency},
                   {"redemption_dates", b.redemption_dates},
                   {"admissible_fractions", b.admissible_fractions},
                   {"alpha", b.alpha},
                   {"recovery", b.recovery},
                   {"nominal_units", b.units()},
                   {"allow_skip", b.allow_skip},
                   {"callable", b.callable}};
  }
  if (!quotes.empty()) {
    json q = json::array();
    for (const CdsQuote& c : quotes) q.push_back({{"tenor", c.tenor}, {"spread", c.spread}, {"side", c.side}});
    out["quotes"] = q;
  }
  out["mc"] = {{"paths", mc.paths}, {"seed", mc.seed}, {"schedule", mc.schedule}};
  out["calibration"] = {{"recovery", calibration.recovery},
                        {"premium_frequency", calibration.premium_frequency},
                        {"penalty_weight", calibration.penalty_weight},
                        {"max_iterations", calibration.max_iterations},
                        {"tolerance", calibration.tolerance},
                        {"sigma_grid", calibration.sigma_grid},
                        {"lambda0_grid", calibration.lambda0_grid},
                        {"beta_grid", calibration.beta_grid}};
  if (market_price) out["zspread"] = {{"market_price", *market_price}};
  out["worst"] = {{"spread", worst_spread}};
  return out;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  Reader top(doc, "config");
  RunConfig cfg;

  if (const json* g = top.find("grid")) {
    Reader r(*g, "grid");
    cfg.grid.steps_per_year =
        positive_int(r.integer("steps_per_year"), cfg.grid.steps_per_year, "grid.steps_per_year");
    cfg.grid.lambda_cap = r.number("lambda_cap", cfg.grid.lambda_cap);
    cfg.grid.max_drift_steps = r.number("max_drift_steps", cfg.grid.max_drift_steps);
    cfg.grid.maturity = r.number("maturity");
    r.finish();
    if (!(cfg.grid.lambda_cap > 0.0)) throw ValidationError("grid.lambda_cap: must be positive");
    if (!(cfg.grid.max_drift_steps > 0.0)) {
      throw ValidationError("grid.max_drift_steps: must be positive");
    }
  }
  if (const json* c = top.find("curve")) {
    cfg.curve = parse_curve(*c, base_dir);
  } else {
    throw ValidationError("config.curve: required field missing");
  }
  if (const json* m = top.find("model")) cfg.model = parse_model(*m);
  if (const json* b = top.find("bond")) cfg.bond = parse_bond(*b);
  if (const json* q = top.find("quotes")) cfg.quotes = parse_quotes(*q);
  if (const json* m = top.find("mc")) {
    Reader r(*m, "mc");
    if (const auto p = r.integer("paths")) {
      if (*p < 1) throw ValidationError("mc.paths: must be >= 1");
      cfg.mc.paths = static_cast<std::size_t>(*p);
    }
    if (const auto s = r.integer("seed")) {
      if (*s < 0) throw ValidationError("mc.seed: must be non-negative");
      cfg.mc.seed = static_cast<std::uint64_t>(*s);
    }
    cfg.mc.schedule = r.string("schedule").value_or(cfg.mc.schedule);
    r.finish();
    if (cfg.mc.schedule != "forced_max" && cfg.mc.schedule != "forced_min") {
      throw ValidationError("mc.schedule: expected forced_max or forced_min");
    }
  }
  if (const json* c = top.find("calibration")) parse_calibration(*c, cfg.calibration);
  if (const json* z = top.find("zspread")) {
    Reader r(*z, "zspread");
    cfg.market_price = r.required_number("market_price");
    r.finish();
  }
  if (const json* w = top.find("worst")) {
    Reader r(*w, "worst");
    cfg.worst_spread = r.number("spread", 0.0);
    r.finish();
  }
  top.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json_file(path), path.parent_path());
}

}  // namespace sinkbond
