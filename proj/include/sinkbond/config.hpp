#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sinkbond/calibration.hpp"
#include "sinkbond/instruments.hpp"
#include "sinkbond/intensity_tree.hpp"
#include "sinkbond/jdcev.hpp"
#include "sinkbond/market_data.hpp"

namespace sinkbond {

struct GridSettings {
  int steps_per_year = 12;
  double lambda_cap = kDefaultIntensityCap;
  double max_drift_steps = 1.0;
  std::optional<double> maturity;  // horizon when no bond is given
};

struct McSettings {
  std::size_t paths = 100000;
  std::uint64_t seed = 20240101;
  std::string schedule = "forced_max";  // forced_max | forced_min
};

/// One batch run. Sections other than `grid` and `curve` are optional and
/// checked by the commands that need them.
struct RunConfig {
  GridSettings grid;
  DiscountCurve curve = DiscountCurve::flat(0.0);
  std::optional<JdcevParams> model;
  std::optional<SinkingBondSpec> bond;
  std::vector<CdsQuote> quotes;
  McSettings mc;
  CalibrationConfig calibration;
  std::optional<double> market_price;  // zspread
  double worst_spread = 0.0;           // worst

  /// Fully resolved configuration, defaults included, for report echoing.
  nlohmann::json resolved() const;
  TreeOptions tree_options() const;
};

/// Parses and validates a configuration document. Relative curve file paths
/// resolve against `base_dir`. Unknown keys are rejected with their path.
RunConfig parse_config(const nlohmann::json& doc,
                       const std::filesystem::path& base_dir = std::filesystem::path{});

RunConfig load_config(const std::filesystem::path& path);

}  // namespace sinkbond
