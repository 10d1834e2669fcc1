#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sinkbond/config.hpp"

namespace sinkbond::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> steps_per_year;
  int threads = 1;
};

/// Applies command-line overrides to a loaded configuration.
void apply(const Overrides& overrides, RunConfig& config);

/// Runs one command on a resolved configuration and returns its report.
nlohmann::json run_command(const std::string& command, const RunConfig& config,
                           int threads = 1);

/// Full command line (without the program name). Reports go to --out or
/// `out`; failures are reported on `err` as a JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sinkbond::cli
