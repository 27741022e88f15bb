#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace quakealarm::cli {

inline constexpr std::uint64_t kDefaultSeed = 1;

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kParseError = 2 };

/// Parameters of one invocation, echoed into every JSON report.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string format;
  std::string magnitude = "mb";
  double mag_threshold = 5.5;
  double window_days = 21.0;
  double radius_km = 50.0;
  std::string predictor = "i";
  std::size_t n_reps = 1000;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string from;
  std::string to;

  nlohmann::json to_json() const;
};

/// Runs the command line `args` (without the program name). Primary output
/// goes to `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quakealarm::cli
