#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace copulalab::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUnsatisfied = 1,
  kUsageError = 2,
  kNumericalError = 3,
};

/// Runs one subcommand (discretize, coeffs, verify, simulate, lagstats,
/// psi-divergence). args excludes the program name. Reports go to `out` unless
/// --out is given; errors go to `err` as one JSON line.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// "A..B" (inclusive), single integers and comma-separated combinations;
/// lags must be >= 1 and strictly ascending.
std::vector<int> parse_lags(const std::string& text);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace copulalab::cli
