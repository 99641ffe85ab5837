#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pyrewatch::cli {

inline constexpr const char* kToolVersion = "pyrewatch 0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kInfeasible = 4 };

/// Runs one subcommand; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// start:stop:step, inclusive of stop up to rounding.
std::vector<double> parse_range(const std::string& text);

/// Comma separated numbers.
std::vector<double> parse_list(const std::string& text);

/// Writes via a temporary file and rename so readers never see partial output.
void write_atomic(const std::string& path, const std::string& content);

} // namespace pyrewatch::cli
