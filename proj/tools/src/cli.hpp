#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace heintze::cli {

// Exit codes of the heintze tool.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kHypothesis = 2;
inline constexpr int kNotEquivalent = 3;
inline constexpr int kSolver = 4;

/// Runs the tool on `args` (program name excluded) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "start:stop:step", stop included when hit within 1e-9 steps.
std::vector<double> parse_grid(std::string_view text);

/// "1,1.5,2"
std::vector<double> parse_list(std::string_view text);

}  // namespace heintze::cli
