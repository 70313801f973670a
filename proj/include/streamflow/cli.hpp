#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace streamflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPartialBench = 4;

// Subcommands: train, generate, bench, pathstats, eval. `args` excludes the
// program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "0:30" (half-open range) or "0,1,7".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

}  // namespace streamflow::cli
