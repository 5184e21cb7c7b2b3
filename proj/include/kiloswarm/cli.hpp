#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kiloswarm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Command-line entry point. `args` excludes the program name.
///
///   run   --config PATH [--seed N] [--duration S] [--export PATH]
///         [--serve PORT] [--headless] [--speed-factor F]
///         [--shuffle-loop-order] [--ui-dir DIR] [--bind ADDR]
///   bench --bots LIST [--duration S] [--strategy auto|grid|brute]
///         [--workload edge_follow|follow_the_leader] [--seed N]
///
/// The last line written to `out` is a JSON summary. Returns 0 on success,
/// 1 for configuration or usage errors, 2 for runtime failures.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kiloswarm
