#pragma once

#include <spdlog/spdlog.h>

namespace kiloswarm {

/// Library logger (stderr). Verbosity comes from the KILOSWARM_LOG environment
/// variable: trace, debug, info, warn (default), error, critical or off.
spdlog::logger& log();

}  // namespace kiloswarm
