#include "kiloswarm/log.hpp"

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace kiloswarm {

spdlog::logger& log() {
    static const std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::stderr_color_mt("kiloswarm");
        l->set_level(spdlog::level::warn);
        if (const char* level = std::getenv("KILOSWARM_LOG")) {
            l->set_level(spdlog::level::from_str(level));
        }
        return l;
    }();
    return *logger;
}

}  // namespace kiloswarm
