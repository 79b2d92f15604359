#include "edgeplace/log.hpp"

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace edgeplace {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("edgeplace");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("EDGE_PLACER_LOG")) {
      level = spdlog::level::from_str(env);
    }
    l->set_level(level);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *logger;
}

}  // namespace edgeplace
