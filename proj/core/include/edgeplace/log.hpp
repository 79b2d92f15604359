#pragma once

#include <spdlog/logger.h>

namespace edgeplace {

/// Shared logger writing to stderr. The level comes from EDGE_PLACER_LOG
/// (error, warn, info, debug); default is warn.
spdlog::logger& log();

}  // namespace edgeplace
