#pragma once

#include <spdlog/spdlog.h>

namespace attnseek {

// Shared stderr logger. The level comes from ATTNSEEK_LOG
// (trace, debug, info, warn, error, off); the default is warn.
spdlog::logger& log();

}  // namespace attnseek
