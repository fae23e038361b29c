#pragma once

#include <spdlog/spdlog.h>

namespace hmln {

/// Configures the shared stderr logger from HMLN_LOG (trace|debug|info|warn|error|off).
/// Defaults to warn.
void init_logging();

}  // namespace hmln
