#pragma once

#include "vdreg/config.hpp"

namespace vdreg {

// Subcommand entry points. Each returns a process exit code:
// 0 success, 1 runtime failure, 2 config error, 3 data error,
// with a one-line diagnostic on standard error.
int cmd_fit(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);

}  // namespace vdreg
