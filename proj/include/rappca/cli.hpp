#pragma once

#include <string>
#include <vector>

namespace rappca {

/// Entry point shared by the rappca binary and the test harness.
/// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace rappca
